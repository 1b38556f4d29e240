#include <cmath>
#include <cstdlib>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "riskforge/dsl.hpp"
#include "riskforge/oracle.hpp"

using namespace riskforge;

namespace {

RiskModel single_source(double rate) {
  return parse("riskmodel \"s\" timeunit 1y\nthreat T\nincident S consequence 10\n"
               "initiate T -> S frequency " + detail::shortest(rate) + ":1y\n");
}

RiskModel leads_to_model() {
  return parse(R"(riskmodel "l" timeunit 1y
threat T
scenario A
incident B consequence 100
initiate T -> A frequency 3:1y
leadsto A -> B likelihood 0.8
countermeasure CD cost 1:1y
countermeasure CT cost 1:1y
treats CT -> B effect 0.7L 0.4C
treats CD -> B effect 0.7L 0C
depends CD -> (CT -> B) effect 0.3L 0C
)");
}

History small_history() {
  std::vector<TimedEvent> events = {
      {0, 0.5, 0b01, {10, 0b01}}, {1, 1.0, 0b00, {0, 0}}, {0, 2.0, 0b10, {10, 0}},
      {0, 2.0, 0b00, {10, 0b10}}, {1, 3.5, 0b11, {0, 0}},
  };
  return History({"A", "B"}, {"C1", "C2"}, events, 4.0);
}

}  // namespace

TEST(History, TruncateAndFilter) {
  const History h = small_history();
  EXPECT_TRUE(truncate(h, 0.0).events().empty());
  EXPECT_EQ(truncate(h, h.horizon()), h);
  EXPECT_EQ(truncate(h, 2.0).events().size(), 4u);
  EXPECT_THROW(truncate(h, 5.0), OracleError);
  EXPECT_THROW(truncate(h, -1.0), OracleError);
  const History a = filter(h, [](const TimedEvent& e) { return e.event_class == 0; });
  EXPECT_EQ(a.events().size(), 3u);
  EXPECT_DOUBLE_EQ(empirical_frequency(h, "A", {}), 3.0 / 4.0);
}

TEST(History, FilterCommutesWithTruncate) {
  const History h = generate_history(leads_to_model(), {"CT"}, 200.0, 3);
  auto pred = [](const TimedEvent& e) { return e.event_class % 2 == 0 && !(e.countermeasures & 1); };
  for (double t : {0.0, 13.3, 100.0, 200.0}) EXPECT_EQ(filter(truncate(h, t), pred), truncate(filter(h, pred), t));
}

TEST(History, InvariantsAreChecked) {
  EXPECT_THROW(History({"A"}, {}, {{0, 2.0, 0, {}}, {0, 1.0, 0, {}}}, 5.0), OracleError);
  EXPECT_THROW(History({"A"}, {}, {{0, 6.0, 0, {}}}, 5.0), OracleError);
  EXPECT_THROW(History({"A"}, {"C"}, {{0, 1.0, 0b10, {}}}, 5.0), OracleError);
  EXPECT_THROW(History({"A"}, {}, {{0, 1.0, 0, {-1.0, 0}}}, 5.0), OracleError);
}

TEST(Empirical, ZeroCasesAndFiltering) {
  const History empty({"A"}, {"C"}, {}, 10.0);
  EXPECT_EQ(empirical_frequency(empty, "A", {}), 0.0);
  EXPECT_EQ(empirical_consequence(empty, "A", {}), 0.0);
  const History tagged({"A"}, {"C"}, {{0, 1.0, 1, {5, 0}}, {0, 2.0, 1, {5, 0}}}, 10.0);
  EXPECT_EQ(empirical_frequency(tagged, "A", {"C"}), 0.0);
  EXPECT_DOUBLE_EQ(empirical_frequency(tagged, "A", {}), 0.2);
  const History h = small_history();
  EXPECT_DOUBLE_EQ(empirical_consequence(h, "A", {}), 10.0);
  EXPECT_DOUBLE_EQ(empirical_consequence(h, "A", {"C1"}), 10.0);
  EXPECT_DOUBLE_EQ(empirical_consequence(h, "A", {"C2"}), 5.0);
}

TEST(ImpactMap, Antitone) {
  for (std::uint64_t absorbers = 0; absorbers < 8; ++absorbers) {
    const ImpactMap m{7.0, absorbers};
    for (std::uint64_t a = 0; a < 8; ++a)
      for (std::uint64_t b = 0; b < 8; ++b)
        if ((a & b) == a) EXPECT_GE(m(a), m(b));
  }
}

TEST(Generate, DeterministicPerSeed) {
  const RiskModel m = leads_to_model();
  EXPECT_EQ(generate_history(m, {"CD", "CT"}, 100.0, 42), generate_history(m, {"CD", "CT"}, 100.0, 42));
  EXPECT_NE(generate_history(m, {"CD", "CT"}, 100.0, 42), generate_history(m, {"CD", "CT"}, 100.0, 43));
}

TEST(Generate, ZeroRateProducesNothing) {
  EXPECT_TRUE(generate_history(single_source(0.0), {}, 1000.0, 1).events().empty());
}

TEST(Generate, PoissonCountWithinThreeSigma) {
  const History h = generate_history(single_source(3.0), {}, 10000.0, 2024);
  const double n = static_cast<double>(h.events().size());
  EXPECT_LE(std::abs(n - 30000.0), 3.0 * std::sqrt(30000.0));
  EXPECT_LE(std::abs(empirical_frequency(h, "S", {}) - 3.0), 0.052);
}

TEST(Generate, SpawnedEventsShareTheSourceTime) {
  const History h = generate_history(leads_to_model(), {}, 50.0, 9);
  std::set<double> a_times;
  for (const auto& e : h.events())
    if (h.class_of(e) == "A") a_times.insert(e.time);
  for (const auto& e : h.events())
    if (h.class_of(e) == "B") EXPECT_TRUE(a_times.count(e.time));
}

TEST(Generate, RejectsIntervalModels) {
  const RiskModel m = parse("riskmodel \"i\" timeunit 1y\nthreat T\nincident S consequence 1\n"
                            "initiate T -> S frequency [1,2]:1y\n");
  EXPECT_THROW(generate_history(m, {}, 10.0, 1), OracleError);
}

TEST(CheckRule, LeadsTo) {
  RuleInstance inst{leads_to_model(), {}, "B"};
  const Verdict v = check_rule(Rule::LeadsTo, inst, 100, adaptive_horizon(inst), 5);
  EXPECT_NEAR(v.primary.calculus_value, 2.4, 1e-12);
  EXPECT_TRUE(v.pass) << verdict_json(v).dump();
}

TEST(CheckRule, CountermeasureEffect) {
  RiskModel m = parse(R"(riskmodel "e" timeunit 1y
threat T
incident V consequence 100
initiate T -> V frequency 3:1y
countermeasure C cost 1:1y
treats C -> V effect 0.7L 0.4C
)");
  RuleInstance inst{m, {"C"}, "V"};
  const Verdict v = check_rule(Rule::CmEffect, inst, 100, adaptive_horizon(inst), 6);
  EXPECT_NEAR(v.primary.calculus_value, 0.9, 1e-12);
  ASSERT_TRUE(v.consequence.has_value());
  EXPECT_NEAR(v.consequence->calculus_value, 60.0, 1e-12);
  EXPECT_TRUE(v.pass) << verdict_json(v).dump();
}

TEST(CheckRule, CountermeasureDependency) {
  RuleInstance inst{leads_to_model(), {"CD", "CT"}, "B"};
  const Verdict v = check_rule(Rule::CmDependency, inst, 100, adaptive_horizon(inst), 7);
  EXPECT_NEAR(v.primary.calculus_value, 0.49, 1e-12);
  EXPECT_TRUE(v.pass) << verdict_json(v).dump();
}

TEST(CheckRule, DependeeKeepsItsStandAloneEffect) {
  // With the joint construction the tag rate of CT alone stays at 0.7.
  const History h = generate_history(leads_to_model(), {"CD", "CT"}, 5000.0, 8);
  const double all = empirical_frequency(h, "B", {});
  const double without_ct = empirical_frequency(h, "B", {"CT"});
  EXPECT_NEAR(1.0 - without_ct / all, 0.7, 0.02);
}

TEST(CheckRule, RejectsUnsuitableInstances) {
  RuleInstance inst{leads_to_model(), {}, "B"};
  EXPECT_THROW(check_rule(Rule::Exclusive, inst, 10, 10.0, 1), OracleError);
  EXPECT_THROW(check_rule(Rule::CmDependency, inst, 10, 10.0, 1), OracleError);
  EXPECT_THROW(check_rule(Rule::LeadsTo, inst, 1, 10.0, 1), OracleError);
  inst.vertex = "T";
  EXPECT_THROW(check_rule(Rule::LeadsTo, inst, 10, 10.0, 1), OracleError);
}

TEST(CheckRule, UntreatedZScoresCentreOnZero) {
  RuleInstance inst{single_source(3.0), {}, "S"};
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::vector<std::optional<double>> values;
    for (std::uint64_t k = 0; k < 20; ++k)
      values.push_back(empirical_frequency(generate_history(inst.model, {}, 200.0, sub_seed(seed, k)), "S", {}));
    sum += detail::summarize(3.0, values).z;
  }
  EXPECT_LT(std::abs(sum / 100.0), 0.5);
}

TEST(CheckRule, RandomInstancesPass) {
  std::mt19937_64 rng(31);
  for (const Rule r : kAllRules) {
    int pass = 0;
    for (int i = 0; i < 20; ++i) {
      const RuleInstance inst = random_instance(r, rng);
      pass += check_rule(r, inst, 50, adaptive_horizon(inst), 100 + i).pass;
    }
    EXPECT_GE(pass, 18) << to_string(r);
  }
}

TEST(CheckRule, ThreadCountDoesNotChangeResults) {
  RuleInstance inst{leads_to_model(), {"CD", "CT"}, "B"};
  setenv("RISKFORGE_THREADS", "1", 1);
  const auto one = verdict_json(check_rule(Rule::CmDependency, inst, 100, 100.0, 3));
  setenv("RISKFORGE_THREADS", "4", 1);
  const auto four = verdict_json(check_rule(Rule::CmDependency, inst, 100, 100.0, 3));
  unsetenv("RISKFORGE_THREADS");
  EXPECT_EQ(one, four);
}

TEST(Verdict, JsonFields) {
  RuleInstance inst{leads_to_model(), {}, "B"};
  const auto j = verdict_json(check_rule(Rule::LeadsTo, inst, 10, 50.0, 1));
  for (const char* key : {"rule", "runs", "horizon", "calculus_value", "empirical_mean", "std_error", "z",
                          "pass", "rng", "seed"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.at("rule"), "leads_to");
}

TEST(Instances, DefaultsAndNames) {
  const RiskModel m = leads_to_model();
  EXPECT_EQ(default_vertex(Rule::LeadsTo, m), "B");
  EXPECT_EQ(default_vertex(Rule::CmDependency, m), "B");
  EXPECT_FALSE(default_vertex(Rule::Exclusive, m).has_value());
  EXPECT_EQ(default_alternative(Rule::CmDependency, m), (Alternative{"CD", "CT"}));
  for (const Rule r : kAllRules) EXPECT_EQ(rule_from(to_string(r)), r);
  EXPECT_FALSE(rule_from("nope").has_value());
  std::mt19937_64 rng(1);
  for (const Rule r : kAllRules)
    for (int i = 0; i < 20; ++i) {
      const RuleInstance inst = random_instance(r, rng);
      EXPECT_LE(inst.model.vertices.size(), kMaxOracleVertices);
      EXPECT_NO_THROW(detail::check_instance(r, inst)) << to_string(r);
    }
}
