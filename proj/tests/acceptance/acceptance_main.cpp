// Acceptance checks AC1..AC9. Prints one PASS/FAIL line per criterion and
// exits nonzero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "riskforge/riskforge.hpp"
#include "support/fixtures.hpp"
#include "support/random_models.hpp"
#include "support/reference.hpp"

using namespace riskforge;

namespace {

// Tolerances.
constexpr double kPaperRel = 0.02;
// Slack for double rounding when a value sits exactly on the 2% boundary
// (NCD: 4.59 against 4.5).
constexpr double kRoundingSlack = 1e-9;
constexpr double kExactAbs = 1e-9;
constexpr double kCostAbs = 1e-6;
constexpr double kAc1Seconds = 1.0;
constexpr double kAc5Seconds = 300.0;
constexpr int kAc5MinPass = 95;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_error(double got, double published) { return std::abs(got - published) / std::abs(published); }

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::cout << id << " " << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
  if (!pass) ++failures;
}

std::string fmt(double x) { return detail::shortest(x); }

const Alternative kAll{"IRN", "EQS", "IRH"};

void ac1() {
  const auto t0 = Clock::now();
  const RiskModel m = rftest::fixture("ehealth_single_risk.riskdsl");
  const auto r = propagate(m, kAll);
  const double elapsed = seconds_since(t0);
  bool ok = elapsed < kAc1Seconds;
  std::ostringstream d;
  for (const auto& [id, published] : std::vector<std::pair<std::string, double>>{
           {"NCD", 4.5}, {"HGD", 3.0}, {"TDI", 6.3}, {"LMD", 5.04}}) {
    const double got = r.at(id).frequency.lo;
    const double e = rel_error(got, published);
    ok = ok && e <= kPaperRel + kRoundingSlack;
    d << id << "=" << fmt(got) << " (published " << fmt(published) << ", rel " << fmt(std::round(e * 1e5) / 1e5)
      << ") ";
  }
  d << "time " << fmt(std::round(elapsed * 1e6) / 1e3) << " ms";
  report("AC1", ok, d.str());
}

void ac2() {
  const auto r = propagate(rftest::fixture("ehealth_single_risk.riskdsl"), kAll);
  bool ok = true;
  double worst = 0.0;
  for (const auto& [id, exact] : std::vector<std::pair<std::string, double>>{
           {"NCD", 4.59}, {"HGD", 3.0}, {"TDI", 6.372}, {"LMD", 5.0976}}) {
    const auto f = r.at(id).frequency;
    const double e = std::max(std::abs(f.lo - exact), std::abs(f.hi - exact));
    worst = std::max(worst, e);
    ok = ok && e <= kExactAbs;
  }
  report("AC2", ok, "max abs error " + fmt(worst) + " (tol 1e-9)");
}

void ac3() {
  const auto states = enumerate_states(rftest::fixture("ehealth_single_risk.riskdsl"), "LMD");
  std::vector<double> got;
  bool ok = states.size() == 8;
  for (const auto& s : states) {
    got.push_back(s.frequency.lo);
    ok = ok && s.frequency.is_point() && s.consequence == Interval::point(5000.0);
  }
  std::vector<double> published{26.4, 21.36, 12.96, 12.96, 7.92, 7.92, 10.08, 5.04};
  std::sort(got.begin(), got.end());
  std::sort(published.begin(), published.end());
  double worst = 0.0;
  for (std::size_t i = 0; ok && i < published.size(); ++i) worst = std::max(worst, rel_error(got[i], published[i]));
  ok = ok && worst <= kPaperRel;
  report("AC3", ok,
         std::to_string(states.size()) + " states, max rel error " + fmt(std::round(worst * 1e5) / 1e5) +
             ", consequence 5000 for all");
}

void ac4() {
  const RiskModel m = rftest::fixture("ehealth_rounded.riskdsl");
  const auto cost = [&](const char* id) {
    const auto* c = m.find_countermeasure(id);
    return c ? c->expenditure.amount : -1.0;
  };
  const double gs1 = overall_cost(m, {"IRN", "IRH"});
  const double gs2 = overall_cost(m, {"IRN", "IRH", "EQS"});
  const bool ok = cost("IRN") == 5000.0 && cost("EQS") == 15000.0 && std::abs((gs2 - gs1) - 600.0) <= kCostAbs;
  report("AC4", ok, "OC(GS2) - OC(GS1) = " + fmt(gs2 - gs1) + " per " + m.base_period.str());
}

void ac5() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240501);
  bool ok = true;
  std::ostringstream d;
  std::uint64_t seed = 1;
  for (const Rule rule : kAllRules) {
    int pass = 0;
    for (int i = 0; i < 100; ++i) {
      const RuleInstance inst = random_instance(rule, rng);
      pass += check_rule(rule, inst, kDefaultRuns, adaptive_horizon(inst), seed++).pass;
    }
    ok = ok && pass >= kAc5MinPass;
    d << to_string(rule) << " " << pass << "/100 ";
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed <= kAc5Seconds;
  d << "time " << fmt(std::round(elapsed * 10) / 10) << " s";
  report("AC5", ok, d.str());
}

void ac6() {
  std::mt19937_64 rng(6);
  std::size_t violations = 0, checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const RiskModel m = rftest::random_model(rng);
    const Alternative alt = rftest::random_subset(rng, m.countermeasure_ids());
    const auto wide = propagate(m, alt);
    const auto narrow = propagate(rftest::point_inside(rng, m), alt);
    for (const auto& [id, r] : narrow) {
      ++checked;
      if (!wide.at(id).frequency.contains(r.frequency) || !wide.at(id).consequence.contains(r.consequence))
        ++violations;
    }
  }
  report("AC6", violations == 0,
         "1000 models, " + std::to_string(checked) + " vertex outputs, " + std::to_string(violations) +
             " violations");
}

bool dominated(const VertexResult& a, const VertexResult& b) {
  return a.frequency.lo <= b.frequency.lo && a.frequency.hi <= b.frequency.hi &&
         a.consequence.lo <= b.consequence.lo && a.consequence.hi <= b.consequence.hi;
}

void ac7() {
  std::mt19937_64 rng(7);
  std::size_t residual = 0, antitone = 0;
  for (int i = 0; i < 1000; ++i) {
    const RiskModel m = rftest::random_model(rng);
    const Propagator prop(m);
    const auto base = prop.run({});
    for (const auto& [id, r] : prop.run(rftest::random_subset(rng, m.countermeasure_ids())))
      if (!dominated(r, base.at(id))) ++residual;
  }
  rftest::GenOptions no_deps;
  no_deps.dependencies = false;
  for (int i = 0; i < 1000; ++i) {
    const RiskModel m = rftest::random_model(rng, no_deps);
    const auto ids = m.countermeasure_ids();
    const Alternative small = rftest::random_subset(rng, ids);
    Alternative large = small;
    for (const auto& c : rftest::random_subset(rng, ids)) large.insert(c);
    const Propagator prop(m);
    const auto a = prop.run(small);
    for (const auto& [id, r] : prop.run(large))
      if (!dominated(r, a.at(id))) ++antitone;
  }
  report("AC7", residual == 0 && antitone == 0,
         "residual violations " + std::to_string(residual) + " over 1000 pairs, antitone violations " +
             std::to_string(antitone) + " over 1000 subset pairs");
}

void ac8() {
  std::mt19937_64 rng(8);
  rftest::GenOptions opts;
  opts.max_countermeasures = 4;
  opts.max_risks = 3;
  int mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const RiskModel m = rftest::random_model(rng, opts);
    auto naive = rftest::naive_rank(m);
    if (!rftest::same_ranking(rank_alternatives(m), naive)) ++mismatches;
    naive.erase(std::remove_if(naive.begin(), naive.end(), [](const auto& a) { return !a.acceptable; }),
                naive.end());
    if (!rftest::same_ranking(find_alternatives(m), naive)) ++mismatches;
  }
  report("AC8", mismatches == 0, "200 models, " + std::to_string(mismatches) + " mismatching rankings");
}

bool in_bounds(const std::string& text, SourceSpan s) {
  std::vector<std::size_t> lengths{0};
  for (const char c : text) {
    if (c == '\n') lengths.push_back(0);
    else ++lengths.back();
  }
  return s.line >= 1 && s.line <= lengths.size() && s.column >= 1 && s.column <= lengths[s.line - 1] + 1;
}

bool round_trips(const RiskModel& m) {
  try {
    const std::string text = serialize(m);
    const RiskModel back = parse(text);
    return structurally_equal(back, m) && serialize(back) == text;
  } catch (const std::exception&) {
    return false;
  }
}

void ac9() {
  int failed = round_trips(rftest::fixture("ehealth.riskdsl")) ? 0 : 1;
  std::mt19937_64 rng(9);
  rftest::GenOptions opts;
  opts.odd_labels = true;
  for (int i = 0; i < 500; ++i) failed += !round_trips(rftest::random_model(rng, opts));

  const std::string good = rftest::read_text(rftest::data_path("ehealth.riskdsl"));
  const std::string junk = "#\"[]():,<=->$ \nxL0.-e9";
  int errors = 0, out_of_bounds = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string text = good;
    const int edits = 1 + static_cast<int>(rftest::pick(rng, 4));
    for (int k = 0; k < edits; ++k) {
      const std::size_t at = rftest::pick(rng, text.size());
      switch (rftest::pick(rng, 3)) {
        case 0: text.erase(at, 1 + rftest::pick(rng, 6)); break;
        case 1: text.insert(at, 1, junk[rftest::pick(rng, junk.size())]); break;
        default: text[at] = junk[rftest::pick(rng, junk.size())]; break;
      }
    }
    try {
      parse(text);
    } catch (const ParseError& e) {
      ++errors;
      out_of_bounds += !in_bounds(text, e.span());
    } catch (const std::exception&) {
      ++out_of_bounds;
    }
  }
  report("AC9", failed == 0 && out_of_bounds == 0,
         "round-trip failures " + std::to_string(failed) + " of 501, " + std::to_string(errors) +
             " parse errors with " + std::to_string(out_of_bounds) + " spans out of bounds");
}

}  // namespace

int main() {
  ac1();
  ac2();
  ac3();
  ac4();
  ac5();
  ac6();
  ac7();
  ac8();
  ac9();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
