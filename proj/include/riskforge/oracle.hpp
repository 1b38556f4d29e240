#pragma once

// Monte Carlo histories of timed events, used to check the calculus rules
// against their event-stream meaning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskforge/calculus.hpp"
#include "riskforge/detail/parallel.hpp"
#include "riskforge/model.hpp"

namespace riskforge {

class OracleError : public Error {
 public:
  using Error::Error;
};

/// Consequence of one event as a function of the countermeasure set:
/// `base` unless some countermeasure in the set absorbs it.
struct ImpactMap {
  double base = 0.0;
  std::uint64_t absorbers = 0;

  double operator()(std::uint64_t cs) const noexcept { return (absorbers & cs) ? 0.0 : base; }

  friend bool operator==(const ImpactMap&, const ImpactMap&) = default;
};

struct TimedEvent {
  std::uint32_t event_class = 0;     // index into History::classes()
  double time = 0.0;
  std::uint64_t countermeasures = 0; // bit j <-> History::countermeasures()[j]
  ImpactMap impact;

  friend bool operator==(const TimedEvent&, const TimedEvent&) = default;
};

/// A finite, time-ordered prefix of a history.
class History {
 public:
  History(std::vector<std::string> classes, std::vector<std::string> countermeasures,
          std::vector<TimedEvent> events, double horizon)
      : classes_(std::move(classes)),
        cms_(std::move(countermeasures)),
        events_(std::move(events)),
        horizon_(horizon) {
    if (!(horizon_ >= 0.0) || !std::isfinite(horizon_))
      throw OracleError("history horizon must be finite and >= 0");
    if (cms_.size() > 64) throw OracleError("history supports at most 64 countermeasures");
    const std::uint64_t known = cms_.size() == 64 ? ~std::uint64_t{0}
                                                  : (std::uint64_t{1} << cms_.size()) - 1;
    double prev = 0.0;
    for (const auto& e : events_) {
      if (e.time < prev) throw OracleError("history timestamps must be nondecreasing");
      if (e.time > horizon_) throw OracleError("history event beyond the horizon");
      if (e.event_class >= classes_.size()) throw OracleError("history event of unknown class");
      if ((e.countermeasures | e.impact.absorbers) & ~known)
        throw OracleError("history event names an unknown countermeasure");
      if (!(e.impact.base >= 0.0)) throw OracleError("history impact must be >= 0");
      prev = e.time;
    }
  }

  const std::vector<std::string>& classes() const noexcept { return classes_; }
  const std::vector<std::string>& countermeasures() const noexcept { return cms_; }
  const std::vector<TimedEvent>& events() const noexcept { return events_; }
  double horizon() const noexcept { return horizon_; }
  const std::string& class_of(const TimedEvent& e) const { return classes_.at(e.event_class); }

  std::optional<std::uint32_t> class_index(std::string_view id) const {
    for (std::size_t i = 0; i < classes_.size(); ++i)
      if (classes_[i] == id) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  }

  /// Bit mask of `cs`; ids that never occur in this history are ignored.
  std::uint64_t mask_of(const Alternative& cs) const {
    std::uint64_t m = 0;
    for (std::size_t j = 0; j < cms_.size(); ++j)
      if (cs.count(cms_[j])) m |= std::uint64_t{1} << j;
    return m;
  }

  History with_events(std::vector<TimedEvent> events, double horizon) const {
    return History(classes_, cms_, std::move(events), horizon);
  }

  friend bool operator==(const History&, const History&) = default;

 private:
  std::vector<std::string> classes_;
  std::vector<std::string> cms_;
  std::vector<TimedEvent> events_;
  double horizon_;
};

/// Events with time <= t; the result's horizon is t.
inline History truncate(const History& h, double t) {
  if (!(t >= 0.0) || t > h.horizon())
    throw OracleError("truncate: time " + detail::display(t) + " outside [0, " +
                      detail::display(h.horizon()) + "]");
  std::vector<TimedEvent> kept;
  for (const auto& e : h.events()) {
    if (e.time > t) break;
    kept.push_back(e);
  }
  return h.with_events(std::move(kept), t);
}

inline History filter(const History& h, const std::function<bool(const TimedEvent&)>& keep) {
  std::vector<TimedEvent> kept;
  for (const auto& e : h.events())
    if (keep(e)) kept.push_back(e);
  return h.with_events(std::move(kept), h.horizon());
}

/// Events of `event_class` avoiding every countermeasure of `cs`, per time unit.
inline double empirical_frequency(const History& h, std::string_view event_class,
                                  const Alternative& cs) {
  if (!(h.horizon() > 0.0)) return 0.0;
  const auto cls = h.class_index(event_class);
  if (!cls) return 0.0;
  const std::uint64_t mask = h.mask_of(cs);
  std::size_t n = 0;
  for (const auto& e : h.events())
    if (e.event_class == *cls && !(e.countermeasures & mask)) ++n;
  return static_cast<double>(n) / h.horizon();
}

/// Mean impact under `cs` over the events counted by empirical_frequency;
/// 0 when there are none.
inline double empirical_consequence(const History& h, std::string_view event_class,
                                    const Alternative& cs) {
  const auto cls = h.class_index(event_class);
  if (!cls) return 0.0;
  const std::uint64_t mask = h.mask_of(cs);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& e : h.events())
    if (e.event_class == *cls && !(e.countermeasures & mask)) {
      sum += e.impact(mask);
      ++n;
    }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

inline constexpr const char* kRngName = "mt19937_64 (splitmix64 sub-seeds)";

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of run `index` derived from a master seed.
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

namespace detail {

inline bool point_model(const RiskModel& m, std::string* what) {
  auto bad = [&](const std::string& s) {
    if (what) *what = s;
    return false;
  };
  for (const auto& v : m.vertices)
    if (v.consequence && !v.consequence->is_point()) return bad("consequence of " + v.id);
  for (const auto& r : m.initiates)
    if (!r.frequency.occurrences.is_point()) return bad("frequency " + r.source + " -> " + r.target);
  for (const auto& r : m.leadsto)
    if (!r.likelihood.is_point()) return bad("likelihood " + r.source + " -> " + r.target);
  for (const auto& t : m.treats)
    if (!t.freq_effect.is_point() || !t.cons_effect.is_point())
      return bad("effect " + t.countermeasure + " -> " + t.target);
  for (const auto& d : m.depends)
    if (!d.freq_dep.is_point() || !d.cons_dep.is_point())
      return bad("dependency of " + d.countermeasure);
  return true;
}

/// Tagging plan for one channel (frequency tags or consequence absorbers).
struct TagPlan {
  struct Single {
    unsigned bit;
    double p;
  };
  // Depender `dep` and dependee `tgt`: P(tgt | not dep) is the weakened
  // effect while the marginal of tgt keeps its stand-alone effect.
  struct Joint {
    unsigned dep;
    unsigned tgt;
    double p_dep;
    double p_tgt_given_dep;
    double p_tgt_given_not;
  };
  std::vector<Single> singles;
  std::vector<Joint> joints;

  template <class Rng>
  std::uint64_t draw(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uint64_t mask = 0;
    for (const auto& s : singles)
      if (u(rng) < s.p) mask |= std::uint64_t{1} << s.bit;
    for (const auto& j : joints) {
      const bool dep = u(rng) < j.p_dep;
      const bool tgt = u(rng) < (dep ? j.p_tgt_given_dep : j.p_tgt_given_not);
      if (dep) mask |= std::uint64_t{1} << j.dep;
      if (tgt) mask |= std::uint64_t{1} << j.tgt;
    }
    return mask;
  }
};

/// Compiled point model for repeated history generation under one alternative.
class Simulator {
 public:
  Simulator(const RiskModel& model, const Alternative& alt) : model_(model) {
    require_valid(model_);
    std::string what;
    if (!point_model(model_, &what))
      throw OracleError("the oracle needs point values; interval found at " + what);
    cms_ = model_.countermeasure_ids();
    if (cms_.size() > 64) throw OracleError("the oracle supports at most 64 countermeasures");
    for (const auto& id : alt)
      if (!model_.find_countermeasure(id)) throw Error("unknown countermeasure " + id + " in alternative");
    alt_mask_ = 0;
    for (std::size_t j = 0; j < cms_.size(); ++j)
      if (alt.count(cms_[j])) alt_mask_ |= std::uint64_t{1} << j;

    order_ = topological_order(model_);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < order_.size(); ++i) index[order_[i]] = i;
    nodes_.resize(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) {
      const Vertex& v = *model_.find_vertex(order_[i]);
      nodes_[i].exclusive = v.merge == MergePolicy::Exclusive;
      nodes_[i].impact = v.consequence ? v.consequence->lo : 0.0;
    }
    for (const auto& r : model_.initiates)
      nodes_[index.at(r.target)].rates.push_back(r.frequency.per_period(model_.base_period).lo);
    for (const auto& r : model_.leadsto)
      nodes_[index.at(r.target)].incoming.push_back({index.at(r.source), r.likelihood.lo});
    for (std::size_t i = 0; i < order_.size(); ++i) plan_tags(order_[i], alt, nodes_[i]);
  }

  const std::vector<std::string>& classes() const noexcept { return order_; }
  const std::vector<std::string>& countermeasures() const noexcept { return cms_; }

  History generate(double horizon, std::uint64_t seed) const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw OracleError("horizon must be > 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<TimedEvent>> per_vertex(nodes_.size());
    std::vector<double> times;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      const std::size_t branches = n.rates.size() + n.incoming.size();
      std::size_t chosen = branches;  // every branch contributes
      if (n.exclusive && branches > 1)
        chosen = std::min<std::size_t>(static_cast<std::size_t>(u(rng) * branches), branches - 1);
      times.clear();
      for (std::size_t b = 0; b < branches; ++b) {
        const bool keep = chosen == branches || chosen == b;
        if (b < n.rates.size()) {
          const double rate = n.rates[b];
          if (rate <= 0.0) continue;
          std::exponential_distribution<double> gap(rate);
          for (double t = gap(rng); t <= horizon; t += gap(rng))
            if (keep) times.push_back(t);
        } else {
          const auto& [src, r] = n.incoming[b - n.rates.size()];
          if (r <= 0.0) continue;
          std::poisson_distribution<int> spawn(r);
          for (const auto& e : per_vertex[src]) {
            if (e.countermeasures & alt_mask_) continue;
            const int k = spawn(rng);
            if (keep)
              for (int c = 0; c < k; ++c) times.push_back(e.time);
          }
        }
      }
      std::sort(times.begin(), times.end());
      auto& out = per_vertex[i];
      out.reserve(times.size());
      for (const double t : times) {
        TimedEvent e;
        e.event_class = static_cast<std::uint32_t>(i);
        e.time = t;
        e.countermeasures = n.freq_tags.draw(rng);
        e.impact = {n.impact, n.cons_tags.draw(rng)};
        out.push_back(e);
      }
    }
    std::vector<TimedEvent> all;
    for (auto& v : per_vertex) all.insert(all.end(), v.begin(), v.end());
    std::stable_sort(all.begin(), all.end(),
                     [](const TimedEvent& a, const TimedEvent& b) { return a.time < b.time; });
    return History(order_, cms_, std::move(all), horizon);
  }

 private:
  struct Node {
    bool exclusive = false;
    double impact = 0.0;
    std::vector<double> rates;
    std::vector<std::pair<std::size_t, double>> incoming;
    TagPlan freq_tags;
    TagPlan cons_tags;
  };

  unsigned bit_of(const std::string& cm) const {
    return static_cast<unsigned>(std::find(cms_.begin(), cms_.end(), cm) - cms_.begin());
  }

  void plan_tags(const std::string& vertex, const Alternative& alt, Node& node) const {
    std::vector<const TreatsRel*> here;
    for (const auto& t : model_.treats)
      if (t.target == vertex) here.push_back(&t);
    std::map<std::string, Effect> effect;
    for (const auto* t : here)
      effect[t->countermeasure] = alt.count(t->countermeasure)
                                      ? effective_effect(*t, alt, model_.depends)
                                      : Effect{t->freq_effect, t->cons_effect};
    plan_channel(here, alt, effect, true, node.freq_tags);
    plan_channel(here, alt, effect, false, node.cons_tags);
  }

  void plan_channel(const std::vector<const TreatsRel*>& here, const Alternative& alt,
                    const std::map<std::string, Effect>& effect, bool freq, TagPlan& plan) const {
    auto eff = [&](const std::string& cm) {
      const Effect& e = effect.at(cm);
      return freq ? e.freq.lo : e.cons.lo;
    };
    std::set<std::string> claimed;
    for (const auto* t : here) {
      if (!alt.count(t->countermeasure) || claimed.count(t->countermeasure)) continue;
      std::vector<const DependsRel*> active;
      for (const auto& d : model_.depends)
        if (d.treats.refers_to(*t) && alt.count(d.countermeasure)) active.push_back(&d);
      if (active.size() != 1) continue;
      const std::string& dep = active.front()->countermeasure;
      if (!effect.count(dep) || claimed.count(dep)) continue;
      const double e = freq ? t->freq_effect.lo : t->cons_effect.lo;
      const double weakened = eff(t->countermeasure);
      const double p_dep = eff(dep);
      if (p_dep <= 0.0) continue;
      const double q = (e - (1.0 - p_dep) * weakened) / p_dep;
      if (q < 0.0 || q > 1.0) continue;
      plan.joints.push_back({bit_of(dep), bit_of(t->countermeasure), p_dep, q, weakened});
      claimed.insert(dep);
      claimed.insert(t->countermeasure);
    }
    for (const auto* t : here)
      if (!claimed.count(t->countermeasure))
        plan.singles.push_back({bit_of(t->countermeasure), eff(t->countermeasure)});
  }

  RiskModel model_;
  std::vector<std::string> cms_;
  std::uint64_t alt_mask_ = 0;
  std::vector<std::string> order_;
  std::vector<Node> nodes_;
};

}  // namespace detail

/// One simulated history of `model` under `alternative`, deterministic in
/// `seed`. Interval-valued models are rejected.
inline History generate_history(const RiskModel& model, const Alternative& alternative,
                                double horizon, std::uint64_t seed) {
  return detail::Simulator(model, alternative).generate(horizon, seed);
}

// ---------------------------------------------------------------------------
// Rule checks
// ---------------------------------------------------------------------------

enum class Rule { LeadsTo, Separate, Exclusive, CmEffect, CmDependency };

inline constexpr Rule kAllRules[] = {Rule::LeadsTo, Rule::Separate, Rule::Exclusive,
                                     Rule::CmEffect, Rule::CmDependency};

inline std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::LeadsTo: return "leads_to";
    case Rule::Separate: return "separate";
    case Rule::Exclusive: return "exclusive";
    case Rule::CmEffect: return "cm_effect";
    case Rule::CmDependency: return "cm_dependency";
  }
  return "?";
}

inline std::optional<Rule> rule_from(std::string_view s) {
  for (const Rule r : kAllRules)
    if (to_string(r) == s) return r;
  return std::nullopt;
}

/// A small point model, the alternative to simulate and the vertex where the
/// rule's conclusion is measured.
struct RuleInstance {
  RiskModel model;
  Alternative alternative;
  std::string vertex;
};

inline constexpr std::size_t kMaxOracleVertices = 6;
inline constexpr double kDefaultHorizon = 10000.0;
inline constexpr std::size_t kDefaultRuns = 100;
inline constexpr double kPassZ = 3.0;

/// Calculus value against the mean of per-run empirical values.
struct Estimate {
  double calculus_value = 0.0;
  double empirical_mean = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  bool pass = false;
  std::size_t samples = 0;  // runs that produced a value
};

struct Verdict {
  Rule rule = Rule::LeadsTo;
  std::string vertex;
  std::size_t runs = 0;
  double horizon = 0.0;
  Estimate primary;
  std::optional<Estimate> consequence;
  bool pass = false;
  std::string rng = kRngName;
  std::uint64_t seed = 0;
};

namespace detail {

inline Estimate summarize(double calculus, const std::vector<std::optional<double>>& values) {
  Estimate e;
  e.calculus_value = calculus;
  std::vector<double> xs;
  for (const auto& v : values)
    if (v) xs.push_back(*v);
  e.samples = xs.size();
  if (xs.empty()) {
    e.empirical_mean = std::numeric_limits<double>::quiet_NaN();
    e.z = std::numeric_limits<double>::infinity();
    return e;
  }
  double sum = 0.0;
  for (const double x : xs) sum += x;
  e.empirical_mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - e.empirical_mean) * (x - e.empirical_mean);
    e.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  const double diff = e.empirical_mean - calculus;
  if (e.std_error > 0.0) {
    e.z = diff / e.std_error;
  } else {
    e.z = std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(calculus))
              ? 0.0
              : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  e.pass = std::abs(e.z) <= kPassZ;
  return e;
}

/// Incoming branches (initiates plus leads-to) of a core vertex.
inline std::size_t branch_count(const RiskModel& m, const std::string& v) {
  std::size_t n = 0;
  for (const auto& r : m.initiates) n += r.target == v;
  for (const auto& r : m.leadsto) n += r.target == v;
  return n;
}

inline const DependsRel* measured_dependency(const RuleInstance& inst) {
  for (const auto& d : inst.model.depends)
    if (d.treats.target == inst.vertex && inst.alternative.count(d.countermeasure) &&
        inst.alternative.count(d.treats.countermeasure))
      return &d;
  return nullptr;
}

inline void check_instance(Rule rule, const RuleInstance& inst) {
  if (inst.model.vertices.size() > kMaxOracleVertices)
    throw OracleError("rule instances are limited to " + std::to_string(kMaxOracleVertices) +
                      " vertices, got " + std::to_string(inst.model.vertices.size()));
  const Vertex* v = inst.model.find_vertex(inst.vertex);
  if (!v || !is_core(v->kind))
    throw OracleError("conclusion vertex " + inst.vertex + " must be a scenario or incident");
  switch (rule) {
    case Rule::LeadsTo:
      if (std::none_of(inst.model.leadsto.begin(), inst.model.leadsto.end(),
                       [&](const LeadsToRel& r) { return r.target == inst.vertex; }))
        throw OracleError("leads_to: no leads-to relation into " + inst.vertex);
      break;
    case Rule::Separate:
    case Rule::Exclusive:
      if (branch_count(inst.model, inst.vertex) < 2)
        throw OracleError(std::string(to_string(rule)) + ": " + inst.vertex +
                          " needs at least two incoming relations");
      if (rule == Rule::Exclusive && v->merge != MergePolicy::Exclusive)
        throw OracleError("exclusive: " + inst.vertex + " is not merged exclusively");
      break;
    case Rule::CmEffect:
      if (std::none_of(inst.model.treats.begin(), inst.model.treats.end(), [&](const TreatsRel& t) {
            return t.target == inst.vertex && inst.alternative.count(t.countermeasure);
          }))
        throw OracleError("cm_effect: no selected countermeasure treats " + inst.vertex);
      break;
    case Rule::CmDependency:
      if (!measured_dependency(inst))
        throw OracleError("cm_dependency: no dependency at " + inst.vertex +
                          " with both countermeasures selected");
      break;
  }
}

}  // namespace detail

/// Horizon that keeps the expected number of events per history near
/// `event_budget`, while expecting at least `min_events` at the measured
/// vertex. Never exceeds `requested`.
inline double adaptive_horizon(const RuleInstance& inst, double requested = kDefaultHorizon,
                               double event_budget = 4000.0, double min_events = 400.0) {
  const auto untreated = propagate(inst.model, {});
  double total = 0.0;
  for (const auto& [id, r] : untreated) total += r.frequency.hi;
  const auto treated = propagate(inst.model, inst.alternative);
  const double at_vertex = treated.at(inst.vertex).frequency.hi;
  double h = total > 0.0 ? event_budget / total : requested;
  if (at_vertex > 0.0) h = std::max(h, min_events / at_vertex);
  return std::min(h, requested);
}

/// Simulates `runs` independent histories and compares the mean empirical
/// value at the conclusion vertex with the calculus. Passes when every
/// compared quantity lies within 3 standard errors.
inline Verdict check_rule(Rule rule, const RuleInstance& inst, std::size_t runs, double horizon,
                          std::uint64_t seed) {
  detail::check_instance(rule, inst);
  if (runs < 2) throw OracleError("check_rule needs at least 2 runs");
  const detail::Simulator sim(inst.model, inst.alternative);
  const VertexResult expected = propagate(inst.model, inst.alternative).at(inst.vertex);

  const DependsRel* dep = rule == Rule::CmDependency ? detail::measured_dependency(inst) : nullptr;
  double primary_calculus = expected.frequency.lo;
  if (dep) {
    const TreatsRel* t = inst.model.find_treats(dep->treats);
    primary_calculus = effective_effect(*t, inst.alternative, inst.model.depends).freq.lo;
  }
  const bool with_consequence = rule == Rule::CmEffect || rule == Rule::CmDependency;

  std::vector<std::optional<double>> primary(runs), consequence(runs);
  detail::parallel_for(runs, [&](std::size_t k) {
    const History h = sim.generate(horizon, sub_seed(seed, k));
    if (dep) {
      const auto cls = *h.class_index(inst.vertex);
      const std::uint64_t c = h.mask_of({dep->countermeasure});
      const std::uint64_t both = h.mask_of({dep->countermeasure, dep->treats.countermeasure});
      std::size_t survive_c = 0, survive_both = 0;
      for (const auto& e : h.events()) {
        if (e.event_class != cls) continue;
        if (!(e.countermeasures & c)) ++survive_c;
        if (!(e.countermeasures & both)) ++survive_both;
      }
      if (survive_c > 0)
        primary[k] = 1.0 - static_cast<double>(survive_both) / static_cast<double>(survive_c);
    } else {
      primary[k] = empirical_frequency(h, inst.vertex, inst.alternative);
    }
    if (with_consequence && empirical_frequency(h, inst.vertex, inst.alternative) > 0.0)
      consequence[k] = empirical_consequence(h, inst.vertex, inst.alternative);
  });

  Verdict v;
  v.rule = rule;
  v.vertex = inst.vertex;
  v.runs = runs;
  v.horizon = horizon;
  v.seed = seed;
  v.primary = detail::summarize(primary_calculus, primary);
  v.pass = v.primary.pass;
  if (with_consequence) {
    v.consequence = detail::summarize(expected.consequence.lo, consequence);
    v.pass = v.pass && v.consequence->pass;
  }
  return v;
}

inline nlohmann::json verdict_json(const Verdict& v) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return nullptr;
  };
  nlohmann::json j = {{"rule", std::string(to_string(v.rule))},
                      {"vertex", v.vertex},
                      {"runs", v.runs},
                      {"horizon", v.horizon},
                      {"calculus_value", num(v.primary.calculus_value)},
                      {"empirical_mean", num(v.primary.empirical_mean)},
                      {"std_error", num(v.primary.std_error)},
                      {"z", num(v.primary.z)},
                      {"pass", v.pass},
                      {"rng", v.rng},
                      {"seed", v.seed}};
  if (v.consequence)
    j["consequence"] = {{"calculus_value", num(v.consequence->calculus_value)},
                        {"empirical_mean", num(v.consequence->empirical_mean)},
                        {"std_error", num(v.consequence->std_error)},
                        {"z", num(v.consequence->z)},
                        {"pass", v.consequence->pass}};
  return j;
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

/// Conclusion vertex used when none is given: the natural target of `rule`
/// in `model`.
inline std::optional<std::string> default_vertex(Rule rule, const RiskModel& model) {
  const RiskModel m = canonicalize(model);
  switch (rule) {
    case Rule::LeadsTo:
      if (!m.leadsto.empty()) return m.leadsto.front().target;
      break;
    case Rule::Separate:
      for (const auto& id : topological_order(m)) {
        const Vertex* v = m.find_vertex(id);
        if (v->merge == MergePolicy::Separate && detail::branch_count(m, id) >= 2) return id;
      }
      break;
    case Rule::Exclusive:
      for (const auto& v : m.vertices)
        if (v.merge == MergePolicy::Exclusive && detail::branch_count(m, v.id) >= 2) return v.id;
      break;
    case Rule::CmEffect:
      if (!m.treats.empty()) return m.treats.front().target;
      break;
    case Rule::CmDependency:
      if (!m.depends.empty()) return m.depends.front().treats.target;
      break;
  }
  return std::nullopt;
}

/// Alternative used when none is given: nothing for the propagation rules,
/// every countermeasure for cm_effect, the first dependency pair for
/// cm_dependency.
inline Alternative default_alternative(Rule rule, const RiskModel& model) {
  const RiskModel m = canonicalize(model);
  if (rule == Rule::CmEffect) {
    const auto ids = m.countermeasure_ids();
    return {ids.begin(), ids.end()};
  }
  if (rule == Rule::CmDependency && !m.depends.empty())
    return {m.depends.front().countermeasure, m.depends.front().treats.countermeasure};
  return {};
}

/// A random small point instance exercising `rule`.
template <class Rng>
RuleInstance random_instance(Rule rule, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto between = [&](double a, double b) { return a + (b - a) * u(rng); };
  auto round3 = [](double x) { return std::round(x * 1000.0) / 1000.0; };
  const Period unit{1.0, TimeUnit::Year};
  RuleInstance inst;
  RiskModel& m = inst.model;
  m.name = std::string(to_string(rule));
  m.base_period = unit;
  auto vertex = [&](const std::string& id, VertexKind kind, std::optional<Interval> cons = {}) {
    m.vertices.push_back({id, kind, "", cons, MergePolicy::Separate});
  };
  auto incident = [&](const std::string& id) {
    vertex(id, VertexKind::UnwantedIncident, Interval::point(round3(between(10.0, 1000.0))));
  };
  auto initiate = [&](const std::string& t, const std::string& v, double rate) {
    m.initiates.push_back({t, v, {Interval::point(round3(rate)), unit}, ""});
  };
  auto leads = [&](const std::string& a, const std::string& b, double r) {
    m.leadsto.push_back({a, b, Interval::point(round3(r)), ""});
  };
  auto cm = [&](const std::string& id) {
    m.countermeasures.push_back({id, "", {round3(between(0.0, 100.0)), unit}});
  };
  auto treats = [&](const std::string& c, const std::string& v, double ef, double ei) {
    m.treats.push_back({c, v, Interval::point(round3(ef)), Interval::point(round3(ei))});
  };

  switch (rule) {
    case Rule::LeadsTo:
      vertex("T", VertexKind::Threat);
      vertex("A", VertexKind::ThreatScenario);
      incident("B");
      initiate("T", "A", between(0.5, 5.0));
      leads("A", "B", between(0.05, 1.5));
      inst.vertex = "B";
      break;
    case Rule::Separate: {
      const bool direct = u(rng) < 0.5;
      vertex("T1", VertexKind::Threat);
      incident("V");
      for (int i = 1; i <= 2; ++i) {
        const std::string a = "A" + std::to_string(i);
        vertex(a, VertexKind::ThreatScenario);
        initiate("T1", a, between(0.5, 4.0));
        leads(a, "V", between(0.1, 1.0));
      }
      if (direct) initiate("T1", "V", between(0.2, 2.0));
      inst.vertex = "V";
      break;
    }
    case Rule::Exclusive: {
      const double rate = between(0.5, 4.0);
      const double r = between(0.1, 1.0);
      vertex("T1", VertexKind::Threat);
      vertex("T2", VertexKind::Threat);
      vertex("A1", VertexKind::ThreatScenario);
      vertex("A2", VertexKind::ThreatScenario);
      incident("V");
      m.vertices.back().merge = MergePolicy::Exclusive;
      initiate("T1", "A1", rate);
      initiate("T2", "A2", rate);
      leads("A1", "V", r);
      leads("A2", "V", r);
      inst.vertex = "V";
      break;
    }
    case Rule::CmEffect: {
      vertex("T", VertexKind::Threat);
      vertex("A", VertexKind::ThreatScenario);
      incident("V");
      initiate("T", "A", between(1.0, 6.0));
      leads("A", "V", between(0.3, 1.0));
      cm("C1");
      treats("C1", "V", between(0.0, 0.95), between(0.0, 0.9));
      inst.alternative.insert("C1");
      if (u(rng) < 0.5) {
        cm("C2");
        treats("C2", u(rng) < 0.5 ? "A" : "V", between(0.0, 0.95), between(0.0, 0.9));
        if (u(rng) < 0.7) inst.alternative.insert("C2");
      }
      inst.vertex = "V";
      break;
    }
    case Rule::CmDependency: {
      vertex("T", VertexKind::Threat);
      incident("V");
      initiate("T", "V", between(2.0, 8.0));
      const double e = round3(between(0.2, 0.9));
      const double d = round3(between(0.05, 0.6));
      const double floor = e * d / (1.0 - e + e * d);
      const double ec = round3(between(std::min(floor + 0.01, 0.99), 0.99));
      cm("CD");  // depender
      cm("CT");  // dependee
      treats("CT", "V", e, between(0.0, 0.8));
      treats("CD", "V", ec, between(0.0, 0.8));
      m.depends.push_back({"CD", {"CT", "V"}, Interval::point(d), Interval::point(round3(between(0.0, 0.5)))});
      inst.alternative = {"CD", "CT"};
      inst.vertex = "V";
      break;
    }
  }
  return inst;
}

}  // namespace riskforge
