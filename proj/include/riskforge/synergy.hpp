#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskforge/analysis.hpp"
#include "riskforge/calculus.hpp"
#include "riskforge/detail/parallel.hpp"
#include "riskforge/model.hpp"

namespace riskforge {

struct CostOptions {
  /// Use upper interval endpoints instead of midpoints.
  bool pessimistic = false;
  std::size_t cap = kDefaultSubsetCap;
};

/// Loss per base period caused by a risk in `state`: consequence x frequency.
inline double risk_cost(const RiskState& state, bool pessimistic = false) {
  if (pessimistic) return state.consequence.hi * state.frequency.hi;
  return state.consequence.mid() * state.frequency.mid();
}

/// A countermeasure set evaluated across every risk of the model.
struct GlobalAlternative {
  Alternative countermeasures;
  std::map<std::string, RiskState> per_risk_states;
  double overall_cost = 0.0;  // per base period
  bool acceptable = true;
};

struct Acceptability {
  std::map<std::string, bool> verdicts;
  std::vector<std::string> warnings;  // risks without any criterion

  bool all() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& kv) { return kv.second; });
  }
};

namespace detail {

inline bool state_acceptable(const RiskModel& m, const RiskState& s, bool pessimistic) {
  const AcceptanceCriterion* c = m.find_criterion(s.risk);
  if (!c) return true;
  if (c->max_frequency) {
    const double freq = pessimistic ? s.frequency.hi : s.frequency.mid();
    if (freq > c->max_frequency->per_period(m.base_period).hi) return false;
  }
  if (c->max_risk_cost && risk_cost(s, pessimistic) > c->max_risk_cost->per_period(m.base_period))
    return false;
  return true;
}

/// Shared machinery for costing countermeasure sets over one model.
class SynergyEvaluator {
 public:
  SynergyEvaluator(const RiskModel& model, CostOptions opts)
      : prop_(model), opts_(opts), risks_(prop_.model().incident_ids()) {
    for (const auto& r : risks_) slots_.push_back(prop_.vertex_index(r));
  }

  const Propagator& propagator() const noexcept { return prop_; }
  const std::vector<std::string>& risks() const noexcept { return risks_; }

  GlobalAlternative evaluate(const Alternative& ca) const {
    const RiskModel& m = prop_.model();
    const auto results = prop_.run_indexed(ca);
    GlobalAlternative g;
    g.countermeasures = ca;
    double risk_total = 0.0;
    for (std::size_t k = 0; k < risks_.size(); ++k) {
      const VertexResult& r = results[slots_[k]];
      RiskState s{risks_[k], ca, r.frequency, r.consequence};
      risk_total += risk_cost(s, opts_.pessimistic);
      g.acceptable = g.acceptable && state_acceptable(m, s, opts_.pessimistic);
      g.per_risk_states.emplace(risks_[k], std::move(s));
    }
    double spend = 0.0;
    for (const auto& id : ca) spend += m.find_countermeasure(id)->expenditure.per_period(m.base_period);
    g.overall_cost = risk_total + spend;
    return g;
  }

  /// Every subset of the model's countermeasures, in binary-counter order.
  std::vector<GlobalAlternative> evaluate_all() const {
    const auto& ids = prop_.countermeasure_ids();
    if (ids.size() > opts_.cap || ids.size() >= 63)
      throw CapacityError("model has " + std::to_string(ids.size()) +
                          " countermeasures, above the cap of " + std::to_string(opts_.cap));
    const std::size_t count = std::size_t{1} << ids.size();
    std::vector<GlobalAlternative> out(count);
    parallel_for(count, [&](std::size_t mask) { out[mask] = evaluate(subset_from_mask(ids, mask)); });
    return out;
  }

 private:
  Propagator prop_;
  CostOptions opts_;
  std::vector<std::string> risks_;
  std::vector<std::size_t> slots_;
};

/// Acceptable first, then overall cost, set size, lexicographic ids.
inline bool ranks_before(const GlobalAlternative& a, const GlobalAlternative& b) {
  if (a.acceptable != b.acceptable) return a.acceptable;
  if (a.overall_cost != b.overall_cost) return a.overall_cost < b.overall_cost;
  if (a.countermeasures.size() != b.countermeasures.size())
    return a.countermeasures.size() < b.countermeasures.size();
  return a.countermeasures < b.countermeasures;
}

}  // namespace detail

/// Residual risk cost over all unwanted incidents plus the expenditure of
/// every countermeasure in `ca`, per base period.
inline double overall_cost(const RiskModel& model, const Alternative& ca, CostOptions opts = {}) {
  return detail::SynergyEvaluator(model, opts).evaluate(ca).overall_cost;
}

/// Per-risk acceptability of `ca`. Risks without a criterion are acceptable
/// and reported in `warnings`.
inline Acceptability acceptable(const RiskModel& model, const Alternative& ca,
                                CostOptions opts = {}) {
  const detail::SynergyEvaluator eval(model, opts);
  const auto g = eval.evaluate(ca);
  Acceptability out;
  for (const auto& [risk, state] : g.per_risk_states) {
    out.verdicts[risk] = detail::state_acceptable(model, state, opts.pessimistic);
    if (!model.find_criterion(risk))
      out.warnings.push_back("no acceptance criterion for " + risk + "; treated as acceptable");
  }
  return out;
}

/// Every global alternative, ranked: acceptable ones first by overall cost,
/// then the unacceptable ones in the same order.
inline std::vector<GlobalAlternative> rank_alternatives(const RiskModel& model,
                                                        CostOptions opts = {}) {
  auto all = detail::SynergyEvaluator(model, opts).evaluate_all();
  std::sort(all.begin(), all.end(), detail::ranks_before);
  return all;
}

/// The acceptable global alternatives, cheapest first.
inline std::vector<GlobalAlternative> find_alternatives(const RiskModel& model,
                                                        CostOptions opts = {}) {
  auto ranked = rank_alternatives(model, opts);
  ranked.erase(std::remove_if(ranked.begin(), ranked.end(),
                              [](const GlobalAlternative& g) { return !g.acceptable; }),
               ranked.end());
  return ranked;
}

// ---------------------------------------------------------------------------
// Recommendation
// ---------------------------------------------------------------------------

/// Best achievable residual of one risk over every countermeasure set.
struct RiskGap {
  std::string risk;
  double best_frequency = 0.0;  // per base period
  double best_risk_cost = 0.0;  // per base period
  std::optional<double> frequency_gap;  // best_frequency - bound, when bounded
  std::optional<double> cost_gap;       // best_risk_cost - bound, when bounded
};

struct Recommended {
  GlobalAlternative best;
};

struct NoFeasible {
  std::vector<RiskGap> gaps;
};

struct OverBudget {
  GlobalAlternative best;
  double budget = 0.0;
};

using Recommendation = std::variant<Recommended, NoFeasible, OverBudget>;

inline Recommendation recommend(const RiskModel& model, std::optional<double> budget = {},
                                CostOptions opts = {}) {
  auto ranked = rank_alternatives(model, opts);
  if (ranked.empty() || !ranked.front().acceptable) {
    NoFeasible report;
    for (const auto& risk : model.incident_ids()) {
      RiskGap gap{risk, std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), {}, {}};
      for (const auto& g : ranked) {
        const RiskState& s = g.per_risk_states.at(risk);
        gap.best_frequency = std::min(gap.best_frequency,
                                      opts.pessimistic ? s.frequency.hi : s.frequency.mid());
        gap.best_risk_cost = std::min(gap.best_risk_cost, risk_cost(s, opts.pessimistic));
      }
      if (const auto* c = model.find_criterion(risk)) {
        if (c->max_frequency)
          gap.frequency_gap =
              gap.best_frequency - c->max_frequency->per_period(model.base_period).hi;
        if (c->max_risk_cost)
          gap.cost_gap = gap.best_risk_cost - c->max_risk_cost->per_period(model.base_period);
      }
      report.gaps.push_back(std::move(gap));
    }
    return report;
  }
  if (budget && ranked.front().overall_cost > *budget)
    return OverBudget{std::move(ranked.front()), *budget};
  return Recommended{std::move(ranked.front())};
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

/// `rank,alternative,overall_cost,acceptable`.
inline std::string export_ranking_csv(const std::vector<GlobalAlternative>& ranked) {
  std::string out = "rank,alternative,overall_cost,acceptable\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& g = ranked[i];
    out += std::to_string(i + 1) + "," + detail::csv_field(alternative_text(g.countermeasures)) +
           "," + detail::display(g.overall_cost) + "," + (g.acceptable ? "true" : "false") + "\n";
  }
  return out;
}

inline nlohmann::json global_alternative_json(const GlobalAlternative& g) {
  nlohmann::json states = nlohmann::json::object();
  for (const auto& [risk, s] : g.per_risk_states)
    states[risk] = {{"frequency", interval_json(s.frequency)},
                    {"consequence", interval_json(s.consequence)}};
  return {{"alternative",
           std::vector<std::string>(g.countermeasures.begin(), g.countermeasures.end())},
          {"overall_cost", g.overall_cost},
          {"acceptable", g.acceptable},
          {"risks", states}};
}

inline nlohmann::json recommendation_json(const Recommendation& rec) {
  return std::visit(
      [](const auto& r) -> nlohmann::json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Recommended>) {
          return {{"outcome", "recommended"}, {"best", global_alternative_json(r.best)}};
        } else if constexpr (std::is_same_v<T, OverBudget>) {
          return {{"outcome", "over_budget"},
                  {"best", global_alternative_json(r.best)},
                  {"budget", r.budget}};
        } else {
          nlohmann::json gaps = nlohmann::json::array();
          for (const auto& g : r.gaps) {
            nlohmann::json j = {{"risk", g.risk},
                                {"best_frequency", g.best_frequency},
                                {"best_risk_cost", g.best_risk_cost}};
            if (g.frequency_gap) j["frequency_gap"] = *g.frequency_gap;
            if (g.cost_gap) j["cost_gap"] = *g.cost_gap;
            gaps.push_back(std::move(j));
          }
          return {{"outcome", "no_feasible"}, {"gaps", gaps}};
        }
      },
      rec);
}

}  // namespace riskforge
