#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "riskforge/detail/format.hpp"
#include "riskforge/interval.hpp"

namespace riskforge {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Time
// ---------------------------------------------------------------------------

enum class TimeUnit { Day, Month, Year };

inline char unit_suffix(TimeUnit u) {
  switch (u) {
    case TimeUnit::Day: return 'd';
    case TimeUnit::Month: return 'm';
    case TimeUnit::Year: return 'y';
  }
  return '?';
}

inline std::optional<TimeUnit> unit_from_suffix(char c) {
  switch (c) {
    case 'd': return TimeUnit::Day;
    case 'm': return TimeUnit::Month;
    case 'y': return TimeUnit::Year;
    default: return std::nullopt;
  }
}

/// A span of calendar time such as `10y`. A year is 365.25 days and a month
/// is a twelfth of a year.
struct Period {
  double magnitude = 1.0;
  TimeUnit unit = TimeUnit::Year;

  double days() const noexcept {
    switch (unit) {
      case TimeUnit::Day: return magnitude;
      case TimeUnit::Month: return magnitude * (365.25 / 12.0);
      case TimeUnit::Year: return magnitude * 365.25;
    }
    return magnitude;
  }

  std::string str() const { return detail::shortest(magnitude) + unit_suffix(unit); }

  friend bool operator==(const Period&, const Period&) = default;
  friend auto operator<=>(const Period&, const Period&) = default;
};

/// Rescales an amount expressed per `from` to the same rate per `to`.
inline double rescale(double amount, const Period& from, const Period& to) {
  if (from == to) return amount;
  if (from.unit == to.unit) return amount * to.magnitude / from.magnitude;
  return amount * to.days() / from.days();
}

inline Interval rescale(const Interval& amount, const Period& from, const Period& to) {
  return {rescale(amount.lo, from, to), rescale(amount.hi, from, to)};
}

/// Occurrences per period, e.g. 30:10y.
struct Frequency {
  Interval occurrences;
  Period per;

  Interval per_period(const Period& target) const { return rescale(occurrences, per, target); }

  friend bool operator==(const Frequency&, const Frequency&) = default;
};

/// Monetary amount per period, e.g. 5000:10y.
struct Cost {
  double amount = 0.0;
  Period per;

  double per_period(const Period& target) const { return rescale(amount, per, target); }

  friend bool operator==(const Cost&, const Cost&) = default;
};

// ---------------------------------------------------------------------------
// Graph elements
// ---------------------------------------------------------------------------

enum class VertexKind { Threat, ThreatScenario, UnwantedIncident, Asset };

/// How a vertex combines several incoming contributions.
enum class MergePolicy { Separate, Exclusive, Overlapping };

inline std::string_view to_string(VertexKind k) {
  switch (k) {
    case VertexKind::Threat: return "threat";
    case VertexKind::ThreatScenario: return "scenario";
    case VertexKind::UnwantedIncident: return "incident";
    case VertexKind::Asset: return "asset";
  }
  return "?";
}

inline std::string_view to_string(MergePolicy p) {
  switch (p) {
    case MergePolicy::Separate: return "separate";
    case MergePolicy::Exclusive: return "exclusive";
    case MergePolicy::Overlapping: return "overlapping";
  }
  return "?";
}

inline std::optional<VertexKind> vertex_kind_from(std::string_view s) {
  if (s == "threat") return VertexKind::Threat;
  if (s == "scenario") return VertexKind::ThreatScenario;
  if (s == "incident") return VertexKind::UnwantedIncident;
  if (s == "asset") return VertexKind::Asset;
  return std::nullopt;
}

inline std::optional<MergePolicy> merge_policy_from(std::string_view s) {
  if (s == "separate") return MergePolicy::Separate;
  if (s == "exclusive") return MergePolicy::Exclusive;
  if (s == "overlapping") return MergePolicy::Overlapping;
  return std::nullopt;
}

/// Scenarios and incidents; the only vertices that carry frequencies.
inline bool is_core(VertexKind k) {
  return k == VertexKind::ThreatScenario || k == VertexKind::UnwantedIncident;
}

struct Vertex {
  std::string id;
  VertexKind kind = VertexKind::ThreatScenario;
  std::string label;
  std::optional<Interval> consequence;  // unwanted incidents only
  MergePolicy merge = MergePolicy::Separate;

  friend bool operator==(const Vertex&, const Vertex&) = default;
};

struct InitiateRel {
  std::string source;  // threat
  std::string target;  // scenario or incident
  Frequency frequency;
  std::string via;     // vulnerability annotation, informational

  friend bool operator==(const InitiateRel&, const InitiateRel&) = default;
};

struct LeadsToRel {
  std::string source;
  std::string target;
  Interval likelihood;
  std::string via;

  friend bool operator==(const LeadsToRel&, const LeadsToRel&) = default;
};

/// Unwanted incident harming an asset.
struct ImpactRel {
  std::string incident;
  std::string asset;

  friend bool operator==(const ImpactRel&, const ImpactRel&) = default;
};

struct Countermeasure {
  std::string id;
  std::string label;
  Cost expenditure;

  friend bool operator==(const Countermeasure&, const Countermeasure&) = default;
};

struct TreatsRel {
  std::string countermeasure;
  std::string target;
  Interval freq_effect;
  Interval cons_effect;

  friend bool operator==(const TreatsRel&, const TreatsRel&) = default;
};

/// Identifies a treats relation by its (countermeasure, target) pair.
struct TreatsRef {
  std::string countermeasure;
  std::string target;

  bool refers_to(const TreatsRel& t) const {
    return t.countermeasure == countermeasure && t.target == target;
  }

  friend bool operator==(const TreatsRef&, const TreatsRef&) = default;
  friend auto operator<=>(const TreatsRef&, const TreatsRef&) = default;
};

/// `countermeasure` weakens the reduction effect of `treats`.
struct DependsRel {
  std::string countermeasure;
  TreatsRef treats;
  Interval freq_dep;
  Interval cons_dep;

  friend bool operator==(const DependsRel&, const DependsRel&) = default;
};

/// Upper bounds a risk must respect to be acceptable.
struct AcceptanceCriterion {
  std::string risk;
  std::optional<Frequency> max_frequency;
  std::optional<Cost> max_risk_cost;

  friend bool operator==(const AcceptanceCriterion&, const AcceptanceCriterion&) = default;
};

struct RiskModel {
  std::string name;
  Period base_period;
  std::vector<Vertex> vertices;
  std::vector<InitiateRel> initiates;
  std::vector<LeadsToRel> leadsto;
  std::vector<ImpactRel> impacts;
  std::vector<Countermeasure> countermeasures;
  std::vector<TreatsRel> treats;
  std::vector<DependsRel> depends;
  std::vector<AcceptanceCriterion> criteria;

  const Vertex* find_vertex(std::string_view id) const {
    auto it = std::find_if(vertices.begin(), vertices.end(),
                           [&](const Vertex& v) { return v.id == id; });
    return it == vertices.end() ? nullptr : &*it;
  }

  const Countermeasure* find_countermeasure(std::string_view id) const {
    auto it = std::find_if(countermeasures.begin(), countermeasures.end(),
                           [&](const Countermeasure& c) { return c.id == id; });
    return it == countermeasures.end() ? nullptr : &*it;
  }

  const TreatsRel* find_treats(const TreatsRef& ref) const {
    auto it = std::find_if(treats.begin(), treats.end(),
                           [&](const TreatsRel& t) { return ref.refers_to(t); });
    return it == treats.end() ? nullptr : &*it;
  }

  const AcceptanceCriterion* find_criterion(std::string_view risk) const {
    auto it = std::find_if(criteria.begin(), criteria.end(),
                           [&](const AcceptanceCriterion& c) { return c.risk == risk; });
    return it == criteria.end() ? nullptr : &*it;
  }

  std::vector<std::string> incident_ids() const {
    std::vector<std::string> out;
    for (const auto& v : vertices)
      if (v.kind == VertexKind::UnwantedIncident) out.push_back(v.id);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<std::string> countermeasure_ids() const {
    std::vector<std::string> out;
    for (const auto& c : countermeasures) out.push_back(c.id);
    std::sort(out.begin(), out.end());
    return out;
  }

  friend bool operator==(const RiskModel&, const RiskModel&) = default;
};

// ---------------------------------------------------------------------------
// Structural comparison
// ---------------------------------------------------------------------------

namespace detail {

inline auto interval_key(const Interval& x) { return std::make_tuple(x.lo, x.hi); }

}  // namespace detail

/// Copy of `m` with every collection in canonical (sorted) order.
inline RiskModel canonicalize(RiskModel m) {
  using detail::interval_key;
  auto kind_rank = [](VertexKind k) { return static_cast<int>(k); };
  std::sort(m.vertices.begin(), m.vertices.end(), [&](const Vertex& a, const Vertex& b) {
    return std::make_tuple(kind_rank(a.kind), a.id) < std::make_tuple(kind_rank(b.kind), b.id);
  });
  std::sort(m.initiates.begin(), m.initiates.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(a.source, a.target, a.frequency.per,
                           interval_key(a.frequency.occurrences), a.via) <
           std::make_tuple(b.source, b.target, b.frequency.per,
                           interval_key(b.frequency.occurrences), b.via);
  });
  std::sort(m.leadsto.begin(), m.leadsto.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(a.source, a.target, interval_key(a.likelihood), a.via) <
           std::make_tuple(b.source, b.target, interval_key(b.likelihood), b.via);
  });
  std::sort(m.impacts.begin(), m.impacts.end(), [](const auto& a, const auto& b) {
    return std::tie(a.incident, a.asset) < std::tie(b.incident, b.asset);
  });
  std::sort(m.countermeasures.begin(), m.countermeasures.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(m.treats.begin(), m.treats.end(), [](const auto& a, const auto& b) {
    return std::tie(a.countermeasure, a.target) < std::tie(b.countermeasure, b.target);
  });
  std::sort(m.depends.begin(), m.depends.end(), [](const auto& a, const auto& b) {
    return std::tie(a.countermeasure, a.treats) < std::tie(b.countermeasure, b.treats);
  });
  std::sort(m.criteria.begin(), m.criteria.end(),
            [](const auto& a, const auto& b) { return a.risk < b.risk; });
  return m;
}

/// Equality up to declaration order.
inline bool structurally_equal(const RiskModel& a, const RiskModel& b) {
  return canonicalize(a) == canonicalize(b);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class Severity { Warning, Error };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string message;
  std::string subject;  // offending identifier, empty when not applicable

  bool is_error() const { return severity == Severity::Error; }
  std::string str() const {
    return std::string(severity == Severity::Error ? "error: " : "warning: ") + message;
  }

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.is_error(); });
}

/// Thrown when an operation requires a valid model and got an invalid one.
class ModelError : public Error {
 public:
  explicit ModelError(std::vector<Diagnostic> diags)
      : Error(summarize(diags)), diagnostics_(std::move(diags)) {}

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static std::string summarize(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
      if (d.is_error()) return "invalid risk model: " + d.message;
    return "invalid risk model";
  }

  std::vector<Diagnostic> diagnostics_;
};

struct ValidateOptions {
  /// CORAS strictness: warn on leads-to likelihoods above 1.
  bool coras = false;
};

namespace detail {

/// Adjacency over initiate and leads-to relations, keyed by vertex id.
inline std::map<std::string, std::vector<std::string>> successor_map(const RiskModel& m) {
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& v : m.vertices) succ[v.id];
  for (const auto& r : m.initiates) succ[r.source].push_back(r.target);
  for (const auto& r : m.leadsto) succ[r.source].push_back(r.target);
  for (auto& [id, out] : succ) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return succ;
}

/// Returns one cycle (rotated to start at its smallest id), or empty.
inline std::vector<std::string> find_cycle(
    const std::map<std::string, std::vector<std::string>>& succ) {
  enum class Mark { White, Grey, Black };
  std::map<std::string, Mark> mark;
  for (const auto& [id, _] : succ) mark[id] = Mark::White;
  std::vector<std::string> stack;
  std::vector<std::string> cycle;

  auto dfs = [&](auto&& self, const std::string& v) -> bool {
    mark[v] = Mark::Grey;
    stack.push_back(v);
    auto it = succ.find(v);
    if (it != succ.end()) {
      for (const auto& w : it->second) {
        auto mw = mark.find(w);
        if (mw == mark.end()) continue;
        if (mw->second == Mark::Grey) {
          auto start = std::find(stack.begin(), stack.end(), w);
          cycle.assign(start, stack.end());
          return true;
        }
        if (mw->second == Mark::White && self(self, w)) return true;
      }
    }
    stack.pop_back();
    mark[v] = Mark::Black;
    return false;
  };

  for (const auto& [id, _] : succ) {
    if (mark[id] == Mark::White && dfs(dfs, id)) break;
  }
  if (!cycle.empty()) {
    auto smallest = std::min_element(cycle.begin(), cycle.end());
    std::rotate(cycle.begin(), smallest, cycle.end());
  }
  return cycle;
}

}  // namespace detail

/// Checks every structural and numeric constraint of `m`. Never throws.
inline std::vector<Diagnostic> validate(const RiskModel& m, const ValidateOptions& opts = {}) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string msg, std::string subject = {}) {
    out.push_back({Severity::Error, std::move(msg), std::move(subject)});
  };
  auto warning = [&](std::string msg, std::string subject = {}) {
    out.push_back({Severity::Warning, std::move(msg), std::move(subject)});
  };
  auto check_interval = [&](const Interval& x, const std::string& what, const std::string& subj) {
    if (!x.finite()) {
      error(what + ": value is not finite", subj);
      return false;
    }
    if (!x.well_formed()) {
      error(what + ": interval lower bound exceeds upper bound", subj);
      return false;
    }
    return true;
  };
  auto check_period = [&](const Period& p, const std::string& what, const std::string& subj) {
    if (!(p.magnitude > 0.0) || !std::isfinite(p.magnitude))
      error(what + ": period magnitude must be > 0", subj);
  };

  check_period(m.base_period, "timeunit", "");

  std::map<std::string, const Vertex*> vertex_by_id;
  std::set<std::string> all_ids;
  for (const auto& v : m.vertices) {
    if (!all_ids.insert(v.id).second) error("duplicate id " + v.id, v.id);
    vertex_by_id.emplace(v.id, &v);
    const bool incident = v.kind == VertexKind::UnwantedIncident;
    if (incident && !v.consequence) error("incident " + v.id + " has no consequence", v.id);
    if (!incident && v.consequence)
      error(std::string(to_string(v.kind)) + " " + v.id + " cannot carry a consequence", v.id);
    if (v.consequence && check_interval(*v.consequence, "consequence of " + v.id, v.id) &&
        v.consequence->lo < 0.0)
      error("consequence of " + v.id + " must be ≥ 0", v.id);
    if (v.merge != MergePolicy::Separate && !is_core(v.kind))
      error("merge policy applies only to scenarios and incidents: " + v.id, v.id);
  }
  std::map<std::string, const Countermeasure*> cm_by_id;
  for (const auto& c : m.countermeasures) {
    if (!all_ids.insert(c.id).second) error("duplicate id " + c.id, c.id);
    cm_by_id.emplace(c.id, &c);
    check_period(c.expenditure.per, "cost of " + c.id, c.id);
    if (!std::isfinite(c.expenditure.amount) || c.expenditure.amount < 0.0)
      error("cost of " + c.id + " must be ≥ 0", c.id);
  }

  auto vertex_of = [&](const std::string& id) -> const Vertex* {
    auto it = vertex_by_id.find(id);
    if (it == vertex_by_id.end()) {
      error("unknown vertex " + id, id);
      return nullptr;
    }
    return it->second;
  };

  for (const auto& r : m.initiates) {
    const std::string what = "initiate " + r.source + " -> " + r.target;
    const Vertex* s = vertex_of(r.source);
    const Vertex* t = vertex_of(r.target);
    if (s && s->kind != VertexKind::Threat) error(what + ": source must be a threat", r.source);
    if (t && !is_core(t->kind))
      error(what + ": target must be a scenario or incident", r.target);
    check_period(r.frequency.per, what, r.source);
    if (check_interval(r.frequency.occurrences, what, r.source) &&
        r.frequency.occurrences.lo < 0.0)
      error(what + ": frequency must be ≥ 0", r.source);
  }
  for (const auto& r : m.leadsto) {
    const std::string what = "leadsto " + r.source + " -> " + r.target;
    const Vertex* s = vertex_of(r.source);
    const Vertex* t = vertex_of(r.target);
    if (s && !is_core(s->kind)) error(what + ": source must be a scenario or incident", r.source);
    if (t && !is_core(t->kind)) error(what + ": target must be a scenario or incident", r.target);
    if (check_interval(r.likelihood, what, r.source)) {
      if (r.likelihood.lo < 0.0) error(what + ": likelihood must be ≥ 0", r.source);
      else if (opts.coras && r.likelihood.hi > 1.0)
        warning(what + ": likelihood above 1 is outside the CORAS range [0,1]", r.source);
    }
  }
  for (const auto& r : m.impacts) {
    const Vertex* s = vertex_of(r.incident);
    const Vertex* t = vertex_of(r.asset);
    if (s && s->kind != VertexKind::UnwantedIncident)
      error("impact source must be an incident: " + r.incident, r.incident);
    if (t && t->kind != VertexKind::Asset)
      error("impact target must be an asset: " + r.asset, r.asset);
  }

  std::set<TreatsRef> treats_seen;
  for (const auto& r : m.treats) {
    const std::string what = "treats " + r.countermeasure + " -> " + r.target;
    if (!cm_by_id.count(r.countermeasure))
      error("unknown countermeasure " + r.countermeasure, r.countermeasure);
    const Vertex* t = vertex_of(r.target);
    if (t && !is_core(t->kind))
      error(what + ": only scenarios and incidents can be treated", r.target);
    if (!treats_seen.insert({r.countermeasure, r.target}).second)
      error("duplicate " + what, r.countermeasure);
    if (check_interval(r.freq_effect, what, r.countermeasure) && !r.freq_effect.within_unit())
      error(what + ": effect outside [0,1]", r.countermeasure);
    if (check_interval(r.cons_effect, what, r.countermeasure) && !r.cons_effect.within_unit())
      error(what + ": effect outside [0,1]", r.countermeasure);
  }
  std::set<std::pair<std::string, TreatsRef>> depends_seen;
  for (const auto& r : m.depends) {
    const std::string what = "depends " + r.countermeasure + " -> (" + r.treats.countermeasure +
                             " -> " + r.treats.target + ")";
    if (!cm_by_id.count(r.countermeasure))
      error("unknown countermeasure " + r.countermeasure, r.countermeasure);
    if (!treats_seen.count(r.treats))
      error(what + ": no such treats relation", r.treats.countermeasure);
    if (r.countermeasure == r.treats.countermeasure)
      error(what + ": a countermeasure cannot depend on itself", r.countermeasure);
    if (!depends_seen.insert({r.countermeasure, r.treats}).second)
      error("duplicate " + what, r.countermeasure);
    if (check_interval(r.freq_dep, what, r.countermeasure) && !r.freq_dep.within_unit())
      error(what + ": dependency outside [0,1]", r.countermeasure);
    if (check_interval(r.cons_dep, what, r.countermeasure) && !r.cons_dep.within_unit())
      error(what + ": dependency outside [0,1]", r.countermeasure);
  }

  std::set<std::string> criteria_seen;
  for (const auto& c : m.criteria) {
    const Vertex* v = vertex_of(c.risk);
    if (v && v->kind != VertexKind::UnwantedIncident)
      error("acceptance criterion on non-incident " + c.risk, c.risk);
    if (!criteria_seen.insert(c.risk).second)
      error("duplicate acceptance criterion for " + c.risk, c.risk);
    if (!c.max_frequency && !c.max_risk_cost)
      error("acceptance criterion for " + c.risk + " has no bound", c.risk);
    if (c.max_frequency) {
      check_period(c.max_frequency->per, "criterion " + c.risk, c.risk);
      if (check_interval(c.max_frequency->occurrences, "criterion " + c.risk, c.risk) &&
          c.max_frequency->occurrences.lo < 0.0)
        error("criterion " + c.risk + ": frequency bound must be ≥ 0", c.risk);
    }
    if (c.max_risk_cost) {
      check_period(c.max_risk_cost->per, "criterion " + c.risk, c.risk);
      if (!std::isfinite(c.max_risk_cost->amount) || c.max_risk_cost->amount < 0.0)
        error("criterion " + c.risk + ": cost bound must be ≥ 0", c.risk);
    }
  }

  const auto succ = detail::successor_map(m);
  const auto cycle = detail::find_cycle(succ);
  if (!cycle.empty()) {
    error("cycle: " + detail::join(cycle, ","), cycle.front());
  } else {
    // Every incident must be reachable from some threat.
    std::set<std::string> reached;
    std::vector<std::string> work;
    for (const auto& v : m.vertices)
      if (v.kind == VertexKind::Threat) work.push_back(v.id);
    while (!work.empty()) {
      auto v = work.back();
      work.pop_back();
      if (!reached.insert(v).second) continue;
      if (auto it = succ.find(v); it != succ.end())
        for (const auto& w : it->second) work.push_back(w);
    }
    for (const auto& v : m.vertices)
      if (v.kind == VertexKind::UnwantedIncident && !reached.count(v.id))
        error("incident " + v.id + " is not reachable from any threat", v.id);
  }

  // Overlapping merge on point inputs still widens the result to an interval.
  for (const auto& v : m.vertices) {
    if (v.merge != MergePolicy::Overlapping) continue;
    bool all_points = true;
    for (const auto& r : m.initiates)
      if (r.target == v.id && !r.frequency.occurrences.is_point()) all_points = false;
    for (const auto& r : m.leadsto)
      if (r.target == v.id && !r.likelihood.is_point()) all_points = false;
    if (all_points)
      warning("overlapping merge at " + v.id + " turns point inputs into an interval", v.id);
  }
  return out;
}

/// Throws ModelError when `validate` reports an error.
inline void require_valid(const RiskModel& m, const ValidateOptions& opts = {}) {
  auto diags = validate(m, opts);
  if (has_errors(diags)) throw ModelError(std::move(diags));
}

/// Core vertices in a deterministic topological order (ties by id).
/// Requires an acyclic model.
inline std::vector<std::string> topological_order(const RiskModel& m) {
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& v : m.vertices)
    if (is_core(v.kind)) indegree[v.id] = 0;
  for (const auto& r : m.leadsto) {
    succ[r.source].push_back(r.target);
    ++indegree[r.target];
  }
  std::set<std::string> ready;
  for (const auto& [id, d] : indegree)
    if (d == 0) ready.insert(id);
  std::vector<std::string> order;
  while (!ready.empty()) {
    auto v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (const auto& w : succ[v])
      if (--indegree[w] == 0) ready.insert(w);
  }
  if (order.size() != indegree.size()) throw Error("risk graph contains a cycle");
  return order;
}

/// Strict ancestors of `id` along leads-to relations.
inline std::set<std::string> ancestors(const RiskModel& m, const std::string& id) {
  std::map<std::string, std::vector<std::string>> pred;
  for (const auto& r : m.leadsto) pred[r.target].push_back(r.source);
  std::set<std::string> seen;
  std::vector<std::string> work = pred[id];
  while (!work.empty()) {
    auto v = work.back();
    work.pop_back();
    if (!seen.insert(v).second) continue;
    for (const auto& p : pred[v]) work.push_back(p);
  }
  return seen;
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Rescales every rate and expenditure to `target`; relative quantities are
/// untouched.
inline RiskModel normalize(RiskModel m, const Period& target) {
  for (auto& r : m.initiates) {
    r.frequency.occurrences = r.frequency.per_period(target);
    r.frequency.per = target;
  }
  for (auto& c : m.countermeasures) {
    c.expenditure.amount = c.expenditure.per_period(target);
    c.expenditure.per = target;
  }
  for (auto& c : m.criteria) {
    if (c.max_frequency) {
      c.max_frequency->occurrences = c.max_frequency->per_period(target);
      c.max_frequency->per = target;
    }
    if (c.max_risk_cost) {
      c.max_risk_cost->amount = c.max_risk_cost->per_period(target);
      c.max_risk_cost->per = target;
    }
  }
  m.base_period = target;
  return m;
}

}  // namespace riskforge
