#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riskforge/interval.hpp"
#include "riskforge/model.hpp"

namespace riskforge {

/// A set of countermeasure ids considered for joint implementation.
using Alternative = std::set<std::string>;

/// Reduction effect of one treats relation (frequency part, consequence part).
struct Effect {
  Interval freq;
  Interval cons;

  friend bool operator==(const Effect&, const Effect&) = default;
};

/// Residual frequency (per base period) and consequence of one vertex.
struct VertexResult {
  Interval frequency;
  Interval consequence;

  friend bool operator==(const VertexResult&, const VertexResult&) = default;
};

/// Keyed by scenario/incident id. Threats and assets carry no frequency.
using PropagationResult = std::map<std::string, VertexResult>;

class CalculusError : public Error {
 public:
  using Error::Error;
};

/// Tolerance for the equal-contribution premise of exclusive merging.
inline constexpr double kExclusiveRelTol = 1e-9;

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

/// Effect of `treats` once weakened by every dependency whose depending
/// countermeasure is selected: E_F * prod(1 - D_F), E_I * prod(1 - D_I).
inline Effect effective_effect(const TreatsRel& treats, const Alternative& selected,
                               std::span<const DependsRel> deps) {
  if (!selected.count(treats.countermeasure))
    throw CalculusError("effective_effect: " + treats.countermeasure + " is not selected");
  std::vector<Interval> freq_factors, cons_factors;
  const TreatsRef self{treats.countermeasure, treats.target};
  for (const auto& d : deps) {
    if (d.treats != self || !selected.count(d.countermeasure)) continue;
    freq_factors.push_back(d.freq_dep.complement());
    cons_factors.push_back(d.cons_dep.complement());
  }
  return {treats.freq_effect * product_nonneg(freq_factors),
          treats.cons_effect * product_nonneg(cons_factors)};
}

/// freq * prod(1 - e_f), cons * prod(1 - e_i). The order of `effects` does
/// not affect the result.
inline VertexResult apply_countermeasures(const Interval& freq, const Interval& cons,
                                          std::span<const Effect> effects) {
  std::vector<Interval> freq_factors, cons_factors;
  freq_factors.reserve(effects.size());
  cons_factors.reserve(effects.size());
  for (const auto& e : effects) {
    freq_factors.push_back(e.freq.complement());
    cons_factors.push_back(e.cons.complement());
  }
  return {freq * product_nonneg(freq_factors), cons * product_nonneg(cons_factors)};
}

/// Frequency carried along a leads-to relation.
inline Interval propagate_leadsto(const Interval& freq_source, const Interval& likelihood) {
  return freq_source * likelihood;
}

/// Merges the contributions arriving at one vertex:
///   Separate    - disjoint event classes, endpoint-wise sum;
///   Exclusive   - contributions never co-occur; all must be equal;
///   Overlapping - unknown overlap, [max of lower ends, sum of upper ends].
inline Interval combine_incoming(std::span<const Interval> contributions, MergePolicy policy,
                                 std::string_view vertex = {}) {
  if (contributions.empty()) throw CalculusError("combine_incoming: no contributions");
  if (contributions.size() == 1) return contributions.front();
  switch (policy) {
    case MergePolicy::Separate:
      return sum_nonneg(contributions);
    case MergePolicy::Exclusive: {
      Interval out = contributions.front();
      for (const auto& c : contributions) {
        if (!nearly_equal(c.lo, out.lo, kExclusiveRelTol) ||
            !nearly_equal(c.hi, out.hi, kExclusiveRelTol)) {
          throw CalculusError("exclusive merge at " +
                              std::string(vertex.empty() ? "<vertex>" : vertex) +
                              " requires equal contributions, got " + detail::display(out) +
                              " and " + detail::display(c));
        }
        out.lo = std::max(out.lo, c.lo);
        out.hi = std::max(out.hi, c.hi);
      }
      return out;
    }
    case MergePolicy::Overlapping: {
      double lo = 0.0;
      for (const auto& c : contributions) lo = std::max(lo, c.lo);
      return {lo, sum_nonneg(contributions).hi};
    }
  }
  return Interval::zero();
}

// ---------------------------------------------------------------------------
// Whole-graph propagation
// ---------------------------------------------------------------------------

/// A validated model compiled for repeated propagation under many
/// alternatives. Immutable after construction and safe to share.
class Propagator {
 public:
  explicit Propagator(const RiskModel& model) : model_(model) {
    require_valid(model_);
    cm_ids_ = model_.countermeasure_ids();
    for (std::size_t i = 0; i < cm_ids_.size(); ++i) cm_index_[cm_ids_[i]] = i;

    order_ = topological_order(model_);
    for (std::size_t i = 0; i < order_.size(); ++i) vertex_index_[order_[i]] = i;
    nodes_.resize(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) {
      const Vertex& v = *model_.find_vertex(order_[i]);
      nodes_[i].merge = v.merge;
      nodes_[i].consequence = v.consequence.value_or(Interval::zero());
    }
    for (const auto& r : model_.initiates)
      nodes_[vertex_index_.at(r.target)].initiated.push_back(
          r.frequency.per_period(model_.base_period));
    for (const auto& r : model_.leadsto)
      nodes_[vertex_index_.at(r.target)].incoming.push_back(
          {vertex_index_.at(r.source), r.likelihood});
    for (const auto& t : model_.treats) {
      CompiledTreats ct{cm_index_.at(t.countermeasure), t, {}};
      for (const auto& d : model_.depends)
        if (d.treats.refers_to(t)) ct.deps.push_back(d);
      nodes_[vertex_index_.at(t.target)].treats.push_back(std::move(ct));
    }
  }

  const RiskModel& model() const noexcept { return model_; }
  const std::vector<std::string>& countermeasure_ids() const noexcept { return cm_ids_; }
  const std::vector<std::string>& vertex_order() const noexcept { return order_; }

  std::size_t vertex_index(const std::string& id) const {
    auto it = vertex_index_.find(id);
    if (it == vertex_index_.end()) throw Error("unknown vertex " + id);
    return it->second;
  }

  /// Results indexed like `vertex_order()`.
  std::vector<VertexResult> run_indexed(const Alternative& alt) const {
    for (const auto& id : alt)
      if (!cm_index_.count(id)) throw Error("unknown countermeasure " + id + " in alternative");
    std::vector<VertexResult> out(nodes_.size());
    std::vector<Interval> contributions;
    std::vector<Effect> effects;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      contributions.assign(n.initiated.begin(), n.initiated.end());
      for (const auto& [src, likelihood] : n.incoming)
        contributions.push_back(propagate_leadsto(out[src].frequency, likelihood));
      const Interval combined = contributions.empty()
                                    ? Interval::zero()
                                    : combine_incoming(contributions, n.merge, order_[i]);
      effects.clear();
      for (const auto& t : n.treats)
        if (alt.count(cm_ids_[t.cm])) effects.push_back(effective_effect(t.rel, alt, t.deps));
      out[i] = apply_countermeasures(combined, n.consequence, effects);
    }
    return out;
  }

  PropagationResult run(const Alternative& alt) const {
    auto indexed = run_indexed(alt);
    PropagationResult out;
    for (std::size_t i = 0; i < order_.size(); ++i) out.emplace(order_[i], indexed[i]);
    return out;
  }

 private:
  struct CompiledTreats {
    std::size_t cm;
    TreatsRel rel;
    std::vector<DependsRel> deps;
  };
  struct Node {
    MergePolicy merge = MergePolicy::Separate;
    Interval consequence;
    std::vector<Interval> initiated;
    std::vector<std::pair<std::size_t, Interval>> incoming;
    std::vector<CompiledTreats> treats;
  };

  RiskModel model_;
  std::vector<std::string> cm_ids_;
  std::map<std::string, std::size_t> cm_index_;
  std::vector<std::string> order_;
  std::map<std::string, std::size_t> vertex_index_;
  std::vector<Node> nodes_;
};

/// Residual frequency and consequence of every scenario and incident under
/// `alternative`. Rejects invalid models with ModelError.
inline PropagationResult propagate(const RiskModel& model, const Alternative& alternative) {
  return Propagator(model).run(alternative);
}

}  // namespace riskforge
