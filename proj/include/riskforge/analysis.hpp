#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskforge/calculus.hpp"
#include "riskforge/detail/format.hpp"
#include "riskforge/detail/parallel.hpp"
#include "riskforge/model.hpp"

namespace riskforge {

/// A risk under one countermeasure alternative.
struct RiskState {
  std::string risk;
  Alternative alternative;
  Interval frequency;    // per base period
  Interval consequence;

  friend bool operator==(const RiskState&, const RiskState&) = default;
};

/// Default bound on the number of countermeasures enumerated exhaustively.
inline constexpr std::size_t kDefaultSubsetCap = 20;

class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Text form of an alternative: sorted ids joined by '+', empty for none.
inline std::string alternative_text(const Alternative& alt) { return detail::join(alt, "+"); }

/// The subset of `ids` selected by the bits of `mask` (bit j <-> ids[j]).
inline Alternative subset_from_mask(const std::vector<std::string>& ids, std::uint64_t mask) {
  Alternative alt;
  for (std::size_t j = 0; j < ids.size(); ++j)
    if (mask & (std::uint64_t{1} << j)) alt.insert(ids[j]);
  return alt;
}

/// Countermeasures treating `risk` or any of its ancestors.
inline std::set<std::string> applicable_countermeasures(const RiskModel& model,
                                                        const std::string& risk) {
  const Vertex* v = model.find_vertex(risk);
  if (!v) throw Error("unknown risk " + risk);
  if (v->kind != VertexKind::UnwantedIncident) throw Error(risk + " is not an unwanted incident");
  auto scope = ancestors(model, risk);
  scope.insert(risk);
  std::set<std::string> out;
  for (const auto& t : model.treats)
    if (scope.count(t.target)) out.insert(t.countermeasure);
  return out;
}

/// One state per subset of the applicable countermeasures, in binary-counter
/// order over the sorted ids (state 0 is the untreated state).
inline std::vector<RiskState> enumerate_states(const RiskModel& model, const std::string& risk,
                                               std::size_t cap = kDefaultSubsetCap) {
  const auto applicable = applicable_countermeasures(model, risk);
  if (applicable.size() > cap || applicable.size() >= 63) {
    throw CapacityError(risk + " has " + std::to_string(applicable.size()) +
                        " applicable countermeasures, above the cap of " + std::to_string(cap) +
                        "; filter the countermeasures considered for this risk");
  }
  const std::vector<std::string> ids(applicable.begin(), applicable.end());
  const Propagator prop(model);
  const std::size_t slot = prop.vertex_index(risk);
  const std::size_t count = std::size_t{1} << ids.size();
  std::vector<RiskState> states(count);
  detail::parallel_for(count, [&](std::size_t mask) {
    Alternative alt = subset_from_mask(ids, mask);
    const VertexResult r = prop.run_indexed(alt)[slot];
    states[mask] = RiskState{risk, std::move(alt), r.frequency, r.consequence};
  });
  return states;
}

// ---------------------------------------------------------------------------
// Decision diagrams
// ---------------------------------------------------------------------------

struct DiagramEdge {
  std::size_t from = 0;  // indices into DecisionDiagram::states
  std::size_t to = 0;
  std::string countermeasure;

  friend bool operator==(const DiagramEdge&, const DiagramEdge&) = default;
};

struct DecisionDiagram {
  std::vector<RiskState> states;
  std::vector<std::string> labels;  // "S<i>", i = position in the enumeration
  std::vector<DiagramEdge> edges;
  std::size_t initial = 0;
  std::size_t pruned = 0;  // states dominated by S0 on both axes
};

/// Links states whose alternatives differ by one added countermeasure and
/// drops states that are worse than S0 on both frequency and consequence
/// (compared on interval midpoints).
inline DecisionDiagram build_decision_diagram(std::span<const RiskState> states) {
  if (states.empty()) throw Error("decision diagram needs at least one state");
  std::size_t s0 = states.size();
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].alternative.empty()) {
      s0 = i;
      break;
    }
  if (s0 == states.size()) throw Error("decision diagram needs the untreated state S0");

  const double f0 = states[s0].frequency.mid();
  const double c0 = states[s0].consequence.mid();
  DecisionDiagram dd;
  std::map<Alternative, std::size_t> index;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    if (i != s0 && s.frequency.mid() > f0 && s.consequence.mid() > c0) {
      ++dd.pruned;
      continue;
    }
    if (i == s0) dd.initial = dd.states.size();
    index[s.alternative] = dd.states.size();
    dd.states.push_back(s);
    dd.labels.push_back("S" + std::to_string(i));
  }

  std::set<std::string> universe;
  for (const auto& s : dd.states) universe.insert(s.alternative.begin(), s.alternative.end());
  for (std::size_t i = 0; i < dd.states.size(); ++i) {
    for (const auto& cm : universe) {
      if (dd.states[i].alternative.count(cm)) continue;
      Alternative next = dd.states[i].alternative;
      next.insert(cm);
      if (auto it = index.find(next); it != index.end() && it->second != dd.initial)
        dd.edges.push_back({i, it->second, cm});
    }
  }
  return dd;
}

/// Graphviz digraph; node positions put frequency on X and consequence on Y.
inline std::string export_dot(const DecisionDiagram& dd, const std::string& name = "decision") {
  std::string out = "digraph " + detail::quote(name) + " {\n";
  for (std::size_t i = 0; i < dd.states.size(); ++i) {
    const auto& s = dd.states[i];
    out += "  " + dd.labels[i] + " [label=\"" + dd.labels[i] + "\\n(" +
           detail::display(s.frequency) + ", " + detail::display(s.consequence) + ")\", pos=\"" +
           detail::display(s.frequency.mid()) + "," + detail::display(s.consequence.mid()) +
           "\"];\n";
  }
  for (const auto& e : dd.edges)
    out += "  " + dd.labels[e.from] + " -> " + dd.labels[e.to] + " [label=" +
           detail::quote(e.countermeasure) + "];\n";
  out += "}\n";
  return out;
}

/// `state,alternative,frequency,consequence`, one row per state.
inline std::string export_csv(std::span<const RiskState> states) {
  std::string out = "state,alternative,frequency,consequence\n";
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    out += "S" + std::to_string(i) + "," + detail::csv_field(alternative_text(s.alternative)) +
           "," + detail::csv_field(detail::display(s.frequency)) + "," +
           detail::csv_field(detail::display(s.consequence)) + "\n";
  }
  return out;
}

inline nlohmann::json interval_json(const Interval& x) { return nlohmann::json::array({x.lo, x.hi}); }

inline nlohmann::json diagram_json(const DecisionDiagram& dd) {
  nlohmann::json states = nlohmann::json::array();
  for (std::size_t i = 0; i < dd.states.size(); ++i) {
    const auto& s = dd.states[i];
    states.push_back({{"state", dd.labels[i]},
                      {"alternative", std::vector<std::string>(s.alternative.begin(),
                                                               s.alternative.end())},
                      {"frequency", interval_json(s.frequency)},
                      {"consequence", interval_json(s.consequence)}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : dd.edges)
    edges.push_back({{"from", dd.labels[e.from]},
                     {"to", dd.labels[e.to]},
                     {"countermeasure", e.countermeasure}});
  const std::string risk = dd.states.empty() ? "" : dd.states.front().risk;
  return {{"risk", risk}, {"states", states}, {"edges", edges}, {"pruned", dd.pruned}};
}

}  // namespace riskforge
