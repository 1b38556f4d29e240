#pragma once

// JSON mirror of the DSL, schema version 1.

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "riskforge/model.hpp"

namespace riskforge {

inline constexpr int kJsonSchemaVersion = 1;

class JsonError : public Error {
 public:
  using Error::Error;
};

namespace json_detail {

using nlohmann::json;

inline json interval(const Interval& x) {
  if (x.is_point()) return x.lo;
  return json::array({x.lo, x.hi});
}

inline Interval interval(const json& j, const char* what) {
  if (j.is_number()) return Interval::point(j.get<double>());
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    const Interval x{j[0].get<double>(), j[1].get<double>()};
    if (!x.well_formed()) throw JsonError(std::string(what) + ": interval lower bound exceeds upper bound");
    return x;
  }
  throw JsonError(std::string(what) + ": expected a number or [lo, hi]");
}

inline json period(const Period& p) { return p.str(); }

inline Period period(const json& j, const char* what) {
  if (!j.is_string()) throw JsonError(std::string(what) + ": expected a period string such as \"10y\"");
  const std::string s = j.get<std::string>();
  if (s.size() < 2) throw JsonError(std::string(what) + ": malformed period '" + s + "'");
  const auto unit = unit_from_suffix(s.back());
  double mag = 0.0;
  std::size_t used = 0;
  try {
    mag = std::stod(s.substr(0, s.size() - 1), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (!unit || used != s.size() - 1) throw JsonError(std::string(what) + ": malformed period '" + s + "'");
  return {mag, *unit};
}

inline json frequency(const Frequency& f) {
  return {{"occurrences", interval(f.occurrences)}, {"per", period(f.per)}};
}

inline Frequency frequency(const json& j, const char* what) {
  return {interval(j.at("occurrences"), what), period(j.at("per"), what)};
}

inline json cost(const Cost& c) { return {{"amount", c.amount}, {"per", period(c.per)}}; }

inline Cost cost(const json& j, const char* what) {
  if (!j.at("amount").is_number()) throw JsonError(std::string(what) + ": amount must be a number");
  return {j.at("amount").get<double>(), period(j.at("per"), what)};
}

inline std::string text(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  if (!j.at(key).is_string()) throw JsonError(std::string(key) + " must be a string");
  return j.at(key).get<std::string>();
}

inline std::string required_text(const json& j, const char* key) {
  if (!j.contains(key)) throw JsonError(std::string("missing field '") + key + "'");
  return text(j, key);
}

inline const json& array(const json& j, const char* key) {
  static const json empty = json::array();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_array()) throw JsonError(std::string("'") + key + "' must be an array");
  return j.at(key);
}

}  // namespace json_detail

inline nlohmann::json to_json_value(const RiskModel& model) {
  using namespace json_detail;
  const RiskModel m = canonicalize(model);
  json out;
  out["schema"] = kJsonSchemaVersion;
  out["name"] = m.name;
  out["base_period"] = period(m.base_period);

  json vertices = json::array();
  for (const auto& v : m.vertices) {
    json jv = {{"id", v.id}, {"kind", std::string(to_string(v.kind))}};
    if (!v.label.empty()) jv["label"] = v.label;
    if (v.consequence) jv["consequence"] = interval(*v.consequence);
    if (v.merge != MergePolicy::Separate) jv["merge"] = std::string(to_string(v.merge));
    json impacts = json::array();
    for (const auto& r : m.impacts)
      if (r.incident == v.id) impacts.push_back(r.asset);
    if (!impacts.empty()) jv["impacts"] = impacts;
    vertices.push_back(std::move(jv));
  }
  out["vertices"] = std::move(vertices);

  json initiates = json::array();
  for (const auto& r : m.initiates) {
    json j = {{"source", r.source}, {"target", r.target}, {"frequency", frequency(r.frequency)}};
    if (!r.via.empty()) j["via"] = r.via;
    initiates.push_back(std::move(j));
  }
  out["initiates"] = std::move(initiates);

  json leadsto = json::array();
  for (const auto& r : m.leadsto) {
    json j = {{"source", r.source}, {"target", r.target}, {"likelihood", interval(r.likelihood)}};
    if (!r.via.empty()) j["via"] = r.via;
    leadsto.push_back(std::move(j));
  }
  out["leadsto"] = std::move(leadsto);

  json cms = json::array();
  for (const auto& c : m.countermeasures) {
    json j = {{"id", c.id}, {"cost", cost(c.expenditure)}};
    if (!c.label.empty()) j["label"] = c.label;
    cms.push_back(std::move(j));
  }
  out["countermeasures"] = std::move(cms);

  json treats = json::array();
  for (const auto& t : m.treats)
    treats.push_back({{"countermeasure", t.countermeasure},
                      {"target", t.target},
                      {"freq_effect", interval(t.freq_effect)},
                      {"cons_effect", interval(t.cons_effect)}});
  out["treats"] = std::move(treats);

  json depends = json::array();
  for (const auto& d : m.depends)
    depends.push_back(
        {{"countermeasure", d.countermeasure},
         {"treats", {{"countermeasure", d.treats.countermeasure}, {"target", d.treats.target}}},
         {"freq_dep", interval(d.freq_dep)},
         {"cons_dep", interval(d.cons_dep)}});
  out["depends"] = std::move(depends);

  json criteria = json::array();
  for (const auto& c : m.criteria) {
    json j = {{"risk", c.risk}};
    if (c.max_frequency) j["max_frequency"] = frequency(*c.max_frequency);
    if (c.max_risk_cost) j["max_risk_cost"] = cost(*c.max_risk_cost);
    criteria.push_back(std::move(j));
  }
  out["criteria"] = std::move(criteria);
  return out;
}

inline std::string to_json(const RiskModel& model) { return to_json_value(model).dump(2) + "\n"; }

/// Reads schema v1 JSON and validates the result. Structural problems throw
/// JsonError; semantic ones throw ModelError, as parse() would report them.
inline RiskModel from_json_value(const nlohmann::json& j, const ValidateOptions& opts = {}) {
  using namespace json_detail;
  if (!j.is_object()) throw JsonError("model JSON must be an object");
  if (!j.contains("schema")) throw JsonError("missing field 'schema'");
  if (!j.at("schema").is_number_integer() || j.at("schema").get<long long>() != kJsonSchemaVersion)
    throw JsonError("unsupported schema version " + j.at("schema").dump() + " (expected " +
                    std::to_string(kJsonSchemaVersion) + ")");
  RiskModel m;
  try {
    m.name = text(j, "name");
    m.base_period = period(j.at("base_period"), "base_period");
    for (const auto& jv : array(j, "vertices")) {
      Vertex v;
      v.id = required_text(jv, "id");
      const auto kind = vertex_kind_from(required_text(jv, "kind"));
      if (!kind) throw JsonError("vertex " + v.id + ": unknown kind " + jv.at("kind").dump());
      v.kind = *kind;
      v.label = text(jv, "label");
      if (jv.contains("consequence")) v.consequence = interval(jv.at("consequence"), "consequence");
      if (jv.contains("merge")) {
        const auto policy = merge_policy_from(text(jv, "merge"));
        if (!policy) throw JsonError("vertex " + v.id + ": unknown merge policy");
        v.merge = *policy;
      }
      for (const auto& a : array(jv, "impacts")) {
        if (!a.is_string()) throw JsonError("vertex " + v.id + ": impacts must be asset ids");
        m.impacts.push_back({v.id, a.get<std::string>()});
      }
      m.vertices.push_back(std::move(v));
    }
    for (const auto& r : array(j, "initiates"))
      m.initiates.push_back({required_text(r, "source"), required_text(r, "target"),
                             frequency(r.at("frequency"), "initiate frequency"), text(r, "via")});
    for (const auto& r : array(j, "leadsto"))
      m.leadsto.push_back({required_text(r, "source"), required_text(r, "target"),
                           interval(r.at("likelihood"), "likelihood"), text(r, "via")});
    for (const auto& c : array(j, "countermeasures"))
      m.countermeasures.push_back(
          {required_text(c, "id"), text(c, "label"), cost(c.at("cost"), "countermeasure cost")});
    for (const auto& t : array(j, "treats"))
      m.treats.push_back({required_text(t, "countermeasure"), required_text(t, "target"),
                          interval(t.at("freq_effect"), "freq_effect"),
                          interval(t.at("cons_effect"), "cons_effect")});
    for (const auto& d : array(j, "depends")) {
      const json& ref = d.at("treats");
      m.depends.push_back({required_text(d, "countermeasure"),
                           {required_text(ref, "countermeasure"), required_text(ref, "target")},
                           interval(d.at("freq_dep"), "freq_dep"),
                           interval(d.at("cons_dep"), "cons_dep")});
    }
    for (const auto& c : array(j, "criteria")) {
      AcceptanceCriterion ac{required_text(c, "risk"), {}, {}};
      if (c.contains("max_frequency"))
        ac.max_frequency = frequency(c.at("max_frequency"), "max_frequency");
      if (c.contains("max_risk_cost")) ac.max_risk_cost = cost(c.at("max_risk_cost"), "max_risk_cost");
      m.criteria.push_back(std::move(ac));
    }
  } catch (const nlohmann::json::exception& e) {
    throw JsonError(std::string("malformed model JSON: ") + e.what());
  }
  require_valid(m, opts);
  return m;
}

inline RiskModel from_json(std::string_view text, const ValidateOptions& opts = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw JsonError(std::string("invalid JSON: ") + e.what());
  }
  return from_json_value(j, opts);
}

}  // namespace riskforge
