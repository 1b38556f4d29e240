#pragma once

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riskforge/riskforge.hpp"

namespace riskforge::cli {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kInfeasible = 3 };

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Loads a `.json` or DSL model. Warnings go to `err`; under `coras` they
/// are fatal.
inline RiskModel load(const std::string& path, bool coras, std::ostream& err) {
  const std::string text = read_file(path);
  const ValidateOptions opts{coras};
  RiskModel m;
  std::vector<Diagnostic> warnings;
  if (ends_with(path, ".json")) {
    m = from_json(text, opts);
    warnings = validate(m, opts);
  } else {
    m = parse(text, &warnings, opts);
  }
  for (const auto& d : warnings) err << path << ": " << d.str() << "\n";
  if (coras && !warnings.empty())
    throw Error(path + ": warnings are errors under --coras");
  return m;
}

inline Alternative split_ids(const std::string& list) {
  Alternative out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.insert(item);
  }
  return out;
}

inline std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (width.size() <= i) width.push_back(0);
      width[i] = std::max(width[i], r[i].size());
    }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
    }
    out += line + "\n";
  }
  return out;
}

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw Error("cannot write " + out_path);
  f << text;
}

}  // namespace detail

/// Runs the command line `args` (without the program name).
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Countermeasure analysis on annotated risk graphs", "riskforge"};
  app.require_subcommand(1);
  bool coras = false;
  app.add_flag("--coras", coras, "Treat CORAS range warnings (likelihood > 1) as errors");

  std::string file;
  auto add_file = [&](CLI::App* sub) {
    sub->add_option("file", file, "Model file (.riskdsl or .json)")->required();
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check a model and report diagnostics");
  add_file(validate_cmd);

  std::string with;
  std::string format;
  auto* propagate_cmd = app.add_subcommand("propagate", "Propagate frequencies and consequences");
  add_file(propagate_cmd);
  propagate_cmd->add_option("--with", with, "Comma-separated countermeasures to apply");
  propagate_cmd->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"table", "json"}));

  std::string risk, out_path;
  auto* analyze_cmd = app.add_subcommand("analyze", "Enumerate the states of one risk");
  add_file(analyze_cmd);
  analyze_cmd->add_option("--risk", risk, "Unwanted incident id")->required();
  analyze_cmd->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "dot", "json"}));
  analyze_cmd->add_option("--out", out_path, "Write to this file instead of stdout");

  std::optional<double> budget;
  bool pessimistic = false;
  auto* synergy_cmd = app.add_subcommand("synergy", "Rank global countermeasure alternatives");
  add_file(synergy_cmd);
  synergy_cmd->add_option("--budget", budget, "Upper bound on the overall cost per base period");
  synergy_cmd->add_flag("--pessimistic", pessimistic, "Cost intervals at their upper ends");
  synergy_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  std::string rule_name, vertex;
  std::size_t runs = kDefaultRuns;
  double horizon = kDefaultHorizon;
  std::uint64_t seed = 1;
  bool fixed_horizon = false;
  auto* simulate_cmd = app.add_subcommand("simulate", "Check one calculus rule by simulation");
  add_file(simulate_cmd);
  simulate_cmd->add_option("--rule", rule_name, "leads_to, separate, exclusive, cm_effect or cm_dependency")
      ->required()
      ->check(CLI::IsMember({"leads_to", "separate", "exclusive", "cm_effect", "cm_dependency"}));
  simulate_cmd->add_option("--runs", runs, "Independent histories")->check(CLI::Range(2, 1000000));
  simulate_cmd->add_option("--horizon", horizon, "Upper bound on the history length in base periods")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", seed, "Master seed");
  simulate_cmd->add_option("--vertex", vertex, "Conclusion vertex (default depends on the rule)");
  simulate_cmd->add_option("--with", with, "Alternative to simulate (default depends on the rule)");
  simulate_cmd->add_flag("--fixed-horizon", fixed_horizon, "Use --horizon as given, without scaling");

  std::string target;
  auto* export_cmd = app.add_subcommand("export", "Convert a model to canonical DSL or JSON");
  add_file(export_cmd);
  export_cmd->add_option("--to", target, "Target format")->required()->check(CLI::IsMember({"json", "dsl"}));

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return kUsage;
  }

  try {
    const RiskModel model = detail::load(file, coras, err);

    if (validate_cmd->parsed()) {
      out << "ok: " << model.vertices.size() << " vertices, " << model.countermeasures.size()
          << " countermeasures\n";
      return kOk;
    }

    if (propagate_cmd->parsed()) {
      const Alternative alt = detail::split_ids(with);
      const Propagator prop(model);
      const auto results = prop.run_indexed(alt);
      if (format == "json") {
        nlohmann::json vertices = nlohmann::json::object();
        for (std::size_t i = 0; i < results.size(); ++i)
          vertices[prop.vertex_order()[i]] = {{"frequency", interval_json(results[i].frequency)},
                                              {"consequence", interval_json(results[i].consequence)}};
        const nlohmann::json j = {{"base_period", model.base_period.str()},
                                  {"alternative", std::vector<std::string>(alt.begin(), alt.end())},
                                  {"vertices", vertices}};
        out << j.dump(2) << "\n";
      } else {
        std::vector<std::vector<std::string>> rows{
            {"vertex", "kind", "freq [/" + model.base_period.str() + "]", "consequence"}};
        for (std::size_t i = 0; i < results.size(); ++i) {
          const Vertex& v = *model.find_vertex(prop.vertex_order()[i]);
          rows.push_back({v.id, std::string(to_string(v.kind)),
                          riskforge::detail::display(results[i].frequency),
                          v.consequence ? riskforge::detail::display(results[i].consequence) : "-"});
        }
        out << detail::table(rows);
      }
      return kOk;
    }

    if (analyze_cmd->parsed()) {
      const auto states = enumerate_states(model, risk);
      std::string text;
      if (format == "dot") {
        text = export_dot(build_decision_diagram(states), risk);
      } else if (format == "json") {
        text = diagram_json(build_decision_diagram(states)).dump(2) + "\n";
      } else {
        text = export_csv(states);
      }
      detail::emit(text, out_path, out);
      return kOk;
    }

    if (synergy_cmd->parsed()) {
      const CostOptions opts{pessimistic, kDefaultSubsetCap};
      for (const auto& w : acceptable(model, {}, opts).warnings) err << "warning: " << w << "\n";
      const auto ranked = rank_alternatives(model, opts);
      const Recommendation rec = recommend(model, budget, opts);
      if (format == "json") {
        nlohmann::json ranking = nlohmann::json::array();
        for (const auto& g : ranked) ranking.push_back(global_alternative_json(g));
        out << nlohmann::json{{"recommendation", recommendation_json(rec)}, {"ranking", ranking}}.dump(2)
            << "\n";
      } else {
        out << export_ranking_csv(ranked);
      }
      if (const auto* r = std::get_if<Recommended>(&rec)) {
        err << "recommended: {" << alternative_text(r->best.countermeasures) << "} overall cost "
            << riskforge::detail::display(r->best.overall_cost) << " per " << model.base_period.str()
            << "\n";
        return kOk;
      }
      if (const auto* o = std::get_if<OverBudget>(&rec)) {
        err << "over budget: cheapest acceptable alternative {"
            << alternative_text(o->best.countermeasures) << "} costs "
            << riskforge::detail::display(o->best.overall_cost) << " > "
            << riskforge::detail::display(o->budget) << "\n";
        return kInfeasible;
      }
      for (const auto& g : std::get<NoFeasible>(rec).gaps) {
        err << "no feasible alternative: " << g.risk << " best frequency "
            << riskforge::detail::display(g.best_frequency);
        if (g.frequency_gap) err << " (gap " << riskforge::detail::display(*g.frequency_gap) << ")";
        err << ", best risk cost " << riskforge::detail::display(g.best_risk_cost);
        if (g.cost_gap) err << " (gap " << riskforge::detail::display(*g.cost_gap) << ")";
        err << "\n";
      }
      return kInfeasible;
    }

    if (simulate_cmd->parsed()) {
      const Rule rule = *rule_from(rule_name);
      RuleInstance inst{model, with.empty() ? default_alternative(rule, model) : detail::split_ids(with),
                        vertex};
      if (inst.vertex.empty()) {
        auto v = default_vertex(rule, model);
        if (!v) throw Error("no vertex in the model fits rule " + rule_name + "; pass --vertex");
        inst.vertex = *v;
      }
      riskforge::detail::check_instance(rule, inst);
      const double h = fixed_horizon ? horizon : adaptive_horizon(inst, horizon);
      out << verdict_json(check_rule(rule, inst, runs, h, seed)).dump(2) << "\n";
      return kOk;
    }

    if (export_cmd->parsed()) {
      out << (target == "json" ? to_json(model) : serialize(model));
      return kOk;
    }
  } catch (const ParseError& e) {
    err << file << ":" << e.span().line << ":" << e.span().column << ": error: " << e.message()
        << "\n";
    return kFailure;
  } catch (const ModelError& e) {
    for (const auto& d : e.diagnostics())
      if (d.is_error()) err << file << ": " << d.str() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace riskforge::cli
