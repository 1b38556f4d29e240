#pragma once

// Line-oriented text format for annotated risk models (`.riskdsl`).
//
//   riskmodel "eHealth" timeunit 10y
//   threat NF "Network failure"
//   scenario NCD "Network connection goes down"
//   incident LMD "Loss of monitored data" consequence 5000
//   initiate NF -> NCD frequency 30:10y via "Unstable network"
//   leadsto NCD -> LMD likelihood [0.7,0.9]
//   countermeasure IRN "Redundant network" cost 5000:10y
//   treats IRN -> NCD effect 0.7L 0C
//   depends EQS -> (IRN -> NCD) effect 0.3L 0C
//   merge LMD exclusive
//   accept LMD frequency <= 10:10y
//
// `#` starts a comment. Numbers may be written as intervals `[lo,hi]`.

#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "riskforge/detail/format.hpp"
#include "riskforge/model.hpp"

namespace riskforge {

/// 1-based position in the source text.
struct SourceSpan {
  std::size_t line = 1;
  std::size_t column = 1;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

class ParseError : public Error {
 public:
  ParseError(SourceSpan span, const std::string& message, std::string subject = {})
      : Error(std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + message),
        span_(span),
        message_(message),
        subject_(std::move(subject)) {}

  const SourceSpan& span() const noexcept { return span_; }
  const std::string& message() const noexcept { return message_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  SourceSpan span_;
  std::string message_;
  std::string subject_;
};

namespace dsl_detail {

enum class Tok { Ident, Number, String, Arrow, LParen, RParen, LBracket, RBracket, Comma, Colon, Le, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  std::size_t column = 1;
  bool glued = false;  // no whitespace before this token
};

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
inline bool digit(char c) { return c >= '0' && c <= '9'; }

inline std::vector<Token> lex_line(std::string_view line, std::size_t line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  bool glued = false;
  auto fail = [&](std::size_t col, const std::string& msg) {
    throw ParseError({line_no, col + 1}, msg);
  };
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      glued = false;
      continue;
    }
    if (c == '#') break;
    Token t;
    t.column = i + 1;
    t.glued = glued && !out.empty();
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < line.size() && ident_char(line[j])) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(line.substr(i, j - i));
      i = j;
    } else if (c == '"') {
      std::size_t j = i + 1;
      std::string s;
      bool closed = false;
      while (j < line.size()) {
        const char d = line[j];
        if (d == '"') {
          closed = true;
          ++j;
          break;
        }
        if (d == '\\') {
          if (j + 1 >= line.size()) break;
          const char e = line[j + 1];
          if (e == 'n') s += '\n';
          else if (e == 't') s += '\t';
          else if (e == '"' || e == '\\') s += e;
          else fail(j, std::string("unknown escape \\") + e);
          j += 2;
          continue;
        }
        s += d;
        ++j;
      }
      if (!closed) fail(i, "unterminated string");
      t.kind = Tok::String;
      t.text = std::move(s);
      i = j;
    } else if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      t.kind = Tok::Arrow;
      t.text = "->";
      i += 2;
    } else if (c == '<' && i + 1 < line.size() && line[i + 1] == '=') {
      t.kind = Tok::Le;
      t.text = "<=";
      i += 2;
    } else if (digit(c) || ((c == '-' || c == '+' || c == '.') && i + 1 < line.size() &&
                            (digit(line[i + 1]) || line[i + 1] == '.'))) {
      std::size_t j = i;
      if (line[j] == '-' || line[j] == '+') ++j;
      while (j < line.size() && digit(line[j])) ++j;
      if (j < line.size() && line[j] == '.') {
        ++j;
        while (j < line.size() && digit(line[j])) ++j;
      }
      if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < line.size() && (line[k] == '+' || line[k] == '-')) ++k;
        if (k < line.size() && digit(line[k])) {
          j = k;
          while (j < line.size() && digit(line[j])) ++j;
        }
      }
      std::string_view num = line.substr(i, j - i);
      if (!num.empty() && num.front() == '+') num.remove_prefix(1);
      double v = 0.0;
      auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
      if (ec != std::errc() || p != num.data() + num.size()) fail(i, "malformed number");
      t.kind = Tok::Number;
      t.text = std::string(line.substr(i, j - i));
      t.number = v;
      i = j;
    } else {
      switch (c) {
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case '[': t.kind = Tok::LBracket; break;
        case ']': t.kind = Tok::RBracket; break;
        case ',': t.kind = Tok::Comma; break;
        case ':': t.kind = Tok::Colon; break;
        default: fail(i, std::string("unexpected character '") + c + "'");
      }
      t.text = std::string(1, c);
      ++i;
    }
    out.push_back(std::move(t));
    glued = true;
  }
  Token end;
  end.kind = Tok::End;
  end.column = line.size() + 1;
  out.push_back(end);
  return out;
}

/// Parser state for one document.
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  RiskModel run(std::vector<Diagnostic>* warnings, const ValidateOptions& opts) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      std::size_t nl = text_.find('\n', pos);
      if (nl == std::string_view::npos) nl = text_.size();
      ++line_no;
      line_ = line_no;
      toks_ = lex_line(text_.substr(pos, nl - pos), line_no);
      at_ = 0;
      if (peek().kind != Tok::End) statement();
      if (nl == text_.size()) break;
      pos = nl + 1;
    }
    if (!have_header_) throw ParseError({1, 1}, "missing riskmodel header");
    resolve_references();
    finish_criteria();
    auto diags = validate(model_, opts);
    for (const auto& d : diags)
      if (d.is_error()) throw ParseError(span_of(d.subject), d.message, d.subject);
    if (warnings) *warnings = std::move(diags);
    return std::move(model_);
  }

 private:
  struct Ref {
    std::string id;
    SourceSpan span;
    bool countermeasure;
  };

  // -- token helpers --------------------------------------------------------

  const Token& peek() const { return toks_[at_]; }
  SourceSpan here() const { return {line_, peek().column}; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(here(), msg); }
  [[noreturn]] void fail_at(SourceSpan s, const std::string& msg, std::string subject = {}) const {
    throw ParseError(s, msg, std::move(subject));
  }

  Token take() { return toks_[at_ == toks_.size() - 1 ? at_ : at_++]; }

  Token expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    return take();
  }

  void keyword(std::string_view kw) {
    if (peek().kind != Tok::Ident || peek().text != kw) fail("expected '" + std::string(kw) + "'");
    take();
  }

  bool accept_keyword(std::string_view kw) {
    if (peek().kind == Tok::Ident && peek().text == kw) {
      take();
      return true;
    }
    return false;
  }

  std::pair<std::string, SourceSpan> identifier(const char* what) {
    const SourceSpan s = here();
    return {expect(Tok::Ident, what).text, s};
  }

  std::string optional_string() {
    if (peek().kind == Tok::String) return take().text;
    return {};
  }

  void end_of_statement() {
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
  }

  double number() { return expect(Tok::Number, "a number").number; }

  /// `<num>` or `[<num>,<num>]`.
  std::pair<Interval, SourceSpan> value() {
    const SourceSpan s = here();
    if (peek().kind == Tok::LBracket) {
      take();
      const double lo = number();
      expect(Tok::Comma, "','");
      const double hi = number();
      expect(Tok::RBracket, "']'");
      const Interval x{lo, hi};
      if (!x.well_formed()) fail_at(s, "interval lower bound exceeds upper bound");
      return {x, s};
    }
    if (peek().kind != Tok::Number) fail("expected a number or interval");
    return {Interval::point(number()), s};
  }

  /// A value immediately followed by a one-letter marker such as `L` or `C`.
  std::pair<Interval, SourceSpan> marked_value(std::string_view marker) {
    auto v = value();
    if (peek().kind != Tok::Ident || !peek().glued || peek().text != marker)
      fail("expected '" + std::string(marker) + "' directly after the value");
    take();
    return v;
  }

  Period period() {
    const SourceSpan s = here();
    const double mag = number();
    if (peek().kind != Tok::Ident || !peek().glued || peek().text.size() != 1)
      fail("expected a time unit d, m or y");
    const auto unit = unit_from_suffix(peek().text[0]);
    if (!unit) fail("expected a time unit d, m or y");
    take();
    if (!(mag > 0.0)) fail_at(s, "period must be > 0");
    return {mag, *unit};
  }

  Frequency freqspec(const char* what) {
    auto [occ, s] = value();
    if (occ.lo < 0.0) fail_at(s, std::string(what) + " must be ≥ 0");
    expect(Tok::Colon, "':'");
    return {occ, period()};
  }

  Cost costspec(const char* what) {
    const SourceSpan s = here();
    const double amount = number();
    if (amount < 0.0) fail_at(s, std::string(what) + " must be ≥ 0");
    expect(Tok::Colon, "':'");
    return {amount, period()};
  }

  // -- statements -----------------------------------------------------------

  void statement() {
    const SourceSpan start = here();
    auto [kw, _] = identifier("a statement keyword");
    if (kw == "riskmodel") return header(start);
    if (!have_header_) fail_at(start, "missing riskmodel header before '" + kw + "'");
    if (auto kind = vertex_kind_from(kw)) return vertex(*kind);
    if (kw == "initiate") return initiate();
    if (kw == "leadsto") return leadsto();
    if (kw == "impact") return impact();
    if (kw == "countermeasure") return countermeasure();
    if (kw == "treats") return treats();
    if (kw == "depends") return depends();
    if (kw == "merge") return merge();
    if (kw == "accept") return accept();
    fail_at(start, "unknown statement '" + kw + "'");
  }

  void header(SourceSpan start) {
    if (have_header_) fail_at(start, "duplicate riskmodel header");
    model_.name = expect(Tok::String, "a model name string").text;
    keyword("timeunit");
    model_.base_period = period();
    end_of_statement();
    have_header_ = true;
  }

  void declare(const std::string& id, SourceSpan s) {
    if (!decl_.emplace(id, s).second) fail_at(s, "duplicate id " + id, id);
  }

  void vertex(VertexKind kind) {
    auto [id, s] = identifier("an identifier");
    Vertex v{id, kind, optional_string(), std::nullopt, MergePolicy::Separate};
    if (accept_keyword("consequence")) {
      if (kind != VertexKind::UnwantedIncident)
        fail("only incidents carry a consequence");
      auto [c, cs] = value();
      if (c.lo < 0.0) fail_at(cs, "consequence must be ≥ 0");
      v.consequence = c;
    }
    end_of_statement();
    declare(id, s);
    model_.vertices.push_back(std::move(v));
  }

  std::string via_clause() {
    if (accept_keyword("via")) return expect(Tok::String, "a vulnerability string").text;
    return {};
  }

  void initiate() {
    auto [src, ss] = identifier("a threat id");
    expect(Tok::Arrow, "'->'");
    auto [dst, ds] = identifier("a vertex id");
    keyword("frequency");
    InitiateRel r{src, dst, freqspec("frequency"), via_clause()};
    end_of_statement();
    refs_.push_back({src, ss, false});
    refs_.push_back({dst, ds, false});
    model_.initiates.push_back(std::move(r));
  }

  void leadsto() {
    auto [src, ss] = identifier("a vertex id");
    expect(Tok::Arrow, "'->'");
    auto [dst, ds] = identifier("a vertex id");
    keyword("likelihood");
    auto [l, ls] = value();
    if (l.lo < 0.0) fail_at(ls, "likelihood must be ≥ 0");
    LeadsToRel r{src, dst, l, via_clause()};
    end_of_statement();
    refs_.push_back({src, ss, false});
    refs_.push_back({dst, ds, false});
    model_.leadsto.push_back(std::move(r));
  }

  void impact() {
    auto [src, ss] = identifier("an incident id");
    expect(Tok::Arrow, "'->'");
    auto [dst, ds] = identifier("an asset id");
    end_of_statement();
    refs_.push_back({src, ss, false});
    refs_.push_back({dst, ds, false});
    model_.impacts.push_back({src, dst});
  }

  void countermeasure() {
    auto [id, s] = identifier("an identifier");
    Countermeasure c{id, optional_string(), {}};
    keyword("cost");
    c.expenditure = costspec("cost");
    end_of_statement();
    declare(id, s);
    model_.countermeasures.push_back(std::move(c));
  }

  std::pair<Interval, Interval> effect_pair(const char* what) {
    keyword("effect");
    auto [f, fs] = marked_value("L");
    auto [c, cs] = marked_value("C");
    if (!f.within_unit()) fail_at(fs, std::string(what) + " outside [0,1]");
    if (!c.within_unit()) fail_at(cs, std::string(what) + " outside [0,1]");
    return {f, c};
  }

  void treats() {
    auto [cm, cms] = identifier("a countermeasure id");
    expect(Tok::Arrow, "'->'");
    auto [dst, ds] = identifier("a vertex id");
    auto [f, c] = effect_pair("effect");
    end_of_statement();
    refs_.push_back({cm, cms, true});
    refs_.push_back({dst, ds, false});
    model_.treats.push_back({cm, dst, f, c});
  }

  void depends() {
    auto [cm, cms] = identifier("a countermeasure id");
    expect(Tok::Arrow, "'->'");
    expect(Tok::LParen, "'('");
    auto [tcm, tcms] = identifier("a countermeasure id");
    expect(Tok::Arrow, "'->'");
    auto [dst, ds] = identifier("a vertex id");
    expect(Tok::RParen, "')'");
    auto [f, c] = effect_pair("dependency");
    end_of_statement();
    refs_.push_back({cm, cms, true});
    refs_.push_back({tcm, tcms, true});
    refs_.push_back({dst, ds, false});
    depends_spans_.push_back(tcms);
    model_.depends.push_back({cm, {tcm, dst}, f, c});
  }

  void merge() {
    auto [id, s] = identifier("a vertex id");
    const SourceSpan ps = here();
    auto [word, _] = identifier("separate, exclusive or overlapping");
    const auto policy = merge_policy_from(word);
    if (!policy) fail_at(ps, "unknown merge policy '" + word + "'");
    end_of_statement();
    if (!merges_.emplace(id, std::make_pair(*policy, s)).second)
      fail_at(s, "duplicate merge statement for " + id, id);
  }

  void accept() {
    auto [risk, rs] = identifier("an incident id");
    auto& c = pending_criteria_[risk];
    if (c.first.risk.empty()) c = {AcceptanceCriterion{risk, {}, {}}, rs};
    const SourceSpan ks = here();
    auto [what, _] = identifier("'frequency' or 'cost'");
    expect(Tok::Le, "'<='");
    if (what == "frequency") {
      if (c.first.max_frequency) fail_at(ks, "duplicate frequency bound for " + risk, risk);
      c.first.max_frequency = freqspec("frequency bound");
    } else if (what == "cost") {
      if (c.first.max_risk_cost) fail_at(ks, "duplicate cost bound for " + risk, risk);
      c.first.max_risk_cost = costspec("cost bound");
    } else {
      fail_at(ks, "expected 'frequency' or 'cost'");
    }
    end_of_statement();
    refs_.push_back({risk, rs, false});
  }

  // -- post-processing ------------------------------------------------------

  void resolve_references() {
    std::map<std::string, bool> is_cm;
    for (const auto& v : model_.vertices) is_cm[v.id] = false;
    for (const auto& c : model_.countermeasures) is_cm[c.id] = true;
    for (const auto& r : refs_) {
      auto it = is_cm.find(r.id);
      if (it == is_cm.end())
        fail_at(r.span, std::string("unknown ") + (r.countermeasure ? "countermeasure " : "vertex ") +
                            r.id, r.id);
      if (it->second != r.countermeasure)
        fail_at(r.span, r.id + (r.countermeasure ? " is not a countermeasure" : " is not a vertex"),
                r.id);
    }
    for (std::size_t i = 0; i < model_.depends.size(); ++i) {
      const auto& d = model_.depends[i];
      if (!model_.find_treats(d.treats))
        fail_at(depends_spans_[i],
                "no treats relation " + d.treats.countermeasure + " -> " + d.treats.target,
                d.treats.countermeasure);
    }
    for (const auto& [id, entry] : merges_) {
      auto it = std::find_if(model_.vertices.begin(), model_.vertices.end(),
                             [&](const Vertex& v) { return v.id == id; });
      if (it == model_.vertices.end()) fail_at(entry.second, "unknown vertex " + id, id);
      it->merge = entry.first;
    }
  }

  void finish_criteria() {
    for (auto& [risk, c] : pending_criteria_) model_.criteria.push_back(std::move(c.first));
  }

  SourceSpan span_of(const std::string& subject) const {
    if (auto it = decl_.find(subject); it != decl_.end()) return it->second;
    for (const auto& r : refs_)
      if (r.id == subject) return r.span;
    return {1, 1};
  }

  std::string_view text_;
  std::size_t line_ = 1;
  std::vector<Token> toks_;
  std::size_t at_ = 0;
  bool have_header_ = false;
  RiskModel model_;
  std::map<std::string, SourceSpan> decl_;
  std::vector<Ref> refs_;
  std::vector<SourceSpan> depends_spans_;
  std::map<std::string, std::pair<MergePolicy, SourceSpan>> merges_;
  std::map<std::string, std::pair<AcceptanceCriterion, SourceSpan>> pending_criteria_;
};

}  // namespace dsl_detail

/// Parses and validates a model. Warnings, if requested, are written to
/// `warnings`; any error throws ParseError carrying its source position.
inline RiskModel parse(std::string_view text, std::vector<Diagnostic>* warnings = nullptr,
                       const ValidateOptions& opts = {}) {
  return dsl_detail::Parser(text).run(warnings, opts);
}

/// Canonical text: fixed statement order, sorted declarations and shortest
/// round-trip numbers. `parse(serialize(m))` is structurally equal to `m`.
inline std::string serialize(const RiskModel& model) {
  using detail::quote;
  using detail::shortest;
  const RiskModel m = canonicalize(model);
  auto freq = [](const Frequency& f) { return shortest(f.occurrences) + ":" + f.per.str(); };
  auto cost = [](const Cost& c) { return shortest(c.amount) + ":" + c.per.str(); };
  auto labelled = [&](const std::string& label) { return label.empty() ? "" : " " + quote(label); };
  auto via = [&](const std::string& v) { return v.empty() ? "" : " via " + quote(v); };

  std::vector<std::vector<std::string>> sections(4);
  for (const auto& v : m.vertices) {
    std::string line = std::string(to_string(v.kind)) + " " + v.id + labelled(v.label);
    if (v.consequence) line += " consequence " + shortest(*v.consequence);
    sections[0].push_back(std::move(line));
  }
  for (const auto& v : m.vertices)
    if (v.merge != MergePolicy::Separate)
      sections[0].push_back("merge " + v.id + " " + std::string(to_string(v.merge)));
  for (const auto& r : m.initiates)
    sections[1].push_back("initiate " + r.source + " -> " + r.target + " frequency " +
                          freq(r.frequency) + via(r.via));
  for (const auto& r : m.leadsto)
    sections[1].push_back("leadsto " + r.source + " -> " + r.target + " likelihood " +
                          shortest(r.likelihood) + via(r.via));
  for (const auto& r : m.impacts) sections[1].push_back("impact " + r.incident + " -> " + r.asset);
  for (const auto& c : m.countermeasures)
    sections[2].push_back("countermeasure " + c.id + labelled(c.label) + " cost " +
                          cost(c.expenditure));
  for (const auto& t : m.treats)
    sections[2].push_back("treats " + t.countermeasure + " -> " + t.target + " effect " +
                          shortest(t.freq_effect) + "L " + shortest(t.cons_effect) + "C");
  for (const auto& d : m.depends)
    sections[2].push_back("depends " + d.countermeasure + " -> (" + d.treats.countermeasure +
                          " -> " + d.treats.target + ") effect " + shortest(d.freq_dep) + "L " +
                          shortest(d.cons_dep) + "C");
  for (const auto& c : m.criteria) {
    if (c.max_frequency)
      sections[3].push_back("accept " + c.risk + " frequency <= " + freq(*c.max_frequency));
    if (c.max_risk_cost)
      sections[3].push_back("accept " + c.risk + " cost <= " + cost(*c.max_risk_cost));
  }

  std::string out = "# riskforge model\n";
  out += "riskmodel " + quote(m.name) + " timeunit " + m.base_period.str() + "\n";
  for (const auto& section : sections) {
    if (section.empty()) continue;
    out += "\n";
    for (const auto& line : section) out += line + "\n";
  }
  return out;
}

}  // namespace riskforge
