#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = riskforge::cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("riskforge_cli_" + name);
  std::ofstream(p, std::ios::binary) << text;
  return p.string();
}

const std::string kSingle = rftest::data_path("ehealth_single_risk.riskdsl");
const std::string kFull = rftest::data_path("ehealth.riskdsl");

}  // namespace

TEST(Cli, Validate) {
  const auto r = cli({"validate", kFull});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("ok: ", 0), 0u);
}

TEST(Cli, PropagateTable) {
  const auto r = cli({"propagate", kSingle, "--with", "IRN,EQS,IRH"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("freq [/10y]"), std::string::npos);
  std::istringstream lines(r.out);
  std::string line;
  bool found = false;
  while (std::getline(lines, line))
    if (line.rfind("LMD", 0) == 0) {
      found = true;
      EXPECT_NE(line.find("5.0976"), std::string::npos) << line;
      EXPECT_NE(line.find("5000"), std::string::npos) << line;
    }
  EXPECT_TRUE(found) << r.out;
}

TEST(Cli, PropagateJson) {
  const auto r = cli({"propagate", kSingle, "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j.at("vertices").at("LMD").at("frequency")[0].get<double>(), 26.4, 1e-12);
}

TEST(Cli, AnalyzeCsvAndOutFile) {
  const auto r = cli({"analyze", kSingle, "--risk", "LMD"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 9);
  const std::string path = (fs::temp_directory_path() / "riskforge_cli_lmd.dot").string();
  const auto d = cli({"analyze", kSingle, "--risk", "LMD", "--format", "dot", "--out", path});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_TRUE(d.out.empty());
  EXPECT_EQ(rftest::read_text(path).rfind("digraph", 0), 0u);
  fs::remove(path);
}

TEST(Cli, AnalyzeUnknownRisk) { EXPECT_EQ(cli({"analyze", kSingle, "--risk", "NOPE"}).code, 1); }

TEST(Cli, SynergyRecommends) {
  const auto r = cli({"synergy", kSingle});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("1,IRH+IRN,52600,true"), std::string::npos);
  EXPECT_NE(r.err.find("recommended: {IRH+IRN}"), std::string::npos) << r.err;
  const auto j = cli({"synergy", kSingle, "--format", "json"});
  ASSERT_EQ(j.code, 0);
  EXPECT_EQ(nlohmann::json::parse(j.out).at("ranking").size(), 8u);
}

TEST(Cli, SynergyInfeasibleOutcomes) {
  EXPECT_EQ(cli({"synergy", kSingle, "--budget", "1000"}).code, 3);
  std::string text = rftest::read_text(kSingle);
  const auto pos = text.find("frequency <= 10:10y");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 19, "frequency <= 1:10y");
  const auto r = cli({"synergy", temp_file("strict.riskdsl", text)});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("no feasible alternative: LMD"), std::string::npos) << r.err;
}

TEST(Cli, UsageAndIoErrors) {
  EXPECT_EQ(cli({"propagate", kSingle, "--bogus"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"analyze", kSingle}).code, 2);
  EXPECT_EQ(cli({"propagate", kSingle, "--format", "xml"}).code, 2);
  const auto missing = cli({"validate", "/nonexistent/model.riskdsl"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("cannot read"), std::string::npos);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, ParseErrorsCarryPositions) {
  const std::string path = temp_file("bad.riskdsl", "riskmodel \"b\" timeunit 1y\nthreat T\nfrobnicate X\n");
  const auto r = cli({"validate", path});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(path + ":3:1: error: unknown statement 'frobnicate'"), std::string::npos) << r.err;
}

TEST(Cli, CorasPromotesWarnings) {
  const std::string path = temp_file("coras.riskdsl",
                                     "riskmodel \"c\" timeunit 1y\nthreat T\nscenario A\n"
                                     "incident I consequence 1\ninitiate T -> A frequency 1:1y\n"
                                     "leadsto A -> I likelihood 1.5\n");
  const auto lax = cli({"validate", path});
  EXPECT_EQ(lax.code, 0) << lax.err;
  const auto strict = cli({"--coras", "validate", path});
  EXPECT_EQ(strict.code, 1);
  EXPECT_NE(strict.err.find("likelihood above 1"), std::string::npos) << strict.err;
}

TEST(Cli, ExportRoundTrip) {
  const auto j = cli({"export", kFull, "--to", "json"});
  ASSERT_EQ(j.code, 0) << j.err;
  const std::string json_path = temp_file("model.json", j.out);
  const auto dsl = cli({"export", json_path, "--to", "dsl"});
  ASSERT_EQ(dsl.code, 0) << dsl.err;
  EXPECT_EQ(dsl.out, riskforge::serialize(rftest::fixture("ehealth.riskdsl")));
  const auto again = cli({"export", temp_file("model.riskdsl", dsl.out), "--to", "json"});
  EXPECT_EQ(again.out, j.out);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"propagate", kFull, "--with", "IRH,EQS"},
           {"analyze", kFull, "--risk", "LID", "--format", "json"},
           {"synergy", kFull, "--format", "json"}}) {
    const auto a = cli(args), b = cli(args);
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(a.out, b.out);
  }
}

TEST(Cli, Simulate) {
  const std::string path = temp_file("sim.riskdsl",
                                     "riskmodel \"s\" timeunit 1y\nthreat T\nscenario A\n"
                                     "incident B consequence 100\ninitiate T -> A frequency 3:1y\n"
                                     "leadsto A -> B likelihood 0.8\n");
  const auto r = cli({"simulate", path, "--rule", "leads_to", "--runs", "20", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("vertex"), "B");
  EXPECT_EQ(j.at("seed"), 5);
  EXPECT_NEAR(j.at("calculus_value").get<double>(), 2.4, 1e-12);
  EXPECT_EQ(cli({"simulate", path, "--rule", "exclusive"}).code, 1);
  EXPECT_EQ(cli({"simulate", path, "--rule", "nonsense"}).code, 2);
  const auto fixed = cli({"simulate", path, "--rule", "leads_to", "--runs", "5", "--horizon", "10",
                          "--fixed-horizon"});
  EXPECT_EQ(nlohmann::json::parse(fixed.out).at("horizon"), 10.0);
}
