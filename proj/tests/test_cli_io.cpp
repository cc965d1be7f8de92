#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dpnls/experiment.hpp"
#include "support.hpp"

using namespace dpnls;
using support::kind_of;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("dpnls_cli_io_" + name);
  fs::remove_all(d);
  return d;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

json parse(const char* text) { return json::parse(text); }

}  // namespace

TEST(Config, DefaultsFromEmptyObject) {
  const auto c = parse_config(json::object());
  EXPECT_EQ(c.params.N(), 1);
  EXPECT_EQ(c.params.q(), 7.0);
  EXPECT_EQ(c.grid.kind, "periodic");
  EXPECT_DOUBLE_EQ(c.evolution.record_every, 1e-3);
  EXPECT_DOUBLE_EQ(c.evolution.t_max, 20.0);
}

TEST(Config, RadialDefaultsInHigherDimension) {
  const auto c = parse_config(parse(R"({"params": {"N": 2, "p": 2, "q": 4, "omega": 4}})"));
  EXPECT_EQ(c.grid.kind, "radial");
  EXPECT_DOUBLE_EQ(c.grid.extent, 10.0);
  EXPECT_DOUBLE_EQ(c.evolution.record_every, 2.5e-4);
}

TEST(Config, RejectsMalformedInput) {
  auto k = [](const char* text) { return kind_of([&] { parse_config(json::parse(text)); }); };
  EXPECT_EQ(k(R"({"parms": {}})"), ErrorKind::validation);
  EXPECT_EQ(k(R"({"params": {"p": 6}})"), ErrorKind::validation);
  EXPECT_EQ(k(R"({"params": {"omega": -1}})"), ErrorKind::validation);
  EXPECT_EQ(k(R"({"params": {"N": "one"}})"), ErrorKind::validation);
  EXPECT_EQ(k(R"({"evolution": {"dt": 0}})"), ErrorKind::validation);
  EXPECT_EQ(k(R"({"evolution": {"grid": {"kind": "spherical"}}})"), ErrorKind::validation);
  EXPECT_EQ(k(R"({"params": {"N": 2, "p": 2, "q": 4}, "evolution": {"grid": {"kind": "periodic"}}})"),
            ErrorKind::validation);
  EXPECT_EQ(k(R"({"sweep": {"omegas": [1, 0]}})"), ErrorKind::validation);
  EXPECT_EQ(k(R"({"lemma": {"pairs": 0}})"), ErrorKind::validation);
}

TEST(Config, MissingOrBrokenFile) {
  const auto d = scratch_dir("broken");
  fs::create_directories(d);
  std::ofstream(d / "bad.json") << "{ not json";
  EXPECT_EQ(kind_of([&] { load_config(d / "bad.json"); }), ErrorKind::validation);
  EXPECT_EQ(kind_of([&] { load_config(d / "absent.json"); }), ErrorKind::validation);
}

TEST(Config, ShippedConfigsParse) {
  for (const char* name : {"groundstate", "classify", "blowup", "verify_lemma"})
    EXPECT_NO_THROW(load_config(fs::path(DPNLS_CONFIG_DIR) / (std::string(name) + ".json"))) << name;
}

TEST(Format, RoundTripsAndSpecials) {
  EXPECT_EQ(fmt(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(fmt(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(fmt(std::nan("")), "nan");
  EXPECT_EQ(fmt(INFINITY), "inf");
  EXPECT_EQ(fmt(-INFINITY), "-inf");
}

TEST(Commands, GroundstateWritesProfileAndCertificate) {
  const auto d = scratch_dir("gs") / "nested" / "deeper";
  auto cfg = parse_config(json::object());
  ASSERT_EQ(cmd_groundstate(cfg, {d, false}), 0);
  const auto prof = read_csv(d / "profile.csv");
  ASSERT_GT(prof.size(), 1000u);
  EXPECT_EQ(prof[0], (std::vector<std::string>{"r", "phi"}));
  EXPECT_NEAR(std::stod(prof[1][1]), 1.0860520565, 1e-6);
  const auto cert = json::parse(slurp(d / "certification.json"));
  EXPECT_TRUE(cert.contains("residual"));
  const auto summary = json::parse(slurp(d / "summary.json"));
  EXPECT_FALSE(summary.contains("generated_at"));
}

TEST(Commands, TimestampOnlyWhenRequested) {
  const auto d = scratch_dir("ts");
  auto cfg = parse_config(parse(R"({"sweep": {"omegas": [2]}})"));
  ASSERT_EQ(cmd_classify(cfg, {d, true}), 0);
  EXPECT_TRUE(json::parse(slurp(d / "summary.json")).contains("generated_at"));
}

TEST(Commands, ClassifySweep) {
  const auto d = scratch_dir("classify");
  auto cfg = load_config(fs::path(DPNLS_CONFIG_DIR) / "classify.json");
  ASSERT_EQ(cmd_classify(cfg, {d, false}), 0);
  const auto rows = read_csv(d / "classify.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"omega", "d2s", "energy", "criterion_met", "status"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double d2s = std::stod(rows[i][1]), energy = std::stod(rows[i][2]);
    if (energy > 0) EXPECT_LT(d2s, 0.0);
    EXPECT_EQ(rows[i][3], d2s <= 0 ? "true" : "false");
    EXPECT_EQ(rows[i][4], "ok");
  }
  EXPECT_EQ(rows[1][3], "false");  // ω = 0.1
  EXPECT_EQ(rows[4][3], "true");   // ω = 50
}

TEST(Commands, ClassifyNeedsSweep) {
  EXPECT_EQ(kind_of([] { cmd_classify(parse_config(json::object()), {scratch_dir("empty"), false}); }),
            ErrorKind::validation);
}

TEST(Commands, BlowupRejectsUnscaledData) {
  const auto d = scratch_dir("blowup");
  auto cfg = parse_config(parse(R"({"sweep": {"lambdas": [1.0]}})"));
  EXPECT_EQ(cmd_blowup(cfg, {d, false}), 1);
  const auto v = json::parse(slurp(d / "verdict_lambda_1.json"));
  EXPECT_EQ(v["outcome"], "error");
  EXPECT_EQ(v["error"], "precondition");
  EXPECT_FALSE(fs::exists(d / "trace_lambda_1.csv"));
}

TEST(Commands, BlowupWritesTraceAndVerdict) {
  const auto d = scratch_dir("blowup_run");
  auto cfg = parse_config(parse(R"({"sweep": {"lambdas": [2.0]}, "evolution": {"record_every": 0.002}})"));
  ASSERT_EQ(cmd_blowup(cfg, {d, false}), 0);
  const auto trace = read_csv(d / "trace_lambda_2.csv");
  EXPECT_EQ(trace[0], (std::vector<std::string>{"t", "mass", "energy", "action", "nehari", "virial_q",
                                                 "grad_norm_sq", "variance", "sup_amp"}));
  EXPECT_GE(trace.size(), 6u);
  const auto v = json::parse(slurp(d / "verdict_lambda_2.json"));
  EXPECT_EQ(v["outcome"], "blowup");
  EXPECT_EQ(v["b_omega_invariance_audit"], true);
  EXPECT_EQ(v["concavity_audit"], true);
}

TEST(Commands, VerifyLemmaIsDeterministic) {
  const auto a = scratch_dir("lemma_a"), b = scratch_dir("lemma_b");
  auto cfg = parse_config(parse(R"({"lemma": {"pairs": 8, "lambda_points": 500, "per_family": 10}, "seed": 7})"));
  ASSERT_EQ(cmd_verify_lemma(cfg, {a, false}), 0);
  ASSERT_EQ(cmd_verify_lemma(cfg, {b, false}), 0);
  for (const char* f : {"sign_suite.csv", "key_estimate.csv", "summary.json"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_EQ(read_csv(a / "sign_suite.csv").size(), 9u);
  EXPECT_EQ(read_csv(a / "key_estimate.csv").size(), 31u);
  cfg.seed = 8;
  const auto c = scratch_dir("lemma_c");
  ASSERT_EQ(cmd_verify_lemma(cfg, {c, false}), 0);
  EXPECT_NE(slurp(a / "sign_suite.csv"), slurp(c / "sign_suite.csv"));
}

TEST(Commands, VerifyLemmaNeedsCriterionFrequency) {
  auto cfg = parse_config(parse(R"({"params": {"omega": 0.1}, "lemma": {"pairs": 1, "lambda_points": 10}})"));
  EXPECT_EQ(kind_of([&] { cmd_verify_lemma(cfg, {scratch_dir("lemma_bad"), false}); }), ErrorKind::precondition);
}
