#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ocrd/cli.hpp"

namespace fs = std::filesystem;
using ocrd::cli::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ocrd");
  std::ostringstream out, err;
  const int code = ocrd::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / ("ocrd_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const std::string& name, const json& j) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << j.dump();
  return p.string();
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string* header = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell == "inf" ? std::numeric_limits<double>::infinity() : std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

const json kBitProblem = {{"mu", {0.5, 0.5}}, {"psi", {0.5, 0.5}}, {"rho", "hamming"}, {"d", 0.25}};

}  // namespace

TEST(Cli, RegionBscCurve) {
  const Result r = invoke({"region-bsc", "--d", "0.25", "--points", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::string header;
  const auto rows = parse_csv(r.out, &header);
  EXPECT_EQ(header, "rc,r_min");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_DOUBLE_EQ(rows[0][0], 0.0);
  EXPECT_NEAR(rows[0][1], 0.399124, 1e-5);
  EXPECT_NEAR(rows[1][0], 0.405639, 1e-5);
  EXPECT_NEAR(rows[2][0], 0.811278, 1e-5);
  EXPECT_NEAR(rows[2][1], 0.188722, 1e-5);
  EXPECT_EQ(invoke({"region-bsc", "--d", "0.6"}).code, 2);
}

TEST(Cli, RegionBscFromConfig) {
  const std::string cfg = write_config("bsc.json", {{"d", 0.05}, {"points", 2}, {"rc_max", 1.0}});
  const Result r = invoke({"region-bsc", "--config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[1][0], 1.0, 1e-12);
  EXPECT_NEAR(rows[1][1], 1.0 - (-0.05 * std::log2(0.05) - 0.95 * std::log2(0.95)), 1e-5);
  // Flags override config fields.
  const Result o = invoke({"region-bsc", "--config", cfg, "--points", "4"});
  EXPECT_EQ(parse_csv(o.out).size(), 4u);
}

TEST(Cli, RegionGauss) {
  const std::string cfg = write_config("g.json", {{"sigma_x", 1.0}, {"sigma_y", 1.0}, {"d", 0.8}, {"points", 4}});
  const Result r = invoke({"region-gauss", "--config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_NEAR(rows.front()[1], 0.661, 1e-3);
  EXPECT_TRUE(std::isinf(rows.back()[0]));
  EXPECT_NEAR(rows.back()[1], 0.321928, 1e-5);
  const Result zero = invoke({"region-gauss", "--config", cfg, "--d", "2"});
  for (const auto& row : parse_csv(zero.out)) EXPECT_EQ(row[1], 0.0);
  EXPECT_EQ(invoke({"region-gauss", "--config", cfg, "--d", "-1"}).code, 1);
}

TEST(Cli, ScalarCommands) {
  const Result m = invoke({"mmi", "--config", write_config("mmi.json", kBitProblem)});
  ASSERT_EQ(m.code, 0) << m.err;
  const json mj = json::parse(m.out);
  EXPECT_EQ(mj["status"], "ok");
  EXPECT_NEAR(mj["value_bits"].get<double>(), 0.188722, 1e-6);
  EXPECT_EQ(mj["witness"]["coupling"].size(), 2u);

  const Result w = invoke({"wyner", "--a0", "0.5"});
  ASSERT_EQ(w.code, 0) << w.err;
  EXPECT_NEAR(json::parse(w.out)["value_bits"].get<double>(), 0.0, 1e-12);

  const Result c = invoke({"c0", "--d", "0.25"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_NEAR(json::parse(c.out)["value_bits"].get<double>(), 0.609526, 1e-5);

  json zero = kBitProblem;
  zero["d"] = 0.0;
  zero["restarts"] = 4;
  const Result i = invoke({"i0", "--config", write_config("i0.json", zero)});
  ASSERT_EQ(i.code, 0) << i.err;
  const json ij = json::parse(i.out);
  EXPECT_EQ(ij["status"], "ok");
  EXPECT_NEAR(ij["value_bits"].get<double>(), 1.0, 1e-3);
  EXPECT_TRUE(ij["witness"].contains("triple"));

  const Result dd = invoke({"det-decoder", "--config", write_config("dd.json", kBitProblem), "--rc", "0.5"});
  EXPECT_NEAR(json::parse(dd.out)["value_bits"].get<double>(), 0.5, 1e-9);
  const Result em = invoke({"empirical", "--config", write_config("em.json", kBitProblem), "--rc", "0.5"});
  EXPECT_NEAR(json::parse(em.out)["value_bits"].get<double>(), 0.188722, 1e-6);
}

TEST(Cli, InfeasibleIsReportedNotFailed) {
  const json p = {{"mu", {1.0, 0.0}}, {"psi", {0.0, 1.0}}, {"rho", "hamming"}, {"d", 0.5}};
  const Result r = invoke({"mmi", "--config", write_config("inf.json", p)});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["status"], "infeasible");
  EXPECT_EQ(j["value_bits"], "inf");
}

TEST(Cli, Errors) {
  json bad = kBitProblem;
  bad["unexpected"] = 1;
  const Result u = invoke({"mmi", "--config", write_config("bad.json", bad)});
  EXPECT_EQ(u.code, 1);
  EXPECT_NE(u.err.find("unexpected"), std::string::npos);
  EXPECT_EQ(invoke({"mmi"}).code, 1);
  EXPECT_EQ(invoke({"no-such-command"}).code, 1);
  EXPECT_EQ(invoke({"mmi", "--config", "/nonexistent/file.json"}).code, 1);
  const std::string broken = (scratch() / "broken.json").string();
  std::ofstream(broken) << "{not json";
  EXPECT_EQ(invoke({"mmi", "--config", broken}).code, 1);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, SimulateExactCorrected) {
  const json cfg = {{"mmi_triple", kBitProblem}, {"n", 4}, {"rate", 1.0}, {"common_rate", 0.5}, {"trials", 5},
                    {"seed", 7}, {"correction", true}, {"mode", "exact"}};
  const std::string path = write_config("sim.json", cfg);
  const std::string records = (scratch() / "records.csv").string();
  const Result a = invoke({"simulate", "--config", path, "--records", records});
  ASSERT_EQ(a.code, 0) << a.err;
  const json j = json::parse(a.out);
  EXPECT_EQ(j["mode"], "exact");
  EXPECT_LE(j["tv_output_vs_iid"].get<double>(), 1e-12);
  EXPECT_EQ(j["codebook"]["rows"], 16);
  EXPECT_EQ(j["codebook"]["cols"], 4);
  EXPECT_EQ(j["trials"].size(), 5u);
  std::ifstream rf(records);
  std::string line;
  int lines = 0;
  while (std::getline(rf, line)) ++lines;
  EXPECT_EQ(lines, 6);

  // Same seed, same bytes; a different seed changes the trials.
  EXPECT_EQ(invoke({"simulate", "--config", path}).out, a.out);
  EXPECT_NE(invoke({"simulate", "--config", path, "--seed", "8"}).out, a.out);
  // The report round-trips through the JSON parser.
  EXPECT_EQ(json::parse(a.out).dump(2) + "\n", a.out);
}

TEST(Cli, SimulateCapAndMode) {
  json cfg = {{"mmi_triple", kBitProblem}, {"n", 40}, {"rate", 0.3}, {"trials", 2}, {"mode", "exact"}};
  EXPECT_EQ(invoke({"simulate", "--config", write_config("cap.json", cfg)}).code, 3);
  cfg["mode"] = "auto";
  const Result r = invoke({"simulate", "--config", write_config("mc.json", cfg)});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["mode"], "monte-carlo");
  EXPECT_TRUE(j["tv_is_estimate"].get<bool>());
  EXPECT_TRUE(j["tv_softcover"].is_null());
  cfg["mode"] = "fast";
  EXPECT_EQ(invoke({"simulate", "--config", write_config("badmode.json", cfg)}).code, 1);
}

TEST(Cli, SoftcoverCsv) {
  const json cfg = {{"p_v", {0.5, 0.5}}, {"w_given_v", {{0.9, 0.1}, {0.1, 0.9}}}, {"rate", 1.5},
                    {"n", {2, 4}}, {"num_codebooks", 8}, {"seed", 3}};
  const std::string out = (scratch() / "soft.csv").string();
  const Result r = invoke({"softcover", "--config", write_config("soft.json", cfg), "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(out);
  std::stringstream ss;
  ss << f.rdbuf();
  std::string header;
  const auto rows = parse_csv(ss.str(), &header);
  EXPECT_EQ(header, "n,mean_tv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GT(rows[0][1], rows[1][1]);
}

TEST(Cli, SynthesisGrid) {
  const Result r = invoke({"synthesis-bsc", "--points", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::string header;
  const auto rows = parse_csv(r.out, &header);
  EXPECT_EQ(header, "d,r_sum");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0][1], 1.0, 1e-9);
  EXPECT_NEAR(rows[2][1], 0.0, 1e-9);
}
