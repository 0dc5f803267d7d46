#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cli_app.hpp"

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "bargmann_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = bargmann::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string field(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  return "";
}

struct Csv {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

Csv parse_csv(const std::string& text) {
  Csv c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("#", 0) == 0) {
      c.comments.push_back(line);
    } else if (c.header.empty()) {
      c.header = split(line);
    } else {
      std::vector<double> r;
      for (const auto& v : split(line)) r.push_back(std::stod(v));
      c.rows.push_back(r);
    }
  }
  return c;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("bargmann_cli_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(CliNorm, PTwoIsOneInAnyDimension) {
  const CliRun r = run({"norm", "--p", "2", "--n", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(std::stod(field(r.out, "closed_form_norm")), 1.0);
  EXPECT_NEAR(std::stod(field(r.out, "optimized_norm")), 1.0, 1e-12);
}

TEST(CliNorm, POneEndpoint) {
  const CliRun r = run({"norm", "--p", "1", "--n", "2", "--alpha", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(std::stod(field(r.out, "closed_form_norm")), 4.0);
  EXPECT_GT(std::stod(field(r.out, "optimized_norm")), 4.0 - 1e-4);
}

TEST(CliNorm, PFour) {
  const CliRun r = run({"norm", "--p", "4", "--budget", "7000"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(field(r.out, "closed_form_norm")), 2.0 * std::pow(4.0, -0.25) * std::pow(4.0 / 3.0, -0.75), 1e-15);
  EXPECT_NEAR(std::stod(field(r.out, "optimized_norm")), std::stod(field(r.out, "closed_form_norm")), 1e-9);
  EXPECT_EQ(field(r.out, "samples_checked"), "7000");
}

TEST(CliNorm, UsageErrors) {
  EXPECT_EQ(run({"norm", "--p", "0.5"}).code, 2);
  EXPECT_EQ(run({"norm", "--p", "3", "--n", "0"}).code, 2);
  EXPECT_EQ(run({"norm", "--p", "3", "--alpha", "-1"}).code, 2);
  EXPECT_EQ(run({"norm"}).code, 2);
  EXPECT_EQ(run({"norm", "--p", "abc"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"norm", "--p", "3", "--format", "xml"}).code, 2);
}

TEST(CliNorm, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST(CliSweep, TableShapeAndValues) {
  const CliRun r = run({"sweep", "--p-min", "1.1", "--p-max", "10", "--steps", "20"});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(r.out.rfind("# schema=1\n", 0), 0u);
  const Csv c = parse_csv(r.out);
  const std::vector<std::string> cols = {"p", "p_conjugate", "j_p", "sharp_norm", "critical_a", "optimizer_norm",
                                         "abs_rel_gap"};
  EXPECT_EQ(c.header, cols);
  ASSERT_EQ(c.rows.size(), 20u);
  std::size_t argmin = 0;
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    if (i) EXPECT_GT(c.rows[i][0], c.rows[i - 1][0]);
    EXPECT_LT(c.rows[i][6], 1e-8);
    if (c.rows[i][2] < c.rows[argmin][2]) argmin = i;
  }
  EXPECT_NEAR(c.rows[argmin][0], 2.0, 0.5);
}

TEST(CliSweep, Deterministic) {
  const auto a = run({"sweep", "--p-min", "1.5", "--p-max", "4", "--steps", "4", "--seed", "7"});
  const auto b = run({"sweep", "--p-min", "1.5", "--p-max", "4", "--steps", "4", "--seed", "7"});
  EXPECT_EQ(a.out, b.out);
}

TEST(CliSweep, Preconditions) {
  EXPECT_EQ(run({"sweep", "--p-min", "1", "--p-max", "3"}).code, 2);
  EXPECT_EQ(run({"sweep", "--p-min", "3", "--p-max", "2"}).code, 2);
  EXPECT_EQ(run({"sweep", "--steps", "1"}).code, 2);
}

TEST(CliSweep, JsonOutputToFileWithManifest) {
  const auto path = temp_path("sweep.json");
  const CliRun r = run({"sweep", "--p-min", "1.5", "--p-max", "3", "--steps", "3", "--format", "json", "--out",
                     path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(path));
  ASSERT_TRUE(j.contains("manifest"));
  ASSERT_EQ(j["rows"].size(), 3u);
  EXPECT_EQ(j["manifest"]["command"], "sweep");
  EXPECT_FALSE(j["manifest"].contains("started_at"));
  EXPECT_NEAR(j["rows"][2]["p"].get<double>(), 3.0, 0.0);
  const auto side = nlohmann::json::parse(slurp(path.string() + ".manifest.json"));
  EXPECT_TRUE(side.contains("started_at"));
  EXPECT_EQ(side["run_id"], j["manifest"]["run_id"]);

  const auto first = slurp(path);
  ASSERT_EQ(run({"sweep", "--p-min", "1.5", "--p-max", "3", "--steps", "3", "--format", "json", "--out",
                 path.string()})
                .code,
            0);
  EXPECT_EQ(slurp(path), first);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".manifest.json");
}

TEST(CliSweep, UnwritableOutputIsIoError) {
  const CliRun r = run({"sweep", "--steps", "2", "--out", "/nonexistent-dir/x/out.csv"});
  EXPECT_EQ(r.code, 3);
}

TEST(CliVerify, HpSuitePasses) {
  const CliRun r = run({"verify", "--suite", "hp", "--budget", "1000"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("PASS hp/tau-identities"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(CliVerify, UnknownSuiteIsUsage) { EXPECT_EQ(run({"verify", "--suite", "bogus"}).code, 2); }

TEST(CliPlot, RatioVsCPeaksAtHalf) {
  const CliRun r = run({"plotdata", "--kind", "ratio-vs-c", "--p", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Csv c = parse_csv(r.out);
  std::size_t best = 0;
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    EXPECT_GT(c.rows[i][0], 0.0);
    EXPECT_LE(c.rows[i][0], 5.0);
    if (c.rows[i][1] > c.rows[best][1]) best = i;
  }
  EXPECT_NEAR(c.rows[best][0], 0.5, 1e-12);
}

TEST(CliPlot, NormVsPMinimumAtTwo) {
  const CliRun r = run({"plotdata", "--kind", "norm-vs-p", "--p-min", "1.1", "--p-max", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Csv c = parse_csv(r.out);
  std::size_t best = 0;
  for (std::size_t i = 0; i < c.rows.size(); ++i)
    if (c.rows[i][2] < c.rows[best][2]) best = i;
  EXPECT_EQ(c.rows[best][0], 2.0);
  EXPECT_EQ(c.rows[best][2], 1.0);
  EXPECT_GT(c.rows.front()[2], 1.0);
  EXPECT_GT(c.rows.back()[2], 1.0);
}

TEST(CliPlot, HpSlicePeak) {
  const CliRun r = run({"plotdata", "--kind", "hp-slice", "--p", "3", "--fixed", "b=0,e=0,g=0,f=0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Csv c = parse_csv(r.out);
  EXPECT_EQ(c.header, (std::vector<std::string>{"a", "d", "h_p"}));
  std::size_t best = 0;
  for (std::size_t i = 0; i < c.rows.size(); ++i)
    if (c.rows[i][2] > c.rows[best][2]) best = i;
  EXPECT_NEAR(c.rows[best][0], 0.5, 1e-12);
  EXPECT_NEAR(c.rows[best][1], 0.5, 1e-12);
}

TEST(CliPlot, BadKindAndAxes) {
  EXPECT_EQ(run({"plotdata", "--kind", "nope"}).code, 2);
  EXPECT_EQ(run({"plotdata", "--kind", "hp-slice", "--axes", "a,a"}).code, 2);
  EXPECT_EQ(run({"plotdata", "--kind", "hp-slice", "--fixed", "q=1"}).code, 2);
}
