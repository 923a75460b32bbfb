#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "rebalance/serialize.hpp"

namespace fs = std::filesystem;
using rebalance::Json;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("rebalance_cli_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(REBALANCE_CLI) + " " + args + " > " +
                          (workdir() / "last.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

// Two-class counts of a CSV whose last column is the label.
std::map<std::string, int> label_counts(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::map<std::string, int> counts;
  while (std::getline(in, line)) ++counts[line.substr(line.rfind(',') + 1)];
  return counts;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ASSERT_EQ(run("gen-synth --n 600 --d 5 --imbalance 0.9 --clusters 3 --seed 4 -o " +
                  path("synth.csv")),
              0);
  }
};

}  // namespace

TEST_F(Cli, GenSynthCounts) {
  const auto counts = label_counts(path("synth.csv"));
  EXPECT_EQ(counts.at("0") + counts.at("1"), 600);
  EXPECT_EQ(counts.at("0"), 540);
}

TEST_F(Cli, IngestWritesReport) {
  ASSERT_EQ(run("ingest -i " + path("synth.csv") + " -o " + path("ingest")), 0);
  const Json r = Json::parse(slurp(path("ingest/preprocess_report.json")));
  EXPECT_EQ(r.at("schema_version"), 1);
  EXPECT_EQ(r.at("rows"), 600);
  EXPECT_TRUE(fs::exists(path("ingest/clean.csv")));
  EXPECT_TRUE(fs::exists(path("ingest/manifest.json")));
}

TEST_F(Cli, EveryMethodBalances) {
  for (const std::string method : {"random", "mi", "support_points"}) {
    const std::string out = path("us_" + method);
    ASSERT_EQ(run("undersample -i " + path("synth.csv") + " -m " + method +
                  " --seed 1 --set support_points.max_iter=50 -o " + out),
              0)
        << slurp(path("last.log"));
    const auto counts = label_counts(fs::path(out) / "balanced.csv");
    EXPECT_EQ(counts.at("0"), 60) << method;
    EXPECT_EQ(counts.at("1"), 60) << method;
    const Json report = Json::parse(slurp(fs::path(out) / "report.json"));
    EXPECT_EQ(report.at("method"), method);
    EXPECT_TRUE(report.contains("config_hash"));
    EXPECT_EQ(report.at("seed"), 1);
  }
  EXPECT_TRUE(fs::exists(path("us_mi/strata.csv")));
  EXPECT_TRUE(fs::exists(path("us_support_points/energy_trace.csv")));
  EXPECT_TRUE(fs::exists(path("us_support_points/support_points.json")));
}

TEST_F(Cli, NeymanEqualsOptimalUnderUniformCosts) {
  ASSERT_EQ(run("undersample -i " + path("synth.csv") + " -m mi --set mi.allocation=neyman -o " +
                path("ney")),
            0);
  ASSERT_EQ(run("undersample -i " + path("synth.csv") +
                " -m mi --set mi.allocation=optimal --set mi.cost_model=uniform -o " + path("opt")),
            0);
  const Json a = Json::parse(slurp(path("ney/report.json")));
  const Json b = Json::parse(slurp(path("opt/report.json")));
  EXPECT_EQ(a.at("allocation").at("quotas"), b.at("allocation").at("quotas"));
  EXPECT_EQ(slurp(path("ney/balanced.csv")), slurp(path("opt/balanced.csv")));
}

TEST_F(Cli, ManifestReplayIsByteIdentical) {
  ASSERT_EQ(run("undersample -i " + path("synth.csv") + " -m mi --seed 9 -o " + path("first")), 0);
  ASSERT_EQ(run("undersample --manifest " + path("first/manifest.json") + " -o " + path("first")),
            0);
  const std::string before = slurp(path("first/balanced.csv"));
  ASSERT_EQ(run("undersample --manifest " + path("first/manifest.json") + " -o " + path("replay")),
            0);
  EXPECT_EQ(slurp(path("replay/balanced.csv")), before);
  EXPECT_EQ(slurp(path("replay/strata.csv")), slurp(path("first/strata.csv")));
  const Json m1 = Json::parse(slurp(path("first/manifest.json")));
  const Json m2 = Json::parse(slurp(path("replay/manifest.json")));
  EXPECT_EQ(m1.at("outputs").at("balanced.csv"), m2.at("outputs").at("balanced.csv"));
  EXPECT_EQ(m1.at("seed"), 9);
}

TEST_F(Cli, BackendsGiveIdenticalOutput) {
  const std::string common = "undersample -i " + path("synth.csv") +
                             " -m support_points --set support_points.max_iter=30 ";
  ASSERT_EQ(run(common + "--backend serial -o " + path("b_serial")), 0);
  ASSERT_EQ(run(common + "--backend parallel -o " + path("b_par")), 0);
  EXPECT_EQ(slurp(path("b_serial/balanced.csv")), slurp(path("b_par/balanced.csv")));
  EXPECT_EQ(slurp(path("b_serial/energy_trace.csv")), slurp(path("b_par/energy_trace.csv")));
}

TEST_F(Cli, ValidateSelfHasNoFlags) {
  ASSERT_EQ(run("validate --original " + path("synth.csv") + " --subset " + path("synth.csv") +
                " -o " + path("val")),
            0);
  const Json v = Json::parse(slurp(path("val/validation.json")));
  EXPECT_EQ(v.at("flagged"), 0);
  EXPECT_TRUE(fs::exists(path("val/validation.txt")));
}

TEST_F(Cli, BenchSingleRow) {
  ASSERT_EQ(run("bench -i " + path("synth.csv") + " --methods random --seeds 2 -o " + path("bench")),
            0);
  const Json b = Json::parse(slurp(path("bench/bench.json")));
  EXPECT_EQ(b.at("rows").size(), 1u);
  EXPECT_EQ(b.at("aggregates").size(), 1u);
  EXPECT_NE(slurp(path("bench/bench.txt")).find("random"), std::string::npos);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("undersample --bogus-flag"), 2);
  EXPECT_EQ(run("undersample -i " + path("synth.csv") + " -m smote -o " + path("x")), 2);
  EXPECT_EQ(run("undersample -i " + path("synth.csv") + " --set nope=1 -o " + path("x")), 2);
  EXPECT_EQ(run("undersample -i " + path("missing.csv") + " -o " + path("x")), 3);
  EXPECT_EQ(run("validate --original " + path("missing.csv") + " --subset " + path("synth.csv")),
            3);
  EXPECT_EQ(run("undersample -i " + path("synth.csv") +
                " -m mi --set mi.memory_budget_bytes=1 -o " + path("x")),
            4);
  EXPECT_EQ(run("gen-synth --imbalance 0.3 -o " + path("bad.csv")), 2);
}
