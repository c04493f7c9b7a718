#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

const fs::path kSource = INCSTAB_SOURCE_DIR;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string Quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("incstab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Runs the CLI with stdout and stderr captured; returns the exit status.
  int Run(const std::vector<std::string>& args) {
    std::string cmd = Quote(INCSTAB_CLI_PATH);
    for (const auto& a : args) cmd += " " + Quote(a);
    cmd += " >" + Quote((dir_ / "stdout.txt").string()) + " 2>" + Quote((dir_ / "stderr.txt").string());
    const int status = std::system(cmd.c_str());
    stdout_ = Slurp(dir_ / "stdout.txt");
    stderr_ = Slurp(dir_ / "stderr.txt");
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  int RunConfig(const std::string& name, const fs::path& out) {
    return Run({"run", (kSource / "configs" / name).string(), "--out-dir", out.string()});
  }

  fs::path dir_;
  std::string stdout_;
  std::string stderr_;
};

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(RunConfig("small_gain.json", dir_ / "a"), 0) << stderr_;
  EXPECT_TRUE(fs::exists(dir_ / "a/out/small_gain/certificate.json"));
  EXPECT_EQ(RunConfig("iqc_falsified.json", dir_ / "b"), 1) << stderr_;
  EXPECT_NE(Slurp(dir_ / "b/out/iqc_falsified/certificate.json").find("\"refused\""), std::string::npos);
  EXPECT_EQ(Run({"run", (dir_ / "missing.json").string()}), 2);
  EXPECT_EQ(Run({"validate", (kSource / "configs/srg_certification.json").string()}), 0) << stderr_;
  EXPECT_EQ(Run({"frobnicate"}), 2);
}

TEST_F(Cli, ConfigErrorsNameTheOffendingPath) {
  const fs::path cfg = dir_ / "bad.json";
  std::ofstream(cfg) << R"({"job": "small_gain", "seed": 1,
    "systems": {"h1": {"node": {"type": "lti", "A": [[-1, 0]], "B": [[1]], "C": [[1]]}},
                "h2": {"node": {"type": "static", "kind": "tanh"}}},
    "parameters": {"h1": "h1", "h2": "h2"}})";
  EXPECT_EQ(Run({"validate", cfg.string()}), 2);
  EXPECT_NE(stderr_.find("systems.h1.node.A"), std::string::npos) << stderr_;

  std::ofstream(cfg) << R"({"job": "small_gain", "seed": 1, "bogus": 3, "systems": {}, "parameters": {}})";
  EXPECT_EQ(Run({"validate", cfg.string()}), 2);
  EXPECT_NE(stderr_.find("bogus"), std::string::npos) << stderr_;
}

TEST_F(Cli, RerunsAreByteIdentical) {
  for (const std::string name : {"srg_certification.json", "iqc_certification.json", "srg_sample.json",
                                 "arctan_experiment.json", "simulate.json"}) {
    const int first = RunConfig(name, dir_ / "one");
    const int second = RunConfig(name, dir_ / "two");
    EXPECT_EQ(first, second) << name;
  }
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir_ / "one")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), dir_ / "one");
    EXPECT_EQ(Slurp(entry.path()), Slurp(dir_ / "two" / rel)) << rel;
    ++files;
  }
  EXPECT_GE(files, 8u);
}

TEST_F(Cli, PlotDrawsRegionsAndCloud) {
  const fs::path empty = dir_ / "empty.csv";
  std::ofstream(empty) << "re,im\n";
  EXPECT_EQ(Run({"plot", empty.string(), R"({"disc":{"re":0,"im":0,"r":1}})", (dir_ / "e.svg").string()}), 0)
      << stderr_;
  const std::string svg = Slurp(dir_ / "e.svg");
  const std::regex circle("<circle");
  EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), circle), std::sregex_iterator()), 1);

  EXPECT_EQ(Run({"plot", empty.string(), "{\"disc\":", (dir_ / "f.svg").string()}), 2);
  EXPECT_FALSE(fs::exists(dir_ / "f.svg"));
}

TEST_F(Cli, SampledCloudIsMirrorSymmetric) {
  ASSERT_EQ(RunConfig("srg_sample.json", dir_), 0) << stderr_;
  const std::string svg = Slurp(dir_ / "out/srg_sample/cloud.svg");
  const std::regex point(R"re(<circle cx="([-0-9.]+)" cy="([-0-9.]+)")re");
  std::multiset<std::pair<long, long>> points;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), point); it != std::sregex_iterator(); ++it) {
    points.emplace(std::lround(std::stod((*it)[1]) * 1e6), std::lround(std::stod((*it)[2]) * 1e6));
  }
  ASSERT_GT(points.size(), 100u);
  for (const auto& [x, y] : points) {
    EXPECT_EQ(points.count({x, -y}), points.count({x, y})) << x << "," << y;
  }
}

}  // namespace
