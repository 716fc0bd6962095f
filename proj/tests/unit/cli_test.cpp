// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

// Runs the glow binary named by GLOW_CLI (set by ctest).

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "glow/features/feature_set.hpp"
#include "glow/io/binary.hpp"

namespace glow {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const char* cli = std::getenv("GLOW_CLI");
    if (cli == nullptr) GTEST_SKIP() << "GLOW_CLI is not set";
    cli_ = cli;
    dir_ = fs::temp_directory_path() / ("glow_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    if (!dir_.empty()) fs::remove_all(dir_);
  }

  int run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = env + " '" + cli_ + "' " + args + " >>'" + (dir_ / "log.txt").string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  fs::path path(const std::string& name) const { return dir_ / name; }
  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }
  static std::size_t entries(const fs::path& manifest) {
    std::istringstream in(slurp(manifest));
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += !line.empty() && line[0] != '#';
    return n;
  }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  // Small f64 model trained through the CLI.
  static constexpr const char* kTinyTrain =
      "precision = f64\nlayers = 2\ndim = 8\nheads = 2\npoints = 32\ntrain_pairs = 8\nbatch = 4\n"
      "held_out_pairs = 2\nclassifier_pairs = 4\nwarmup_steps = 1\n";

  std::string cli_;
  fs::path dir_;
};

TEST_F(Cli, GenIsDeterministic) {
  ASSERT_EQ(run("gen --out " + path("x").string() + " --n 3 --points 32 --seed 4"), 0);
  ASSERT_EQ(run("gen --out " + path("y").string() + " --n 3 --points 32 --seed 4 --jobs 2"), 0);
  EXPECT_EQ(entries(path("x/manifest.txt")), 3u);
  for (const auto& e : fs::directory_iterator(path("x")))
    EXPECT_EQ(slurp(e.path()), slurp(path("y") / e.path().filename())) << e.path();
  ASSERT_EQ(run("gen --out " + path("z").string() + " --n 3 --points 32 --seed 5"), 0);
  EXPECT_NE(slurp(path("x/pair_00000_a.glfm")), slurp(path("z/pair_00000_a.glfm")));
}

TEST_F(Cli, GenZeroPairsWritesEmptyManifest) {
  ASSERT_EQ(run("gen --out " + path("x").string() + " --n 0"), 0);
  EXPECT_EQ(entries(path("x/manifest.txt")), 0u);
}

TEST_F(Cli, ConfigFileAndSeedOverride) {
  write("gen.cfg", "# comment\nn = 2   # trailing comment\npoints = 24\nseed = 1\n");
  ASSERT_EQ(run("gen --config " + path("gen.cfg").string() + " --out " + path("a").string(), "GLOW_SEED=9"), 0);
  ASSERT_EQ(run("gen --n 2 --points 24 --seed 9 --out " + path("b").string()), 0);
  EXPECT_EQ(slurp(path("a/pair_00001_b.glfm")), slurp(path("b/pair_00001_b.glfm")));
  EXPECT_NE(slurp(path("log.txt")).find("seed = 9"), std::string::npos);  // resolved config is logged
}

TEST_F(Cli, InputErrorsExitWithTwo) {
  write("bad.cfg", "n = 2\nsparkle = 3\n");
  EXPECT_EQ(run("gen --config " + path("bad.cfg").string() + " --out " + path("a").string()), 2);
  write("bad2.cfg", "n 2\n");
  EXPECT_EQ(run("gen --config " + path("bad2.cfg").string() + " --out " + path("a").string()), 2);
  EXPECT_EQ(run("gen --n two --out " + path("a").string()), 2);
  EXPECT_EQ(run("gen --no-such-flag 1"), 2);
  EXPECT_EQ(run("eval --manifest " + path("missing.txt").string() + " --matches x --out y"), 2);
}

TEST_F(Cli, TrainMatchEvalPipeline) {
  write("train.cfg", kTinyTrain);
  const std::string cfg = "--config " + path("train.cfg").string();
  ASSERT_EQ(run("train " + cfg + " --out " + path("m.glwt").string() + " --metrics " + path("m.csv").string()), 0);
  ASSERT_EQ(run("gen --out " + path("d").string() + " --n 3 --points 32"), 0);
  const std::string match = "match --weights " + path("m.glwt").string() + " --precision f64 --manifest " +
                            path("d/manifest.txt").string() + " --out-dir ";
  ASSERT_EQ(run(match + path("m1").string()), 0);
  ASSERT_EQ(run(match + path("m2").string() + " --jobs 3"), 0);
  for (const char* f : {"pair_00000.json", "pair_00001.txt", "pair_00002.json"})
    EXPECT_EQ(slurp(path("m1") / f), slurp(path("m2") / f)) << f;

  ASSERT_EQ(run("eval --manifest " + path("d/manifest.txt").string() + " --matches " + path("m1").string() +
                " --out " + path("report").string()),
            0);
  EXPECT_TRUE(fs::exists(path("report.json")));
  const std::string csv = slurp(path("report.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);

  // Ground truth missing.
  write("d/nogt.txt", "pair_00000 pair_00000_a.glfm pair_00000_b.glfm -\n");
  EXPECT_EQ(run("eval --manifest " + path("d/nogt.txt").string() + " --matches " + path("m1").string() +
                " --out " + path("r2").string()),
            2);

  // Refuses weights whose shape differs from the flags.
  EXPECT_EQ(run(match + path("m3").string() + " --layers 5"), 2);
  EXPECT_EQ(run(match + path("m3").string() + " --layers 2 --dim 8"), 0);
}

TEST_F(Cli, MatchEmptyFeatureFile) {
  write("train.cfg", kTinyTrain);
  ASSERT_EQ(run("train --config " + path("train.cfg").string() + " --out " + path("m.glwt").string()), 0);
  ASSERT_EQ(run("gen --out " + path("d").string() + " --n 1 --points 32"), 0);
  FeatureSet empty;
  empty.image_size = {640, 480};
  empty.descriptors = Matrix<float>(0, 10);
  write_features(empty, path("empty.glfm"));
  ASSERT_EQ(run("match --weights " + path("m.glwt").string() + " --a " + path("empty.glfm").string() + " --b " +
                path("d/pair_00000_b.glfm").string() + " --out " + path("e.txt").string()),
            0);
  std::istringstream in(slurp(path("e.txt")));
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) lines += line[0] != '#';
  EXPECT_EQ(lines, 0u);
}

TEST_F(Cli, DisabledAdaptivityMatchesDefaultWhenNothingTriggers) {
  write("train.cfg", kTinyTrain);
  ASSERT_EQ(run("train --config " + path("train.cfg").string() + " --out " + path("m.glwt").string()), 0);
  ASSERT_EQ(run("gen --out " + path("d").string() + " --n 1 --points 32"), 0);
  const std::string base = "match --weights " + path("m.glwt").string() + " --a " + path("d/pair_00000_a.glfm").string() +
                           " --b " + path("d/pair_00000_b.glfm").string();
  // alpha = 1 can never be exceeded and beta = 1e-300 prunes nothing.
  ASSERT_EQ(run(base + " --alpha 1 --beta 1e-300 --out " + path("x.txt").string() + " --json " + path("x.json").string()), 0);
  ASSERT_EQ(run(base + " --no-early-exit --no-pruning --out " + path("y.txt").string() + " --json " +
                path("y.json").string()),
            0);
  EXPECT_EQ(slurp(path("x.txt")), slurp(path("y.txt")));
  EXPECT_EQ(slurp(path("x.json")), slurp(path("y.json")));
  ASSERT_EQ(run(base + " --trace --out " + path("t.txt").string()), 0);
  EXPECT_TRUE(fs::exists(path("t.txt.trace.json")));
}

TEST_F(Cli, ResumedTrainingIsBitExact) {
  write("train.cfg", std::string(kTinyTrain) + "epochs = 2\n");
  const std::string cfg = "train --config " + path("train.cfg").string();
  ASSERT_EQ(run(cfg + " --out " + path("full.glwt").string() + " --metrics " + path("full.csv").string()), 0);
  for (int round = 0; round < 10 && !fs::exists(path("part.glwt")); ++round)
    ASSERT_EQ(run(cfg + " --resume --max-steps 1 --out " + path("part.glwt").string() + " --metrics " +
                  path("part.csv").string()),
              0);
  ASSERT_TRUE(fs::exists(path("part.glwt")));
  EXPECT_EQ(slurp(path("full.glwt")), slurp(path("part.glwt")));
  EXPECT_EQ(slurp(path("full.csv")), slurp(path("part.csv")));
}

TEST_F(Cli, ClassifierStageOnlyChangesClassifiers) {
  write("train.cfg", kTinyTrain);
  const std::string cfg = "train --config " + path("train.cfg").string();
  ASSERT_EQ(run(cfg + " --stages correspondence --out " + path("a.glwt").string()), 0);
  ASSERT_EQ(run(cfg + " --stages classifier --init " + path("a.glwt").string() + " --out " + path("b.glwt").string()),
            0);
  // The classifiers are serialized last; everything before them is unchanged.
  const std::string a = slurp(path("a.glwt")), b = slurp(path("b.glwt"));
  ASSERT_EQ(a.size(), b.size());
  const std::size_t classifier_bytes = 2 * (8 + 1) * sizeof(double);  // L=2 classifiers, weight d x 1 plus bias
  const std::size_t tail = classifier_bytes + 4 + 8;                    // section flag and checksum
  EXPECT_EQ(a.substr(0, a.size() - tail), b.substr(0, b.size() - tail));
  EXPECT_NE(a.substr(a.size() - tail), b.substr(b.size() - tail));
}

TEST_F(Cli, BenchReportsCounts) {
  ASSERT_EQ(run("bench --sizes 32,64,128 --layers 2 --dim 16 --heads 2 --out " + path("b.csv").string()), 0);
  std::istringstream in(slurp(path("b.csv")));
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> f;
    std::istringstream cells(line);
    for (std::string c; std::getline(cells, c, ',');) f.push_back(c);
    ASSERT_EQ(f.size(), 12u);
    EXPECT_EQ(std::stoull(f[7]), 2 * std::stoull(f[6]));                  // two-matrix cross similarity
    EXPECT_LE(std::stoull(f[4]) - std::stoull(f[5]), std::stoull(f[2]));  // adaptive network work never grows
  }
  EXPECT_EQ(rows, 3u);
}

}  // namespace
}  // namespace glow
