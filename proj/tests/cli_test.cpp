// Copyright 2026 The MPAT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>
#include <unistd.h>

#include "mpat/eval.hpp"
#include "mpat/synth.hpp"
#include "mpat/textcore.hpp"
#include "mpat/util.hpp"

namespace fs = std::filesystem;

namespace mpat {
namespace {

const char* kSmallConfig =
    "synth_per_class = 30\n"
    "test_per_class = 10\n"
    "synth_vocab = 60\n"
    "epochs = 3\n"
    "batch_size = 16\n"
    "embed_dim = 8\n"
    "hidden_dim = 8\n";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mpat_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_file_atomic(dir_ / "small.cfg", kSmallConfig);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with `args`; stdout and stderr go to dir_/log.txt.
  int run(const std::string& args) {
    const std::string cmd = std::string(MPAT_CLI_PATH) + " --out " + (dir_ / "out").string() + " " + args + " > " +
                            (dir_ / "log.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string cfg(const std::string& name = "small.cfg") const { return "--config " + (dir_ / name).string(); }
  std::string out(const std::string& name) const { return read_file(dir_ / "out" / name); }
  std::string log() const { return read_file(dir_ / "log.txt"); }

  fs::path dir_;
};

std::string sha256_of(const fs::path& path) {
  std::string cmd = "sha256sum '" + path.string() + "'";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return {};
  char buf[128] = {};
  std::string s = std::fgets(buf, sizeof buf, pipe) ? buf : "";
  ::pclose(pipe);
  return s.substr(0, 64);
}

TEST_F(CliTest, SynthWritesDeterministicBalancedSplits) {
  ASSERT_EQ(run(cfg() + " synth"), 0) << log();
  auto train = parse_jsonl(out("train.jsonl"));
  auto test = parse_jsonl(out("test.jsonl"));
  EXPECT_EQ(train.size(), 60u);
  EXPECT_EQ(test.size(), 20u);
  const auto first = out("train.jsonl");
  ASSERT_EQ(run(cfg() + " synth"), 0);
  EXPECT_EQ(out("train.jsonl"), first);
  ASSERT_EQ(run(cfg() + " --seed 9 synth"), 0);
  EXPECT_NE(out("train.jsonl"), first);

  const auto& words = synth_words();
  for (const auto& ex : train.examples) {
    int pos = 0, neg = 0;
    for (const auto& w : ex.flat()) {
      pos += std::count(words.positive.begin(), words.positive.end(), w);
      neg += std::count(words.negative.begin(), words.negative.end(), w);
    }
    EXPECT_EQ(ex.label, pos > neg ? 1 : 0) << join(ex.flat());
  }
}

TEST_F(CliTest, RejectsUnknownKeysAndMissingFiles) {
  write_file_atomic(dir_ / "bad.cfg", "epochz = 3\n");
  EXPECT_EQ(run(cfg("bad.cfg") + " synth"), 1);
  EXPECT_NE(log().find("epochz"), std::string::npos);
  EXPECT_EQ(run(cfg() + " train --train " + (dir_ / "nope.jsonl").string()), 1);
  EXPECT_NE(log().find("missing training data file"), std::string::npos);
  write_file_atomic(dir_ / "lex.cfg", std::string(kSmallConfig) + "lexicon = " + (dir_ / "none.tsv").string() + "\n");
  ASSERT_EQ(run(cfg() + " synth"), 0);
  EXPECT_EQ(run(cfg("lex.cfg") + " train"), 1);
  EXPECT_NE(log().find("missing lexicon file"), std::string::npos);
}

TEST_F(CliTest, UntrainedModelIsAtChance) {
  ASSERT_EQ(run(cfg() + " synth"), 0) << log();
  ASSERT_EQ(run(cfg() + " eval --untrained"), 0) << log();
  auto r = EvalReport::from_json(out("report.json"));
  EXPECT_EQ(r.acc_test, 0.5);
  EXPECT_EQ(r.asr, 0.0);
}

TEST_F(CliTest, PipelineProducesConsistentArtifacts) {
  ASSERT_EQ(run(cfg() + " synth"), 0) << log();
  ASSERT_EQ(run(cfg() + " gen"), 0) << log();
  ASSERT_EQ(run(cfg() + " train"), 0) << log();
  ASSERT_EQ(run(cfg() + " attack"), 0) << log();
  ASSERT_EQ(run(cfg() + " eval"), 0) << log();

  auto pm = split(out("pm.jsonl"), '\n');
  EXPECT_EQ(pm.size(), 61u);  // trailing newline
  auto first = nlohmann::json::parse(pm[0]);
  EXPECT_TRUE(first["pristine"].back().get<bool>());

  auto history = split(out("history.csv"), '\n');
  EXPECT_EQ(history[0], "epoch,mean_loss,train_acc,mean_manifold_term");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "model.ckpt"));

  auto r = EvalReport::from_json(out("report.json"));
  EXPECT_EQ(r.counts.total, 20);
  long lines = 0;
  for (const auto& l : split(out("attack.jsonl"), '\n')) lines += !l.empty();
  EXPECT_EQ(r.counts.attacked, lines);
  EXPECT_EQ(r.counts.attacked, r.counts.correct);
  EXPECT_EQ(r.config_fingerprint.size(), 16u);

  auto m = nlohmann::json::parse(out("manifest-train.json"));
  EXPECT_EQ(m["command"], "train");
  EXPECT_EQ(m["config"]["epochs"], "3");
  EXPECT_EQ(m["config"]["mode"], "vanilla");
  ASSERT_FALSE(m["assets"].empty());
  for (const auto& [name, a] : m["assets"].items())
    EXPECT_EQ(a["sha256"].get<std::string>(), sha256_of(a["path"].get<std::string>())) << name;
}

TEST_F(CliTest, SweepWritesGridAndResumes) {
  write_file_atomic(dir_ / "sweep.cfg", std::string(kSmallConfig) +
                                            "synth_per_class = 10\ntest_per_class = 4\nk_steps = 3\n"
                                            "sweep_epsilons = 0.0005\nsweep_rates = 0.35\n");
  ASSERT_EQ(run(cfg("sweep.cfg") + " synth"), 0) << log();
  ASSERT_EQ(run(cfg("sweep.cfg") + " sweep"), 0) << log();
  auto rows = split(out("sweep.csv"), '\n');
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "epsilon,rate_r,asr,acc_adv,status");
  EXPECT_EQ(split(rows[1], ',').back(), "ok");
  const auto done = out("sweep.csv");

  write_file_atomic(dir_ / "grid.cfg", std::string(kSmallConfig) +
                                           "synth_per_class = 10\ntest_per_class = 4\nepochs = 3\n"
                                           "sweep_epsilons = 0.0005, 0.001\n");
  ASSERT_EQ(run(cfg("grid.cfg") + " sweep"), 0) << log();
  rows = split(out("sweep.csv"), '\n');
  EXPECT_EQ(rows.size(), 12u);  // header + 2 x 5 + trailing newline
  EXPECT_EQ(rows[3], split(done, '\n')[1]);
}

TEST_F(CliTest, SweepRecordsFailedCells) {
  write_file_atomic(dir_ / "bad.cfg", std::string(kSmallConfig) +
                                          "synth_per_class = 10\ntest_per_class = 4\nepochs = 4\n"
                                          "sweep_epsilons = 0.0005\nsweep_rates = 0.35\n");
  ASSERT_EQ(run(cfg("bad.cfg") + " synth"), 0) << log();
  ASSERT_EQ(run(cfg("bad.cfg") + " sweep"), 0) << log();
  auto rows = split(out("sweep.csv"), '\n');
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(split(rows[1], ',').back().rfind("error: ", 0), 0u) << rows[1];
}

TEST_F(CliTest, TTestCommand) {
  write_file_atomic(dir_ / "a.txt", "1 2 3 4 5\n");
  write_file_atomic(dir_ / "b.txt", "2\n3\n4\n5\n6\n");
  ASSERT_EQ(run("ttest " + (dir_ / "a.txt").string() + " " + (dir_ / "b.txt").string()), 0) << log();
  auto j = nlohmann::json::parse(out("ttest.json"));
  EXPECT_EQ(j["kind"], "welch");
  EXPECT_DOUBLE_EQ(j["t"].get<double>(), -1.0);
  EXPECT_NEAR(j["p"].get<double>(), 0.34659350708733416, 1e-12);
  write_file_atomic(dir_ / "c.txt", "1 two 3\n");
  EXPECT_EQ(run("ttest " + (dir_ / "a.txt").string() + " " + (dir_ / "c.txt").string()), 1);
  EXPECT_NE(log().find("not a number"), std::string::npos);
}

}  // namespace
}  // namespace mpat
