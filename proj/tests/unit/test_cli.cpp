// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aladin/autodiff/checkpoint.hpp"
#include "aladin/cli/commands.hpp"
#include "aladin/datagen/io.hpp"
#include "aladin/retrieval/store.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "aladin");
  std::ostringstream out, err;
  const int code = aladin::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs each test inside a fresh directory so relative paths stay short and
// identical between repeated runs.
class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    prev_ = fs::current_path();
    root_ = fs::temp_directory_path() /
            ("aladin_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    fs::current_path(root_);
  }
  void TearDown() override {
    fs::current_path(prev_);
    fs::remove_all(root_);
  }
  void enter(const std::string& sub) {
    fs::create_directories(root_ / sub);
    fs::current_path(root_ / sub);
  }

  fs::path prev_, root_;
};

const std::vector<std::string> kTinyModel = {"--style-channels", "4",  "8", "--content-channels",
                                             "4",                "8",  "--projection-hidden", "8",
                                             "--projection-out", "4"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void small_corpus(const std::string& dir = "d", const std::string& contamination = "0.2") {
  const CliRun r = cli({"datagen", "--out", dir, "--seed", "7", "--groups", "12", "--images-per-group",
                     "4", "--size", "16", "--contamination", contamination, "--test-fraction", "0.25"});
  ASSERT_EQ(r.code, 0) << r.err;
}

}  // namespace

TEST_F(CliTest, HelpDocumentsEveryTrainFlag) {
  const CliRun r = cli({"train", "--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--loss", "--chunk-size", "--use-projection", "--augment", "--hard-negatives",
                           "--seed", "--partition", "--init", "--dtype"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
}

TEST_F(CliTest, SeedIsMandatory) {
  const CliRun r = cli({"datagen", "--out", "d"});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(fs::exists("d/manifest.json"));
}

TEST_F(CliTest, UnknownLossKindIsAUsageError) {
  small_corpus();
  const CliRun r = cli({"train", "--data", "d", "--seed", "1", "--out", "m.ckpt", "--loss", "hinge"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists("m.ckpt"));
}

TEST_F(CliTest, NoSubcommandFails) { EXPECT_NE(cli({}).code, 0); }

TEST_F(CliTest, DataRootFromEnvironment) {
  ::setenv("ALADIN_DATA_ROOT", (root_ / "envdata").c_str(), 1);
  const CliRun r = cli({"datagen", "--seed", "3", "--groups", "4", "--images-per-group", "2", "--size", "8"});
  ::unsetenv("ALADIN_DATA_ROOT");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(root_ / "envdata" / "manifest.json"));
}

TEST_F(CliTest, MissingDataRootIsAUsageError) {
  ::unsetenv("ALADIN_DATA_ROOT");
  EXPECT_EQ(cli({"datagen", "--seed", "3"}).code, 2);
}

TEST_F(CliTest, ConfigFileSuppliesOptionsAndFlagsWin) {
  std::ofstream("run.toml") << "[datagen]\ngroups = 5\nimages-per-group = 3\nsize = 8\nseed = 4\n";
  ASSERT_EQ(cli({"--config", "run.toml", "datagen", "--out", "a"}).code, 0);
  ASSERT_EQ(cli({"--config", "run.toml", "datagen", "--out", "b", "--groups", "6"}).code, 0);
  EXPECT_EQ(aladin::load_corpus("a").styles.size(), 5u);
  EXPECT_EQ(aladin::load_corpus("b").styles.size(), 6u);
  EXPECT_EQ(aladin::load_corpus("a").seed, 4u);
}

TEST_F(CliTest, IdentityFixtureScoresPerfectly) {
  small_corpus();
  ASSERT_EQ(cli({"embed", "--data", "d", "--fixture", "identity", "--split", "all", "--out", "id.emb",
                 "--seed", "1"})
                .code,
            0);
  const CliRun r = cli({"eval", "--embeddings", "id.emb", "--out", "r.json", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = json::parse(slurp("r.json"));
  EXPECT_EQ(rep["retrieval"]["ir_top_k"]["1"].get<double>(), 1.0);
  EXPECT_EQ(rep["retrieval"]["map"].get<double>(), 1.0);
  EXPECT_GT(rep["retrieval"]["queries"].get<int>(), 0);
}

TEST_F(CliTest, CleanAddsATrainablePartition) {
  small_corpus("d", "0.3");
  const CliRun c = cli({"clean", "--data", "d", "--seed", "5", "--consensus-level", "3", "--votes",
                     "v.jsonl", "--stats", "s.csv"});
  ASSERT_EQ(c.code, 0) << c.err;
  const aladin::Corpus corpus = aladin::load_corpus("d");
  ASSERT_TRUE(corpus.partitions.count("consensus_c3"));
  EXPECT_EQ(corpus.partition_tags.at("consensus_c3")["level"], 3);
  EXPECT_EQ(slurp("s.csv").substr(0, 31), "level,groups,images,singletons\n");
  // 12 projects, 5 workers each.
  std::ifstream votes("v.jsonl");
  std::size_t lines = 0;
  for (std::string l; std::getline(votes, l);) ++lines;
  EXPECT_EQ(lines, 60u);

  const CliRun t = cli(with({"train", "--data", "d", "--partition", "consensus_c3", "--seed", "1", "--out",
                          "m.ckpt", "--epochs", "1", "--steps-per-epoch", "2", "--batch-groups", "2",
                          "--val-fraction", "0"},
                         kTinyModel));
  EXPECT_EQ(t.code, 0) << t.err;
}

TEST_F(CliTest, CleanRejectsLevelOutOfRange) {
  small_corpus();
  EXPECT_EQ(cli({"clean", "--data", "d", "--seed", "5", "--consensus-level", "6"}).code, 2);
}

TEST_F(CliTest, SmokePipeline) {
  small_corpus();
  const CliRun t = cli(with({"train", "--data", "d", "--seed", "2", "--out", "m.ckpt", "--curve", "c.csv",
                          "--epochs", "1", "--steps-per-epoch", "50", "--batch-groups", "4",
                          "--chunk-size", "4", "--val-fraction", "0"},
                         kTinyModel));
  ASSERT_EQ(t.code, 0) << t.err;
  const std::string curve = slurp("c.csv");
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 51);

  ASSERT_EQ(cli({"embed", "--data", "d", "--checkpoint", "m.ckpt", "--out", "e.emb", "--seed", "1"}).code, 0);
  const CliRun e = cli({"eval", "--embeddings", "e.emb", "--out", "r.json", "--csv", "r.csv",
                     "--multi-image", "2", "--seed", "1"});
  ASSERT_EQ(e.code, 0) << e.err;
  const json rep = json::parse(slurp("r.json"));
  EXPECT_EQ(rep["format"], "aladin-report-1");
  EXPECT_EQ(rep["provenance"]["command"], "eval");
  for (const char* k : {"1", "5", "10"}) {
    const double v = rep["retrieval"]["ir_top_k"][k].get<double>();
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_TRUE(rep.contains("multi_image"));

  const json ckpt_cfg = aladin::read_checkpoint_header("m.ckpt").config;
  EXPECT_EQ(ckpt_cfg["provenance"]["chunk-size"], "4");
  EXPECT_EQ(ckpt_cfg["result"]["steps"], 50);

  ASSERT_EQ(cli({"gallery", "--embeddings", "e.emb", "--data", "d", "--out", "g/index.html",
                 "--seed", "1", "--top-k", "3", "--queries", "4"})
                .code,
            0);
  const std::string html = slurp("g/index.html");
  EXPECT_EQ(html.rfind("<!DOCTYPE html>", 0), 0u);
  EXPECT_NE(html.find("src=\"../d/images/"), std::string::npos);
}

TEST_F(CliTest, FusedStoreConcatenatesBothEmbeddings) {
  small_corpus();
  ASSERT_EQ(cli(with({"train", "--data", "d", "--seed", "2", "--out", "s.ckpt", "--epochs", "1",
                      "--steps-per-epoch", "2", "--batch-groups", "2", "--val-fraction", "0"},
                     kTinyModel))
                .code,
            0);
  const CliRun d = cli({"train", "--data", "d", "--seed", "2", "--out", "sem.ckpt", "--model",
                     "discriminative", "--group-by", "semantic", "--disc-channels", "4", "8",
                     "--disc-hidden", "8", "--disc-embedding", "6", "--epochs", "1",
                     "--steps-per-epoch", "2", "--batch-groups", "2", "--val-fraction", "0"});
  ASSERT_EQ(d.code, 0) << d.err;
  ASSERT_EQ(cli({"embed", "--data", "d", "--checkpoint", "s.ckpt", "--fuse-with", "sem.ckpt", "--out",
                 "f.emb", "--seed", "1"})
                .code,
            0);
  const auto store = aladin::load_embeddings("f.emb");
  // Style code: two statistics per style filter (4 + 8), plus 6 semantic dims.
  EXPECT_EQ(store.vectors.dim(1), 24u + 6u);
  EXPECT_EQ(store.meta["fused"]["semantic_dim"], 6);

  const CliRun h = cli(with({"train", "--data", "d", "--seed", "2", "--out", "hn.ckpt", "--hard-negatives",
                             "--semantic-checkpoint", "sem.ckpt", "--epochs", "1", "--steps-per-epoch",
                             "2", "--batch-groups", "2", "--val-fraction", "0"},
                            kTinyModel));
  EXPECT_EQ(h.code, 0) << h.err;
}

TEST_F(CliTest, FineTuneFromCheckpoint) {
  small_corpus();
  ASSERT_EQ(cli(with({"train", "--data", "d", "--seed", "2", "--out", "a.ckpt", "--epochs", "1",
                      "--steps-per-epoch", "2", "--batch-groups", "2", "--val-fraction", "0"},
                     kTinyModel))
                .code,
            0);
  const CliRun r = cli({"train", "--data", "d", "--seed", "3", "--out", "b.ckpt", "--init", "a.ckpt",
                     "--epochs", "1", "--steps-per-epoch", "2", "--batch-groups", "2", "--val-fraction",
                     "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(aladin::read_checkpoint_header("b.ckpt").config["model"],
            aladin::read_checkpoint_header("a.ckpt").config["model"]);
}

TEST_F(CliTest, HardNegativesNeedASemanticCheckpoint) {
  small_corpus();
  const CliRun r = cli(with({"train", "--data", "d", "--seed", "2", "--out", "a.ckpt", "--hard-negatives",
                          "--epochs", "1", "--steps-per-epoch", "2", "--batch-groups", "2"},
                         kTinyModel));
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, Float64PipelineIsByteIdentical) {
  const std::vector<std::string> files = {"d/manifest.json", "d/images/00000.png", "m.ckpt", "c.csv",
                                          "e.emb",           "r.json",             "r.csv"};
  std::vector<std::vector<std::string>> runs;
  for (const char* dir : {"one", "two"}) {
    enter(dir);
    small_corpus();
    ASSERT_EQ(cli(with({"train", "--data", "d", "--seed", "2", "--out", "m.ckpt", "--curve", "c.csv",
                        "--dtype", "float64", "--epochs", "2", "--steps-per-epoch", "3",
                        "--batch-groups", "2", "--chunk-size", "2", "--augment"},
                       kTinyModel))
                  .code,
              0);
    ASSERT_EQ(cli({"embed", "--data", "d", "--checkpoint", "m.ckpt", "--dtype", "float64", "--out",
                   "e.emb", "--seed", "1"})
                  .code,
              0);
    ASSERT_EQ(cli({"eval", "--embeddings", "e.emb", "--out", "r.json", "--csv", "r.csv", "--seed", "1"})
                  .code,
              0);
    std::vector<std::string> bytes;
    for (const auto& f : files) bytes.push_back(slurp(f));
    runs.push_back(std::move(bytes));
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    EXPECT_FALSE(runs[0][i].empty()) << files[i];
    EXPECT_EQ(runs[0][i], runs[1][i]) << files[i];
  }
}
