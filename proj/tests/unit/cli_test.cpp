// Copyright 2026 The SegWorld Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "../support/fixtures.hpp"
#include "segworld/cli/commands.hpp"
#include "segworld/cli/manifest.hpp"
#include "segworld/cli/plots.hpp"
#include "segworld/dataset_io.hpp"
#include "segworld/engine/stub_backbone.hpp"
#include "segworld/training/checkpoint.hpp"
#include "segworld/training/trainer.hpp"

namespace segworld::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string tiny_config(long steps) {
  return "warmup_steps = 4\n"
         "steps = " + std::to_string(steps) + "\n"
         "intent_mix = 0.5\n"
         "batch_size = 2\n"
         "seed = 3\n"
         "hidden = 16\n"
         "heads = 2\n"
         "layers = 1\n"
         "mlp = 24\n"
         "prompt_len = 1\n"
         "prompt_dim = 6\n"
         "feature_dim = 8\n";
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("segworld_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "tiny.conf") << tiny_config(6);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int cli(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }

  fs::path synth(int train = 6, int test = 4) {
    EXPECT_EQ(cli({"synth", "--out", (dir_ / "ds").string(), "--train", std::to_string(train), "--test",
                   std::to_string(test), "--overlap", "0.5", "--seed", "4"}),
              kExitOk)
        << err_.str();
    return dir_ / "ds" / "dataset.jsonl";
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, ValidatePassingDatasetExitsZero) {
  const auto ds = synth();
  EXPECT_EQ(cli({"validate", "--dataset", ds.string(), "--out", (dir_ / "v").string()}), kExitOk) << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "v" / "manifest.json"));
  EXPECT_TRUE(lines_of(dir_ / "v" / "diagnostics.jsonl").empty());
}

TEST_F(CliTest, ValidateFailingDatasetExitsOneWithRuleAndSpan) {
  const auto ds = synth();
  auto records = lines_of(ds);
  json j = json::parse(records[0]);
  const std::string object = j["chain"]["object"];
  j["instructions"]["intent"] = "Hand me the " + object;
  records[0] = j.dump();
  {
    std::ofstream out(ds);
    for (const auto& r : records) out << r << '\n';
  }
  EXPECT_EQ(cli({"validate", "--dataset", ds.string(), "--out", (dir_ / "v").string()}), kExitFailure);
  const auto diags = lines_of(dir_ / "v" / "diagnostics.jsonl");
  ASSERT_FALSE(diags.empty());
  bool saw_banned = false, saw_first_person = false;
  for (const auto& line : diags) {
    const json d = json::parse(line);
    EXPECT_EQ(d["line"], 1);
    if (d["rule"] == "validator.banned_term") {
      saw_banned = true;
      EXPECT_EQ(d["span"], object);
    }
    if (d["rule"] == "validator.first_person") saw_first_person = true;
  }
  EXPECT_TRUE(saw_banned);
  EXPECT_TRUE(saw_first_person);
}

TEST_F(CliTest, MissingLexiconIsAUsageError) {
  const auto ds = synth();
  EXPECT_EQ(cli({"validate", "--dataset", ds.string(), "--lexicon", (dir_ / "nope.json").string(), "--out",
                 (dir_ / "v").string()}),
            kExitUsage);
  EXPECT_NE(err_.str().find("nope.json"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}), kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}), kExitUsage);
  EXPECT_EQ(cli({"train", "--out", (dir_ / "r").string()}), kExitUsage);
  EXPECT_EQ(cli({"eval", "--checkpoint", "x", "--out", "y", "--split", "dev"}), kExitUsage);
  std::ofstream(dir_ / "bad.conf") << "steps = 3\n";
  const auto ds = synth();
  EXPECT_EQ(cli({"train", "--config", (dir_ / "bad.conf").string(), "--dataset", ds.string(), "--out",
                 (dir_ / "r").string()}),
            kExitUsage);
  EXPECT_NE(err_.str().find("warmup_steps"), std::string::npos);
  EXPECT_EQ(cli({"--help"}), kExitOk);
}

TEST_F(CliTest, ReportOnEmptyDirectoryExitsTwo) {
  fs::create_directories(dir_ / "empty");
  EXPECT_EQ(cli({"report", "--run", (dir_ / "empty").string()}), kExitUsage);
  EXPECT_NE(err_.str().find("train_log.jsonl"), std::string::npos);
}

TEST_F(CliTest, SplitWritesPartition) {
  const auto ds = synth(6, 4);
  ASSERT_EQ(cli({"split", "--dataset", ds.string(), "--out", (dir_ / "s").string()}), kExitOk);
  const json s = json::parse(slurp(dir_ / "s" / "split.json"));
  EXPECT_EQ(s["counts"]["train"], 6);
  EXPECT_EQ(s["counts"]["test_official"], 4);
  EXPECT_EQ(s["counts"]["test_clean"].get<int>() + s["counts"]["test_overlap"].get<int>(), 4);
  EXPECT_EQ(s["counts"]["test_overlap"], 2);
  EXPECT_EQ(s["manifest"], manifest_hash(read_manifest(dir_ / "s")));
}

TEST_F(CliTest, ZeroStepTrainingSavesTheInitialModel) {
  const auto ds = synth();
  std::ofstream(dir_ / "zero.conf") << tiny_config(0);
  ASSERT_EQ(cli({"train", "--config", (dir_ / "zero.conf").string(), "--dataset", ds.string(), "--out",
                 (dir_ / "r").string()}),
            kExitOk)
      << err_.str();
  const auto ckpt = training::load_checkpoint(dir_ / "r" / "checkpoint.bin");
  EXPECT_EQ(ckpt.step, 0);
  const auto samples = read_dataset(ds);
  const auto catalog = read_catalog(sidecar_path(ds));
  const auto fresh =
      training::make_model(ckpt.config, catalog, engine::TextVocab(engine::collect_words(samples, catalog)));
  const auto a = ckpt.model->parameters().all();
  const auto b = fresh->parameters().all();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i]->value, b[i]->value) << a[i]->name;
  EXPECT_TRUE(lines_of(dir_ / "r" / "train_log.jsonl").empty());
}

TEST_F(CliTest, SeedFlagOverridesConfig) {
  const auto ds = synth();
  ASSERT_EQ(cli({"train", "--config", (dir_ / "tiny.conf").string(), "--dataset", ds.string(), "--out",
                 (dir_ / "r").string(), "--seed", "99"}),
            kExitOk);
  EXPECT_EQ(read_manifest(dir_ / "r").seed, 99u);
  EXPECT_EQ(training::load_checkpoint(dir_ / "r" / "checkpoint.bin").config.seed, 99u);
}

TEST_F(CliTest, SameManifestGivesIdenticalArtifacts) {
  const auto ds = synth();
  for (const char* run : {"a", "b"}) {
    ASSERT_EQ(cli({"train", "--config", (dir_ / "tiny.conf").string(), "--dataset", ds.string(), "--out",
                   (dir_ / run).string()}),
              kExitOk)
        << err_.str();
    ASSERT_EQ(cli({"eval", "--checkpoint", (dir_ / run / "checkpoint.bin").string(), "--dataset", ds.string(),
                   "--out", (dir_ / run / "eval").string()}),
              kExitOk)
        << err_.str();
    ASSERT_EQ(cli({"report", "--run", (dir_ / run).string()}), kExitOk) << err_.str();
  }
  EXPECT_EQ(manifest_hash(read_manifest(dir_ / "a")), manifest_hash(read_manifest(dir_ / "b")));
  for (const char* file :
       {"train_log.jsonl", "checkpoint.bin", "train_metrics.json", "train_evals.csv", "eval/summary.csv",
        "eval/per_action.csv", "eval/metrics_test_clean_intent.json", "report/loss_curves.svg",
        "report/loss_curves.csv", "report/p_self.csv", "report/similarity.pgm", "report/similarity.csv",
        "report/similarity_stats.json", "report/metrics_table.csv", "report/report.json"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / file)) << file;
    EXPECT_EQ(slurp(dir_ / "a" / file), slurp(dir_ / "b" / file)) << file;
  }
  // Every report carries the hash of the manifest it was produced under.
  const json metrics = json::parse(slurp(dir_ / "a" / "train_metrics.json"));
  EXPECT_EQ(metrics["manifest"], manifest_hash(read_manifest(dir_ / "a")));
  const json logged = json::parse(slurp(dir_ / "a" / "report" / "report.json"));
  EXPECT_TRUE(logged["p_self_matches_schedule"].get<bool>());
}

TEST_F(CliTest, AblationTableHasOneRowPerVariant) {
  const auto ds = synth(6, 4);
  std::ofstream(dir_ / "abl.conf") << tiny_config(2);
  ASSERT_EQ(cli({"ablate", "--config", (dir_ / "abl.conf").string(), "--dataset", ds.string(), "--out",
                 (dir_ / "ab").string()}),
            kExitOk)
      << err_.str();
  const json table = json::parse(slurp(dir_ / "ab" / "ablation.json"));
  ASSERT_EQ(table["rows"].size(), 4u);
  std::vector<std::string> labels;
  for (const auto& row : table["rows"]) {
    labels.push_back(row["variant"]);
    EXPECT_GE(row["miou"].get<double>(), 0.0);
    EXPECT_LE(row["miou"].get<double>(), 1.0);
  }
  EXPECT_EQ(labels, (std::vector<std::string>{"full", "w/o event level", "w/o proactive context",
                                              "w/o Stage-1 CoT"}));
  EXPECT_EQ(table["split"], "test_clean");
  EXPECT_EQ(lines_of(dir_ / "ab" / "ablation.csv").size(), 5u);
  EXPECT_EQ(lines_of(dir_ / "ab" / "ablation.md").size(), 6u);
  EXPECT_EQ(cli({"ablate", "--config", (dir_ / "abl.conf").string(), "--dataset", ds.string(), "--out",
                 (dir_ / "ab2").string(), "--variants", "full,bogus"}),
            kExitUsage);
}

// ---------------------------------------------------------------------------
// Evaluation against hand-computable backbones

class StubEval : public ::testing::Test {
 protected:
  Catalog catalog = testing::small_catalog();
  engine::TextVocab vocab{{"scene", "mug", "kettle", "handle", "body", "spout", "lid", "drink", "pour",
                           "graspable", "pourable", "i", "am", "thirsty", "want", "tea"}};
  const ReasoningChain drink{"mug", "drink", "handle", "graspable"};
  const ReasoningChain pour{"kettle", "pour", "spout", "pourable"};

  std::vector<Sample> samples() const {
    std::vector<Sample> out;
    const std::vector<std::pair<std::string, ReasoningChain>> rows{{"I am thirsty", drink}, {"I want tea", pour}};
    int n = 0;
    for (const auto& [text, chain] : rows) {
      Sample s;
      s.id = "s" + std::to_string(n++);
      s.base_image_id = "img";
      s.image = testing::small_image();
      s.instructions.emplace(InstructionKind::kIntent, Instruction(text, InstructionKind::kIntent));
      s.chain = chain;
      s.mask_gt = part_mask(s.image, catalog, chain);
      out.push_back(s);
    }
    return out;
  }
};

TEST_F(StubEval, OracleScoresPerfectly) {
  engine::OracleStub stub(catalog, vocab, {{"I am thirsty", drink}, {"I want tea", pour}});
  const engine::Pipeline p{&stub.backbone(), &stub.projection(), &stub.decoder()};
  const auto s = samples();
  const auto outcome = training::evaluate(p, s, InstructionKind::kIntent, {});
  const auto report = metrics::summarize(outcome.records);
  EXPECT_EQ(report.miou, 1.0);
  EXPECT_EQ(report.ciou, 1.0);
  EXPECT_EQ(report.seg_rate, 1.0);
  EXPECT_EQ(report.per_action.at("drink").miou, 1.0);
  const auto skipped = training::evaluate(p, s, InstructionKind::kReferring, {});
  EXPECT_TRUE(skipped.records.empty());
  EXPECT_EQ(skipped.skipped, (std::vector<std::string>{"s0", "s1"}));
}

TEST_F(StubEval, NonEmittingModelScoresZeroSegRate) {
  engine::OracleStub stub(catalog, vocab, {});
  const engine::Pipeline p{&stub.backbone(), &stub.projection(), &stub.decoder()};
  engine::EngineConfig free;
  free.forced = false;
  const auto s = samples();
  const auto report = metrics::summarize(training::evaluate(p, s, InstructionKind::kIntent, free).records);
  EXPECT_EQ(report.seg_rate, 0.0);
  EXPECT_EQ(report.miou, 0.0);
  EXPECT_EQ(report.ciou, 0.0);
  EXPECT_EQ(report.count, 2u);
}

// ---------------------------------------------------------------------------
// Manifests, plots, similarity statistics

TEST(ManifestTest, HashIgnoresTimestampOnly) {
  RunManifest m{"train", {{"steps", 3}}, 7, "abc", "0.1.0", "2026-01-01T00:00:00Z"};
  RunManifest later = m;
  later.started_at = "2026-06-01T12:00:00Z";
  EXPECT_EQ(manifest_hash(m), manifest_hash(later));
  EXPECT_EQ(manifest_hash(m).size(), 16u);
  RunManifest other = m;
  other.seed = 8;
  EXPECT_NE(manifest_hash(m), manifest_hash(other));
  other = m;
  other.config["steps"] = 4;
  EXPECT_NE(manifest_hash(m), manifest_hash(other));
  const RunManifest back = manifest_from_json(to_json(m));
  EXPECT_EQ(manifest_hash(back), manifest_hash(m));
  EXPECT_EQ(back.started_at, m.started_at);
}

TEST(ManifestTest, FileHashIsFnv1a) {
  const auto p = fs::temp_directory_path() / "segworld_fnv.txt";
  std::ofstream(p) << "a";
  // FNV-1a 64 of "a".
  EXPECT_EQ(hash_file(p), 0xaf63dc4c8601ec8cULL);
  fs::remove(p);
  EXPECT_EQ(hash_file(p), 0xcbf29ce484222325ULL);
}

TEST(PlotTest, SidecarsHoldThePlottedNumbers) {
  const auto dir = fs::temp_directory_path() / "segworld_plots";
  fs::remove_all(dir);
  write_line_plot(dir / "curve.svg", "t", "step", {0, 1, 2}, {{"a", {1.5, 0.25, 0.125}}, {"b", {3, 2, 1}}});
  EXPECT_EQ(slurp(dir / "curve.csv"), "step,a,b\n0,1.5,3\n1,0.25,2\n2,0.125,1\n");
  EXPECT_EQ(slurp(dir / "curve.svg").rfind("<svg", 0), 0u);
  EXPECT_THROW(write_line_plot(dir / "bad.svg", "t", "x", {0, 1}, {{"a", {1}}}), DimensionMismatch);

  autodiff::Matrix m(2, 2);
  m << 0.0, 1.0, 0.5, 0.25;
  write_heatmap(dir / "heat.pgm", m, 1);
  EXPECT_EQ(slurp(dir / "heat.csv"), "0,1\n0.5,0.25\n");
  const std::string pgm = slurp(dir / "heat.pgm");
  const std::string header = "P5\n2 2\n255\n";
  ASSERT_EQ(pgm.size(), header.size() + 4);
  EXPECT_EQ(pgm.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(pgm[header.size()]), 0);
  EXPECT_EQ(static_cast<unsigned char>(pgm[header.size() + 1]), 255);
  fs::remove_all(dir);
}

TEST(SimilarityStatsTest, MatchesDirectSums) {
  autodiff::Matrix m(3, 3);
  m << 0.9, 0.1, 0.2, 0.0, 0.8, -0.3, 0.4, 0.1, 0.7;
  const auto s = similarity_stats(m);
  EXPECT_EQ(s.n, 3u);
  EXPECT_NEAR(s.diagonal_mean, 0.8, 1e-15);
  EXPECT_NEAR(s.off_diagonal_mean, (0.1 + 0.2 + 0.0 - 0.3 + 0.4 + 0.1) / 6.0, 1e-15);
  EXPECT_THROW(similarity_stats(autodiff::Matrix(2, 3)), InvalidArgument);
  EXPECT_THROW(similarity_stats(autodiff::Matrix(1, 1)), InvalidArgument);
}

}  // namespace
}  // namespace segworld::cli
