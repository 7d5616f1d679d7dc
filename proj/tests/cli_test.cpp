/* Copyright 2026 The SMN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "smn/cli.hpp"
#include "smn/error.hpp"
#include "smn/inference.hpp"
#include "smn/io.hpp"
#include "smn/ops.hpp"

namespace smn {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string bytes(const fs::path& p) { return read_text_file(p, "test artifact"); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("smn_cli_test_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Small enough that a training run takes well under a second.
  RunConfig small_config() const {
    json j = {{"tdatlen", 16},
              {"comlen", 6},
              {"e_dim", 4},
              {"l_dim", 4},
              {"n", 4},
              {"Y", 6},
              {"h", 2},
              {"batch", 8},
              {"projection_dim", 4},
              {"code_vocab_max", 60},
              {"summary_vocab_max", 40},
              {"max_epochs", 2},
              {"learning_rate", 0.005},
              {"split_ratios", {0.6, 0.2, 0.2}},
              {"seed", 5},
              {"synthetic", {{"projects", 5}, {"samples_per_project", 6}}},
              {"data_dir", (dir_ / "data").string()},
              {"checkpoint", (dir_ / "model.ckpt").string()},
              {"predictions", (dir_ / "a.pred").string()},
              {"report", (dir_ / "report.txt").string()}};
    return run_config_from_json(j);
  }

  fs::path dir_;
};

TEST(RunConfigTest, RoundTripIsIdentity) {
  RunConfig c;
  c.model.h = 4;
  c.model.gate_query = GateQuery::kSummaryVector;
  c.dataset = "corpus.tsv";
  c.split_ratios = {0.7, 0.2, 0.1};
  c.learning_rate = 0.0025;
  c.synthetic = default_synthetic_spec();
  c.ablation = {{"h1", {{"h", 1}}}, {"eos", {{"statement_encoding", "eos"}}}};
  const json once = to_json(c);
  const json twice = to_json(run_config_from_json(once));
  EXPECT_EQ(once, twice);
  EXPECT_EQ(canonical_json(once), canonical_json(twice));
  EXPECT_EQ(to_json(run_config_from_json(json::object())), to_json(RunConfig{}));
}

TEST(RunConfigTest, KeysAreModelKeysPlusRunKeys) {
  const auto& keys = run_config_keys();
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  for (const char* k : {"tdatlen", "comlen", "h", "gate_query", "data_dir", "seed", "split_ratios"}) {
    EXPECT_TRUE(std::binary_search(keys.begin(), keys.end(), std::string(k))) << k;
  }
  // Derived from the vocabulary files and the seed.
  for (const char* k : {"code_vocab_size", "summary_vocab_size", "rng_seed"}) {
    EXPECT_FALSE(std::binary_search(keys.begin(), keys.end(), std::string(k))) << k;
  }
  json serialized = to_json(RunConfig{});
  std::vector<std::string> serialized_keys;
  for (const auto& [k, v] : serialized.items()) serialized_keys.push_back(k);
  EXPECT_EQ(serialized_keys, keys);
}

TEST(RunConfigTest, RejectsBadInput) {
  EXPECT_THROW(run_config_from_json({{"bogus", 1}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"rng_seed", 1}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"max_epochs", "ten"}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"split_ratios", {0.5, 0.2, 0.2}}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"split_ratios", {1.0, 0.0, 0.0}}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"learning_rate", 0}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"comlen", 1}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"gate_query", "sometimes"}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"ablation", {{{"name", "x"}, {"overrides", {{"rng_seed", 2}}}}}}}),
               ConfigError);
  EXPECT_THROW(run_config_from_json({{"ablation", {{{"name", "../x"}}}}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"ablation", {{{"name", "a"}}, {{"name", "a"}}}}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"synthetic", {{"projects", 0}}}}), ConfigError);
}

TEST(RunConfigTest, DefaultSweepShape) {
  const auto sweep = default_ablation_sweep(3);
  ASSERT_EQ(sweep.size(), 8u);
  for (std::size_t h = 1; h <= 5; ++h) EXPECT_EQ(sweep[h - 1].overrides.at("h"), h);
  EXPECT_EQ(sweep[5].overrides.at("statement_encoding"), "eos");
  EXPECT_EQ(sweep[6].overrides.at("gate_query"), "summary_vector");
}

TEST(ExitCodeTest, Mapping) {
  EXPECT_EQ(exit_code_for(ConfigError("x")), 1);
  EXPECT_EQ(exit_code_for(UsageError("x")), 1);
  EXPECT_EQ(exit_code_for(DataError("x")), 2);
  EXPECT_EQ(exit_code_for(AlignmentError("x")), 2);
  EXPECT_EQ(exit_code_for(NumericInputError("x")), 2);
  EXPECT_EQ(exit_code_for(VerificationError("x")), 3);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 2);
}

TEST_F(CliTest, PrepareIsDeterministicAndCountsAddUp) {
  RunConfig c = small_config();
  c.synthetic->projects = 10;
  c.synthetic->samples_per_project = 20;
  CommandOptions a, b;
  a.out = (dir_ / "a").string();
  b.out = (dir_ / "b").string();
  const auto fa = cmd_prepare(c, a);
  const auto fb = cmd_prepare(c, b);
  ASSERT_EQ(fa.size(), 5u);
  for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_EQ(bytes(fa[i]), bytes(fb[i])) << fa[i];
  const PreparedData d = load_prepared(dir_ / "a");
  EXPECT_EQ(d.train.size() + d.validation.size() + d.test.size(), 200u);
}

TEST_F(CliTest, PrepareValidatesBeforeAnyIo) {
  RunConfig c = small_config();
  c.split_ratios = {0.5, 0.2, 0.2};
  EXPECT_THROW(cmd_prepare(c), ConfigError);
  EXPECT_FALSE(fs::exists(c.data_dir));
  RunConfig none = small_config();
  none.synthetic.reset();
  EXPECT_THROW(cmd_prepare(none), ConfigError);
  EXPECT_FALSE(fs::exists(c.data_dir));
}

TEST_F(CliTest, PrepareAppliesExclusionAndLengthFilter) {
  RunConfig c = small_config();
  write_text_file(dir_ / "exclude.txt", "p000_s0000\np001_s0002\n", "ids");
  c.exclude_ids = (dir_ / "exclude.txt").string();
  cmd_prepare(c);
  const PreparedData d = load_prepared(c.data_dir);
  EXPECT_EQ(d.train.size() + d.validation.size() + d.test.size(), 28u);
  c.min_statements = 1000;
  EXPECT_THROW(cmd_prepare(c), Error);
}

TEST_F(CliTest, MissingArtifactsNameFileAndProducer) {
  RunConfig c = small_config();
  try {
    cmd_train(c);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("train.tsv"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("smn prepare"), std::string::npos) << e.what();
  }
  cmd_prepare(c);
  try {
    cmd_predict(c);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("model.ckpt"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("smn train"), std::string::npos) << e.what();
  }
  write_text_file(c.checkpoint, "not a checkpoint", "junk");
  EXPECT_THROW(cmd_predict(c), DataError);
  c.checkpoint.clear();
  EXPECT_THROW(cmd_predict(c), ConfigError);
}

TEST_F(CliTest, PipelineIsDeterministicAndLeavesInputsAlone) {
  RunConfig c = small_config();
  cmd_prepare(c);
  const DataLayout layout(c.data_dir);
  const std::string train_bytes = bytes(layout.train), test_bytes = bytes(layout.test);

  const auto first = cmd_train(c);
  const std::string ckpt = bytes(first[0]), log = bytes(first[1]);
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 2);
  const auto pred = cmd_predict(c);
  const std::string pred_bytes = bytes(pred[0]);
  const auto rep = cmd_evaluate(c);
  const std::string rep_bytes = bytes(rep[0]), rep_json = bytes(rep[1]);

  EXPECT_EQ(cmd_train(c), first);
  EXPECT_EQ(bytes(first[0]), ckpt);
  EXPECT_EQ(bytes(first[1]), log);
  cmd_predict(c);
  EXPECT_EQ(bytes(pred[0]), pred_bytes);
  cmd_evaluate(c);
  EXPECT_EQ(bytes(rep[0]), rep_bytes);
  EXPECT_EQ(bytes(rep[1]), rep_json);

  EXPECT_EQ(bytes(layout.train), train_bytes);
  EXPECT_EQ(bytes(layout.test), test_bytes);

  // A different seed gives different weights.
  CommandOptions other;
  other.seed = 6;
  other.out = (dir_ / "other.ckpt").string();
  cmd_train(c, other);
  EXPECT_NE(bytes(dir_ / "other.ckpt"), ckpt);
}

TEST_F(CliTest, EnsembleOfOneCheckpointTwiceIsIdempotent) {
  RunConfig c = small_config();
  cmd_prepare(c);
  cmd_train(c);
  CommandOptions one, two;
  one.checkpoints = {c.checkpoint};
  one.out = (dir_ / "one.pred").string();
  two.checkpoints = {c.checkpoint, c.checkpoint};
  two.out = (dir_ / "two.pred").string();
  cmd_predict(c, one);
  cmd_predict(c, two);
  EXPECT_EQ(bytes(one.out), bytes(two.out));
}

TEST_F(CliTest, GateDumpHasOneBlockPerSample) {
  RunConfig c = small_config();
  cmd_prepare(c);
  cmd_train(c);
  CommandOptions o;
  o.dump_gates = true;
  const auto written = cmd_predict(c, o);
  ASSERT_EQ(written.size(), 2u);
  const std::string dump = bytes(written[1]);
  const PreparedData d = load_prepared(c.data_dir);
  std::size_t headers = 0, rows = 0;
  std::istringstream in(dump);
  for (std::string line; std::getline(in, line);) (line.rfind("# ", 0) == 0 ? headers : rows)++;
  EXPECT_EQ(headers, d.test.size());
  EXPECT_EQ(rows, d.test.size() * c.model.h);
}

TEST_F(CliTest, EvaluatePerfectPredictionsGivesBleu100) {
  RunConfig c = small_config();
  cmd_prepare(c);
  const PreparedData d = load_prepared(c.data_dir);
  std::vector<PredictionRecord> perfect;
  for (const Sample& s : d.test) perfect.push_back({s.sample_id, {}, s.summary_tokens, {}, {}});
  write_predictions(c.predictions, perfect);
  const auto written = cmd_evaluate(c);
  const json report = json::parse(bytes(written[1]));
  EXPECT_DOUBLE_EQ(report["rows"][0]["bleu"].get<double>(), 100.0);
  EXPECT_EQ(report["rows"][0]["t"], nullptr);
  EXPECT_EQ(report["samples"], d.test.size());

  // A misaligned prediction file is an alignment error.
  perfect.pop_back();
  write_predictions(c.predictions, perfect);
  EXPECT_THROW(cmd_evaluate(c), AlignmentError);
}

TEST_F(CliTest, AnalyzeOfIdenticalFilesHasEmptyDifferenceSet) {
  RunConfig c = small_config();
  cmd_prepare(c);
  cmd_train(c);
  cmd_predict(c);
  fs::copy_file(c.predictions, dir_ / "b.pred");
  c.predictions_b = (dir_ / "b.pred").string();
  const auto written = cmd_analyze(c);
  const json report = json::parse(bytes(written[1]));
  EXPECT_EQ(report["difference"]["pct"].get<double>(), 0.0);
  EXPECT_TRUE(report["difference"]["ids"].empty());
  c.predictions_b.clear();
  EXPECT_THROW(cmd_analyze(c), ConfigError);
}

TEST_F(CliTest, AblationOverThreeHopCountsTrainsThreeModels) {
  RunConfig c = small_config();
  c.max_epochs = 1;
  c.model.h = 3;
  c.ablation = {{"h1", {{"h", 1}}}, {"h2", {{"h", 2}}}, {"h3", {{"h", 3}}}};
  cmd_prepare(c);
  const AblationResult r = run_ablation(c);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.baseline, 2u);
  for (const auto& row : r.rows) {
    EXPECT_TRUE(fs::exists(row.checkpoint));
    EXPECT_TRUE(row.finite);
    EXPECT_EQ(row.parameters, r.rows[0].parameters);
  }
  std::size_t checkpoints = 0;
  for (const auto& e : fs::directory_iterator(fs::path(c.report).parent_path() / "report_checkpoints")) {
    checkpoints += e.path().extension() == ".ckpt";
  }
  EXPECT_EQ(checkpoints, 3u);
  const json report = json::parse(bytes(fs::path(c.report + ".json")));
  ASSERT_EQ(report["rows"].size(), 3u);
  EXPECT_EQ(report["baseline"], "h3");
  EXPECT_EQ(report["rows"][2]["t"], nullptr);
  EXPECT_TRUE(report["rows"][0]["t"].is_number());
  EXPECT_TRUE(report["rows"][0]["p"].is_number());

  // Without the default among the sweep, it is trained as an extra baseline row.
  c.ablation = {{"h1", {{"h", 1}}}};
  const AblationResult extra = run_ablation(c);
  ASSERT_EQ(extra.rows.size(), 2u);
  EXPECT_EQ(extra.rows[extra.baseline].name, "default");
}

// Forward value of the real gate with half its gradient.
Tensor corrupted_gate(const Tensor& F, const Tensor& Q, const Tensor& M) {
  Tensor g = gate(F, Q, M);
  return add(scale(g, 0.5), scale(g.detach(), 0.5));
}

TEST_F(CliTest, GradcheckPassesOnToyConfigAndCatchesCorruptedGate) {
  json toy = to_json(gradcheck_toy_config());
  toy.erase("code_vocab_size");
  toy.erase("summary_vocab_size");
  toy.erase("rng_seed");
  toy["code_vocab_max"] = 7;
  toy["summary_vocab_max"] = 5;
  toy["report"] = (dir_ / "gradcheck.txt").string();
  const RunConfig c = run_config_from_json(toy);

  const GradcheckReport report = cmd_gradcheck(c);
  EXPECT_TRUE(report.passed());
  const std::string text = bytes(dir_ / "gradcheck.txt");
  for (const char* op : {"matmul", "softmax", "gru_cell", "gate", "gated_update",
                         "memory_hops/none", "model/config", "model/attendgru_only"}) {
    EXPECT_NE(text.find(op), std::string::npos) << op;
  }
  EXPECT_NE(text.find("all checks passed"), std::string::npos);

  CommandOptions bad;
  bad.gate_fn = corrupted_gate;
  EXPECT_THROW(cmd_gradcheck(c, bad), VerificationError);
  const json failed = json::parse(bytes(dir_ / "gradcheck.txt.json"));
  EXPECT_FALSE(failed["passed"].get<bool>());

  RunConfig big;  // default dims with the default vocabulary limits
  EXPECT_THROW(cmd_gradcheck(big), ConfigError);
}

}  // namespace
}  // namespace smn
