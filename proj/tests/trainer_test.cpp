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

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "smn/error.hpp"
#include "smn/trainer.hpp"
#include "support/toy_model.hpp"

namespace smn {
namespace {

using testing::random_encoded;
using testing::toy_config;

EncodedSample with_summary(std::vector<int> ids) {
  EncodedSample s;
  s.sample_id = "s";
  s.summary_ids = std::move(ids);
  return s;
}

TEST(ExpandPairsTest, OnePairPerContentWordPlusEnd) {
  auto pairs = expand_pairs(with_summary({1, 7, 8, 2, 0, 0}), 4);
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(pairs[0], (TrainingPair{4, 1, 7}));
  EXPECT_EQ(pairs[1], (TrainingPair{4, 2, 8}));
  EXPECT_EQ(pairs[2], (TrainingPair{4, 3, 2}));
  auto minimal = expand_pairs(with_summary({1, 2}));
  ASSERT_EQ(minimal.size(), 1u);
  EXPECT_EQ(minimal[0].target, Vocabulary::kEnd);
  EXPECT_THROW(expand_pairs(with_summary({7, 2})), DataError);
  EXPECT_THROW(expand_pairs(with_summary({1, 7, 0})), DataError);
}

TEST(ExpandPairsTest, CorpusCountAndInvariants) {
  Rng rng(4);
  ModelConfig c = toy_config();
  c.comlen = 9;
  std::vector<EncodedSample> corpus;
  std::size_t expected = 0;
  for (int i = 0; i < 50; ++i) {
    corpus.push_back(random_encoded(rng, c));
    const auto& ids = corpus.back().summary_ids;
    const auto end = std::find(ids.begin(), ids.end(), Vocabulary::kEnd);
    expected += static_cast<std::size_t>(end - ids.begin() - 1) + 1;
  }
  auto pairs = expand_pairs(corpus);
  EXPECT_EQ(pairs.size(), expected);
  for (const TrainingPair& p : pairs) {
    EXPECT_GE(p.prefix_len, 1u);
    EXPECT_LT(p.prefix_len, c.comlen);
    EXPECT_NE(p.target, Vocabulary::kPad);
  }
}

TEST(EvaluateTest, OracleAndUniformModels) {
  std::vector<EncodedSample> samples = {with_summary({1, 5, 6, 2}), with_summary({1, 2, 0, 0})};
  auto pairs = expand_pairs(samples);
  const std::size_t v = 9;
  auto oracle = [&](const EncodedSample& s, std::span<const int> prefix) {
    std::vector<double> d(v, 0.0);
    d[static_cast<std::size_t>(s.summary_ids[prefix.size()])] = 1.0;
    return d;
  };
  NextTokenScore perfect = evaluate_next_token(samples, pairs, oracle);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.loss, 0.0);
  auto uniform = [&](const EncodedSample&, std::span<const int>) {
    return std::vector<double>(v, 1.0 / v);
  };
  NextTokenScore flat = evaluate_next_token(samples, pairs, uniform);
  EXPECT_NEAR(flat.loss, std::log(9.0), 1e-12);
  // All ties resolve to id 0, which is never a target.
  EXPECT_EQ(flat.accuracy, 0.0);
}

TEST(EvaluateTest, RandomInitIsNearChance) {
  Rng rng(8);
  ModelConfig c = toy_config();
  ParameterSet params = init_parameters(c);
  Model model(c, params);
  std::vector<EncodedSample> samples;
  std::vector<TrainingPair> pairs;
  for (std::size_t i = 0; i < 1000; ++i) {
    samples.push_back(random_encoded(rng, c));
    pairs.push_back({i, 1, static_cast<int>(rng.index(c.summary_vocab_size))});
  }
  NextTokenScore score = evaluate_next_token(samples, pairs, model);
  EXPECT_NEAR(score.accuracy, 0.2, 0.05);
  // Both evaluators agree.
  auto fn = [&](const EncodedSample& s, std::span<const int> prefix) {
    NoGradGuard guard;
    Tensor d = model.forward(s, prefix).next_word_dist;
    return std::vector<double>(d.data().begin(), d.data().end());
  };
  NextTokenScore generic = evaluate_next_token(samples, pairs, fn);
  EXPECT_EQ(generic.accuracy, score.accuracy);
  EXPECT_EQ(generic.loss, score.loss);
}

TEST(EvaluateTest, InitialLossNearLogV) {
  Rng rng(9);
  ModelConfig c = toy_config();
  c.summary_vocab_size = 40;
  c.comlen = 8;
  c.projection_dim = 16;
  std::vector<EncodedSample> samples;
  for (int i = 0; i < 100; ++i) samples.push_back(random_encoded(rng, c));
  auto pairs = expand_pairs(samples);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    c.rng_seed = seed;
    ParameterSet params = init_parameters(c);
    NextTokenScore score = evaluate_next_token(samples, pairs, Model(c, params));
    EXPECT_NEAR(score.loss, std::log(40.0), 0.15 * std::log(40.0));
  }
}

TEST(SelectBestEpochTest, TieBreaks) {
  std::vector<EpochReport> r = {{1, 2.0, 0.5, 1.0}, {2, 1.5, 0.7, 1.2}, {3, 1.2, 0.7, 1.1},
                                {4, 1.0, 0.7, 1.1}, {5, 0.9, 0.6, 0.5}};
  EXPECT_EQ(select_best_epoch(r), 2u);
  EXPECT_EQ(select_best_epoch(std::span(r).first(2)), 1u);
  EXPECT_EQ(select_best_epoch(std::span(r).first(1)), 0u);
  EXPECT_THROW(select_best_epoch({}), UsageError);
}

TEST(ShuffleTest, PermutesPairsWithoutLoss) {
  Rng rng(2);
  ModelConfig c = toy_config();
  c.comlen = 7;
  std::vector<EncodedSample> corpus;
  for (int i = 0; i < 30; ++i) corpus.push_back(random_encoded(rng, c));
  auto pairs = expand_pairs(corpus);
  auto key = [](const TrainingPair& p) { return std::tuple(p.sample, p.prefix_len, p.target); };
  auto sorted = [&](std::vector<TrainingPair> v) {
    std::sort(v.begin(), v.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    return v;
  };
  const auto reference = sorted(pairs);
  for (int epoch = 0; epoch < 10; ++epoch) {
    rng.shuffle(std::span<TrainingPair>(pairs));
    EXPECT_EQ(sorted(pairs), reference);
  }
}

std::vector<EncodedSample> toy_corpus(Rng& rng, const ModelConfig& c, int count) {
  std::vector<EncodedSample> out;
  for (int i = 0; i < count; ++i) out.push_back(random_encoded(rng, c));
  return out;
}

TEST(TrainBatchTest, LossDecreasesOverFirstAdamSteps) {
  int decreasing = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    ModelConfig c = toy_config();
    c.rng_seed = seed;
    std::vector<EncodedSample> samples = toy_corpus(rng, c, 3);
    auto pairs = expand_pairs(samples);
    ParameterSet params = init_parameters(c);
    Model model(c, params);
    AdamState adam(params);
    std::vector<double> losses;
    for (int step = 0; step < 6; ++step) {
      losses.push_back(train_batch(model, params, adam, samples, pairs));
    }
    bool ok = true;
    for (std::size_t i = 1; i < losses.size(); ++i) ok = ok && losses[i] < losses[i - 1];
    decreasing += ok;
  }
  EXPECT_GE(decreasing, 19);
}

TEST(TrainTest, DeterministicAcrossRuns) {
  Rng rng(5);
  ModelConfig c = toy_config();
  c.rng_seed = 42;
  auto train_set = toy_corpus(rng, c, 8);
  auto val_set = toy_corpus(rng, c, 3);
  TrainOptions opts;
  opts.max_epochs = 4;
  std::ostringstream log_a, log_b;
  opts.log = &log_a;
  TrainResult a = train(train_set, val_set, c, opts);
  opts.log = &log_b;
  TrainResult b = train(train_set, val_set, c, opts);
  EXPECT_EQ(a.reports, b.reports);
  EXPECT_EQ(a.best_epoch, b.best_epoch);
  EXPECT_TRUE(a.best.bitwise_equal(b.best));
  EXPECT_EQ(log_a.str(), log_b.str());
  EXPECT_EQ(log_a.str(), format_training_log(a.reports));
  EXPECT_EQ(a.best_epoch, select_best_epoch(a.reports));
  EXPECT_EQ(a.reports.size(), 4u);
  const std::string log = log_a.str();
  EXPECT_EQ(std::count(log.begin(), log.end(), '\t'), 12);

  c.rng_seed = 43;
  TrainResult other = train(train_set, val_set, c, opts);
  EXPECT_FALSE(other.best.bitwise_equal(a.best));
}

TEST(TrainTest, MemorizesOneSample) {
  Rng rng(11);
  ModelConfig c = toy_config();
  c.comlen = 6;
  c.summary_vocab_size = 8;
  EncodedSample s = random_encoded(rng, c);
  s.summary_ids = {1, 5, 7, 6, 2, 0};
  std::vector<EncodedSample> one = {s};
  TrainOptions opts;
  opts.max_epochs = 200;
  TrainResult r = train(one, one, c, opts);
  EXPECT_EQ(r.reports[r.best_epoch].val_accuracy, 1.0);
  Model model(c, r.best);
  EXPECT_EQ(evaluate_next_token(one, expand_pairs(one), model).accuracy, 1.0);
}

TEST(TrainTest, RejectsEmptySets) {
  Rng rng(1);
  ModelConfig c = toy_config();
  auto data = toy_corpus(rng, c, 2);
  EXPECT_THROW(train({}, data, c, {}), UsageError);
  EXPECT_THROW(train(data, {}, c, {}), UsageError);
}

TEST(TrainTest, LogLineFormat) {
  EXPECT_EQ(format_epoch_line({3, 1.25, 0.5, 0.75}), "3\t1.250000\t0.500000\t0.750000\n");
}

}  // namespace
}  // namespace smn
