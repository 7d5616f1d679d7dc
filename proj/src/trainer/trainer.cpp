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

#include "smn/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "smn/error.hpp"

namespace smn {

std::vector<TrainingPair> expand_pairs(const EncodedSample& sample, std::size_t sample_index) {
  const auto& ids = sample.summary_ids;
  if (ids.size() < 2 || ids[0] != Vocabulary::kStart) {
    throw DataError("summary of '" + sample.sample_id + "' does not start with <s>");
  }
  std::vector<TrainingPair> pairs;
  for (std::size_t k = 1; k < ids.size(); ++k) {
    if (ids[k] == Vocabulary::kPad) break;
    pairs.push_back({sample_index, k, ids[k]});
    if (ids[k] == Vocabulary::kEnd) return pairs;
  }
  throw DataError("summary of '" + sample.sample_id + "' has no </s>");
}

std::vector<TrainingPair> expand_pairs(std::span<const EncodedSample> samples) {
  std::vector<TrainingPair> pairs;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (const TrainingPair& p : expand_pairs(samples[i], i)) pairs.push_back(p);
  }
  return pairs;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

namespace {

double pair_loss(std::span<const double> dist, int target) {
  return -std::log(std::max(dist[static_cast<std::size_t>(target)], 1e-12));
}

std::span<const int> prefix_of(const EncodedSample& s, const TrainingPair& p) {
  return std::span<const int>(s.summary_ids).first(p.prefix_len);
}

NextTokenScore finish(std::size_t correct, double loss, std::size_t count) {
  if (count == 0) return {};
  return {static_cast<double>(correct) / static_cast<double>(count),
          loss / static_cast<double>(count)};
}

}  // namespace

NextTokenScore evaluate_next_token(std::span<const EncodedSample> samples,
                                   std::span<const TrainingPair> pairs, const DistributionFn& dist) {
  std::size_t correct = 0;
  double loss = 0;
  for (const TrainingPair& p : pairs) {
    const EncodedSample& s = samples[p.sample];
    std::vector<double> d = dist(s, prefix_of(s, p));
    correct += argmax(d) == static_cast<std::size_t>(p.target);
    loss += pair_loss(d, p.target);
  }
  return finish(correct, loss, pairs.size());
}

NextTokenScore evaluate_next_token(std::span<const EncodedSample> samples,
                                   std::span<const TrainingPair> pairs, const Model& model) {
  NoGradGuard guard;
  std::size_t correct = 0;
  double loss = 0;
  std::size_t cached = static_cast<std::size_t>(-1);
  EncoderState state;
  for (const TrainingPair& p : pairs) {
    const EncodedSample& s = samples[p.sample];
    if (p.sample != cached) {
      state = model.encode(s);
      cached = p.sample;
    }
    Tensor d = model.decode(state, prefix_of(s, p)).next_word_dist;
    correct += argmax(d.data()) == static_cast<std::size_t>(p.target);
    loss += pair_loss(d.data(), p.target);
  }
  return finish(correct, loss, pairs.size());
}

std::size_t select_best_epoch(std::span<const EpochReport> reports) {
  if (reports.empty()) throw UsageError("no epochs to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const EpochReport& r = reports[i];
    const EpochReport& b = reports[best];
    if (r.val_accuracy > b.val_accuracy ||
        (r.val_accuracy == b.val_accuracy && r.val_loss < b.val_loss)) {
      best = i;
    }
  }
  return best;
}

std::string format_epoch_line(const EpochReport& r) {
  char line[160];
  std::snprintf(line, sizeof(line), "%zu\t%.6f\t%.6f\t%.6f\n", r.epoch, r.train_loss,
                r.val_accuracy, r.val_loss);
  return line;
}

std::string format_training_log(std::span<const EpochReport> reports) {
  std::string out;
  for (const EpochReport& r : reports) out += format_epoch_line(r);
  return out;
}

double train_batch(const Model& model, ParameterSet& params, AdamState& adam,
                   std::span<const EncodedSample> samples, std::span<const TrainingPair> batch,
                   double clip_norm) {
  if (batch.empty()) throw UsageError("empty training batch");
  // Pairs of one sample inside a batch share a single encoder graph.
  std::map<std::size_t, EncoderState> encoded;
  Tensor total;
  double loss_sum = 0;
  for (const TrainingPair& p : batch) {
    const EncodedSample& s = samples[p.sample];
    auto it = encoded.find(p.sample);
    if (it == encoded.end()) it = encoded.emplace(p.sample, model.encode(s)).first;
    Tensor loss = cross_entropy(model.decode(it->second, prefix_of(s, p)).next_word_dist, p.target);
    loss_sum += loss.item();
    total = total.defined() ? add(total, loss) : loss;
  }
  scale(total, 1.0 / static_cast<double>(batch.size())).backward();
  // Parameters a batch never touched still take a (zero-gradient) Adam step.
  for (auto& [name, t] : params) t.grad_buffer();
  if (clip_norm > 0) clip_grad_norm(params, clip_norm);
  adam.step(params);
  return loss_sum / static_cast<double>(batch.size());
}

TrainResult train(std::span<const EncodedSample> train_set, std::span<const EncodedSample> val_set,
                  const ModelConfig& config, const TrainOptions& options) {
  if (train_set.empty()) throw UsageError("training set is empty");
  if (val_set.empty()) throw UsageError("validation set is empty");
  if (options.max_epochs == 0) throw UsageError("max_epochs must be positive");
  ParameterSet params = init_parameters(config);
  Model model(config, params);
  AdamState adam(params, options.adam);
  std::vector<TrainingPair> pairs = expand_pairs(train_set);
  const std::vector<TrainingPair> val_pairs = expand_pairs(val_set);
  Rng shuffle_rng(config.rng_seed ^ 0x9e3779b97f4a7c15ull);

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<TrainingPair>(pairs));
    double loss_sum = 0;
    for (std::size_t start = 0; start < pairs.size(); start += config.batch) {
      const std::size_t len = std::min(config.batch, pairs.size() - start);
      const double mean = train_batch(model, params, adam, train_set,
                                      std::span<const TrainingPair>(pairs).subspan(start, len),
                                      options.clip_norm);
      loss_sum += mean * static_cast<double>(len);
    }
    EpochReport report;
    report.epoch = epoch;
    report.train_loss = loss_sum / static_cast<double>(pairs.size());
    const NextTokenScore val = evaluate_next_token(val_set, val_pairs, model);
    report.val_accuracy = val.accuracy;
    report.val_loss = val.loss;
    if (!std::isfinite(report.train_loss) || !std::isfinite(report.val_loss)) {
      throw NumericInputError("training diverged at epoch " + std::to_string(epoch));
    }
    result.reports.push_back(report);
    if (options.log) *options.log << format_epoch_line(report) << std::flush;
    if (select_best_epoch(result.reports) == result.reports.size() - 1) {
      result.best = params.clone();
      result.best_epoch = result.reports.size() - 1;
    }
  }
  return result;
}

}  // namespace smn
