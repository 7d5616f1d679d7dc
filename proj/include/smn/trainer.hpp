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

#ifndef SMN_TRAINER_HPP_
#define SMN_TRAINER_HPP_

// Teacher-forced next-word training with Adam and best-epoch selection.

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "smn/adam.hpp"
#include "smn/model.hpp"

namespace smn {

// Predict summary_ids[prefix_len] from summary_ids[0, prefix_len) of sample.
struct TrainingPair {
  std::size_t sample = 0;
  std::size_t prefix_len = 0;
  int target = 0;

  bool operator==(const TrainingPair&) const = default;
};

// One pair per content word plus one for </s>.
std::vector<TrainingPair> expand_pairs(const EncodedSample& sample, std::size_t sample_index = 0);
std::vector<TrainingPair> expand_pairs(std::span<const EncodedSample> samples);

struct EpochReport {
  std::size_t epoch = 0;  // from 1
  double train_loss = 0;
  double val_accuracy = 0;
  double val_loss = 0;

  bool operator==(const EpochReport&) const = default;
};

struct NextTokenScore {
  double accuracy = 0;
  double loss = 0;
};

// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> values);

using DistributionFn =
    std::function<std::vector<double>(const EncodedSample& sample, std::span<const int> prefix)>;

NextTokenScore evaluate_next_token(std::span<const EncodedSample> samples,
                                   std::span<const TrainingPair> pairs, const DistributionFn& dist);
// Reuses one encoder pass for consecutive pairs of the same sample.
NextTokenScore evaluate_next_token(std::span<const EncodedSample> samples,
                                   std::span<const TrainingPair> pairs, const Model& model);

// Highest validation accuracy, then lowest validation loss, then earliest.
// Returns an index into reports; throws UsageError when empty.
std::size_t select_best_epoch(std::span<const EpochReport> reports);

std::string format_epoch_line(const EpochReport& report);
std::string format_training_log(std::span<const EpochReport> reports);

struct TrainOptions {
  std::size_t max_epochs = 10;
  AdamOptions adam;
  double clip_norm = 0;  // 0 disables clipping
  std::ostream* log = nullptr;  // receives format_epoch_line per epoch
};

// Mean cross-entropy over batch before the update, then one Adam step on
// params (which must be the ones model reads).
double train_batch(const Model& model, ParameterSet& params, AdamState& adam,
                   std::span<const EncodedSample> samples, std::span<const TrainingPair> batch,
                   double clip_norm = 0);

struct TrainResult {
  ParameterSet best;
  std::size_t best_epoch = 0;  // index into reports
  std::vector<EpochReport> reports;
};

// Initializes from config.rng_seed, shuffles pairs every epoch with a
// generator derived from the same seed, batches config.batch pairs.
TrainResult train(std::span<const EncodedSample> train_set, std::span<const EncodedSample> val_set,
                  const ModelConfig& config, const TrainOptions& options);

}  // namespace smn

#endif  // SMN_TRAINER_HPP_
