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

#ifndef SMN_INFERENCE_HPP_
#define SMN_INFERENCE_HPP_

// Greedy decoding for single models and mean-softmax ensembles.
//
// Prediction file: one line per sample, "sample_id \t predicted tokens"
// (space separated; empty when nothing was predicted).

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smn/corpus.hpp"
#include "smn/model.hpp"

namespace smn {

// One decoding participant. begin() is called once per sample, then next()
// once per step with the prefix generated so far.
class NextWordModel {
 public:
  virtual ~NextWordModel() = default;
  virtual const Vocabulary& summary_vocab() const = 0;
  virtual std::size_t comlen() const = 0;
  virtual void begin(const Sample& sample) = 0;
  virtual std::vector<double> next(std::span<const int> prefix) = 0;
};

// A trained Model plus the vocabularies it was trained with.
class ModelPredictor : public NextWordModel {
 public:
  ModelPredictor(ModelConfig config, ParameterSet params,
                 std::shared_ptr<const Vocabulary> code_vocab,
                 std::shared_ptr<const Vocabulary> summary_vocab);
  // Throws DataError naming the file when it is missing or corrupt, and
  // ConfigError when the vocabularies do not fit the stored config.
  static std::unique_ptr<ModelPredictor> from_checkpoint(
      const std::filesystem::path& path, std::shared_ptr<const Vocabulary> code_vocab,
      std::shared_ptr<const Vocabulary> summary_vocab);

  const Vocabulary& summary_vocab() const override { return *summary_vocab_; }
  std::size_t comlen() const override { return config_.comlen; }
  void begin(const Sample& sample) override;
  std::vector<double> next(std::span<const int> prefix) override;

  const ModelConfig& config() const { return config_; }
  const Model& model() const { return *model_; }
  // Memory trace of the most recent next() call (SMN models only).
  const std::optional<MemoryTrace>& last_trace() const { return last_trace_; }

 private:
  ModelConfig config_;
  std::unique_ptr<ParameterSet> params_;
  std::unique_ptr<Model> model_;
  std::shared_ptr<const Vocabulary> code_vocab_;
  std::shared_ptr<const Vocabulary> summary_vocab_;
  std::optional<EncoderState> state_;
  std::optional<MemoryTrace> last_trace_;
};

// Arithmetic mean. Throws DimensionError on length mismatch, UsageError on an
// empty list and NumericInputError when an input is not a distribution.
std::vector<double> ensemble_distribution(std::span<const std::vector<double>> dists);

struct PredictionRecord {
  std::string sample_id;
  std::vector<int> predicted_ids;
  std::vector<std::string> predicted_tokens;
  std::vector<std::vector<double>> distributions;  // per step, when requested
  // Gates of the first model's first step, when it has a memory.
  std::optional<MemoryTrace> trace;
};

// Starts from <s>, averages every model's next-word distribution, picks the
// most probable id excluding <PAD>, <s> and <UNK> (lowest id on ties) and
// stops at </s> or after comlen - 1 words. Throws UsageError when models
// disagree on the summary vocabulary or comlen.
PredictionRecord greedy_decode(std::span<NextWordModel* const> models, const Sample& sample,
                               bool keep_distributions = false);

std::vector<PredictionRecord> predict_corpus(std::span<NextWordModel* const> models,
                                             std::span<const Sample> samples);
std::string format_predictions(std::span<const PredictionRecord> records);
void write_predictions(const std::filesystem::path& path,
                       std::span<const PredictionRecord> records);
// Gate dump: "# sample_id" then one line per hop with n gate values.
std::string format_gate_dump(std::span<const PredictionRecord> records);

struct PredictionLine {
  std::string sample_id;
  std::vector<std::string> tokens;
};
std::vector<PredictionLine> parse_predictions(std::string_view text,
                                              const std::string& origin = "<memory>");
std::vector<PredictionLine> read_predictions(const std::filesystem::path& path);

}  // namespace smn

#endif  // SMN_INFERENCE_HPP_
