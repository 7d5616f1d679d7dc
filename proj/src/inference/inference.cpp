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

#include "smn/inference.hpp"

#include <cmath>
#include <cstdio>

#include "smn/checkpoint.hpp"
#include "smn/error.hpp"
#include "smn/io.hpp"
#include "smn/trainer.hpp"

namespace smn {

ModelPredictor::ModelPredictor(ModelConfig config, ParameterSet params,
                               std::shared_ptr<const Vocabulary> code_vocab,
                               std::shared_ptr<const Vocabulary> summary_vocab)
    : config_(std::move(config)),
      params_(std::make_unique<ParameterSet>(std::move(params))),
      code_vocab_(std::move(code_vocab)),
      summary_vocab_(std::move(summary_vocab)) {
  if (!code_vocab_ || !summary_vocab_) throw UsageError("predictor needs both vocabularies");
  if (code_vocab_->size() != config_.code_vocab_size ||
      summary_vocab_->size() != config_.summary_vocab_size) {
    throw ConfigError("vocabularies of size " + std::to_string(code_vocab_->size()) + "/" +
                      std::to_string(summary_vocab_->size()) + " do not match the model's " +
                      std::to_string(config_.code_vocab_size) + "/" +
                      std::to_string(config_.summary_vocab_size));
  }
  model_ = std::make_unique<Model>(config_, *params_);
}

std::unique_ptr<ModelPredictor> ModelPredictor::from_checkpoint(
    const std::filesystem::path& path, std::shared_ptr<const Vocabulary> code_vocab,
    std::shared_ptr<const Vocabulary> summary_vocab) {
  Checkpoint ckpt = load_checkpoint(path);
  ModelConfig config;
  try {
    config = model_config_from_json(ckpt.config);
    config.validate();
  } catch (const ConfigError& e) {
    throw DataError("checkpoint '" + path.string() + "' holds an invalid config: " + e.what());
  }
  return std::make_unique<ModelPredictor>(config, std::move(ckpt.params), std::move(code_vocab),
                                          std::move(summary_vocab));
}

void ModelPredictor::begin(const Sample& sample) {
  NoGradGuard guard;
  state_ = model_->encode(encode_sample(sample, *code_vocab_, *summary_vocab_,
                                        config_.encoding_shape()));
  last_trace_.reset();
}

std::vector<double> ModelPredictor::next(std::span<const int> prefix) {
  if (!state_) throw UsageError("next() called before begin()");
  NoGradGuard guard;
  ForwardOutput out = model_->decode(*state_, prefix);
  last_trace_ = std::move(out.trace);
  auto d = out.next_word_dist.data();
  return {d.begin(), d.end()};
}

std::vector<double> ensemble_distribution(std::span<const std::vector<double>> dists) {
  if (dists.empty()) throw UsageError("cannot ensemble zero distributions");
  const std::size_t v = dists[0].size();
  std::vector<double> mean(v, 0.0);
  for (const auto& d : dists) {
    if (d.size() != v) {
      throw DimensionError("ensemble members disagree on vocabulary size: " + std::to_string(v) +
                           " vs " + std::to_string(d.size()));
    }
    double total = 0;
    for (double p : d) total += p;
    if (!std::isfinite(total) || std::fabs(total - 1.0) > 1e-9) {
      throw NumericInputError("ensemble member is not a probability vector (sums to " +
                              std::to_string(total) + ")");
    }
    for (std::size_t i = 0; i < v; ++i) mean[i] += d[i];
  }
  const double k = static_cast<double>(dists.size());
  for (double& p : mean) p /= k;
  return mean;
}

PredictionRecord greedy_decode(std::span<NextWordModel* const> models, const Sample& sample,
                               bool keep_distributions) {
  if (models.empty()) throw UsageError("greedy decoding needs at least one model");
  const Vocabulary& vocab = models[0]->summary_vocab();
  const std::size_t comlen = models[0]->comlen();
  for (NextWordModel* m : models) {
    if (!(m->summary_vocab() == vocab)) {
      throw UsageError("ensemble members use different summary vocabularies");
    }
    if (m->comlen() != comlen) throw UsageError("ensemble members use different comlen");
  }
  for (NextWordModel* m : models) m->begin(sample);

  PredictionRecord record;
  record.sample_id = sample.sample_id;
  std::vector<int> prefix = {Vocabulary::kStart};
  std::vector<std::vector<double>> dists(models.size());
  while (prefix.size() < comlen) {
    for (std::size_t i = 0; i < models.size(); ++i) dists[i] = models[i]->next(prefix);
    if (!record.trace) {
      if (auto* p = dynamic_cast<ModelPredictor*>(models[0]); p && p->last_trace()) {
        record.trace = p->last_trace();
      }
    }
    std::vector<double> mean = ensemble_distribution(dists);
    if (mean.size() != vocab.size()) {
      throw DimensionError("model emits " + std::to_string(mean.size()) +
                           " probabilities for a vocabulary of " + std::to_string(vocab.size()));
    }
    if (keep_distributions) record.distributions.push_back(mean);
    // Only </s> among the reserved ids may be emitted.
    for (int id : {Vocabulary::kPad, Vocabulary::kStart, Vocabulary::kUnknown}) {
      mean[static_cast<std::size_t>(id)] = -1.0;
    }
    const int id = static_cast<int>(argmax(mean));
    if (id == Vocabulary::kEnd) break;
    prefix.push_back(id);
    record.predicted_ids.push_back(id);
    record.predicted_tokens.push_back(vocab.token(id));
  }
  return record;
}

std::vector<PredictionRecord> predict_corpus(std::span<NextWordModel* const> models,
                                             std::span<const Sample> samples) {
  std::vector<PredictionRecord> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(greedy_decode(models, s));
  return out;
}

std::string format_predictions(std::span<const PredictionRecord> records) {
  std::string out;
  for (const PredictionRecord& r : records) {
    out += r.sample_id;
    out += '\t';
    out += join_tokens(r.predicted_tokens);
    out += '\n';
  }
  return out;
}

void write_predictions(const std::filesystem::path& path,
                       std::span<const PredictionRecord> records) {
  write_text_file(path, format_predictions(records), "prediction file");
}

std::string format_gate_dump(std::span<const PredictionRecord> records) {
  std::string out;
  char buf[32];
  for (const PredictionRecord& r : records) {
    out += "# " + r.sample_id + "\n";
    if (!r.trace) continue;
    for (const auto& hop : r.trace->gates) {
      for (std::size_t t = 0; t < hop.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%s%.6f", t ? " " : "", hop[t]);
        out += buf;
      }
      out += '\n';
    }
  }
  return out;
}

std::vector<PredictionLine> parse_predictions(std::string_view text, const std::string& origin) {
  std::vector<PredictionLine> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
      throw DataError(origin + ":" + std::to_string(line_no) +
                      ": expected 'sample_id<TAB>tokens'");
    }
    if (tab == 0) throw DataError(origin + ":" + std::to_string(line_no) + ": empty sample id");
    out.push_back({std::string(line.substr(0, tab)), split_tokens(line.substr(tab + 1))});
  }
  return out;
}

std::vector<PredictionLine> read_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_text_file(path, "prediction file"), path.string());
}

}  // namespace smn
