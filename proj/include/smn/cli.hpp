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

#ifndef SMN_CLI_HPP_
#define SMN_CLI_HPP_

// Pipeline subcommands behind the smn executable. Each takes a RunConfig and
// reads and writes files only; nothing here touches global state.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smn/corpus.hpp"
#include "smn/gradcheck.hpp"
#include "smn/model.hpp"
#include "smn/synthetic.hpp"

namespace smn {

struct AblationEntry {
  std::string name;
  nlohmann::json overrides;  // model config keys

  bool operator==(const AblationEntry&) const = default;
};

// h = 1..5 with positional encoding and constant Q, then eos, summary_vector
// and eos + summary_vector at the base h.
std::vector<AblationEntry> default_ablation_sweep(std::size_t base_h);

struct RunConfig {
  // Vocabulary sizes are taken from the prepared vocabulary files and
  // rng_seed from `seed`; the serialized form has neither.
  ModelConfig model;

  std::string dataset;                      // raw tab-separated corpus for prepare
  std::optional<SyntheticSpec> synthetic;   // used by prepare when dataset is empty
  std::string data_dir;                     // prepared splits and vocabularies
  std::string checkpoint;
  std::string predictions;
  std::string predictions_b;                // second system for analyze and evaluate
  std::string report;
  std::string exclude_ids;                  // optional id list dropped by prepare

  std::array<double, 3> split_ratios = {0.8, 0.1, 0.1};
  std::uint64_t seed = 0;
  std::size_t max_epochs = 10;
  double learning_rate = 1e-3;
  double clip_norm = 0;
  std::size_t min_statements = 0;
  std::size_t code_vocab_max = 69725;
  std::size_t summary_vocab_max = 10908;
  std::vector<AblationEntry> ablation;      // empty selects default_ablation_sweep

  // Throws ConfigError.
  void validate() const;
  // The model config with rng_seed = seed.
  ModelConfig seeded_model() const;
};

const std::vector<std::string>& run_config_keys();
nlohmann::json to_json(const RunConfig& config);
// Unknown keys are rejected; missing keys keep their defaults.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig read_run_config(const std::filesystem::path& path);
// Sorted keys, two-space indent, trailing newline.
std::string canonical_json(const nlohmann::json& j);

struct CommandOptions {
  std::optional<std::uint64_t> seed;          // overrides RunConfig::seed
  std::vector<std::string> checkpoints;      // predict: ensemble members
  std::string out;                           // overrides the primary output path
  bool dump_gates = false;
  std::ostream* log = nullptr;               // progress messages
  GateFn gate_fn = gate;                     // gradcheck only
};

// Files of a prepared data directory.
struct DataLayout {
  std::filesystem::path train, validation, test, code_vocab, summary_vocab;
  explicit DataLayout(const std::filesystem::path& dir);
};

struct PreparedData {
  std::vector<Sample> train, validation, test;
  Vocabulary code_vocab, summary_vocab;
};
// Throws DataError naming the missing or corrupt file and `smn prepare`.
PreparedData load_prepared(const std::filesystem::path& dir);

// Every command returns the files it wrote, in a fixed order.
std::vector<std::filesystem::path> cmd_prepare(const RunConfig& config, const CommandOptions& options = {});
std::vector<std::filesystem::path> cmd_train(const RunConfig& config, const CommandOptions& options = {});
std::vector<std::filesystem::path> cmd_predict(const RunConfig& config, const CommandOptions& options = {});
std::vector<std::filesystem::path> cmd_evaluate(const RunConfig& config, const CommandOptions& options = {});
std::vector<std::filesystem::path> cmd_analyze(const RunConfig& config, const CommandOptions& options = {});

struct AblationRow {
  std::string name;
  ModelConfig model;
  std::size_t parameters = 0;
  std::size_t best_epoch = 0;  // from 1
  bool finite = true;          // every logged loss was finite
  std::filesystem::path checkpoint;
  std::vector<double> meteor;  // per test sample
  double mean_meteor = 0;
  double bleu = 0;
};
struct AblationResult {
  std::vector<AblationRow> rows;
  std::size_t baseline = 0;  // index into rows
  std::vector<std::filesystem::path> written;
};
AblationResult run_ablation(const RunConfig& config, const CommandOptions& options = {});
std::vector<std::filesystem::path> cmd_ablate(const RunConfig& config, const CommandOptions& options = {});

// Writes the report when an output path is configured, then throws
// VerificationError when any check failed.
GradcheckReport cmd_gradcheck(const RunConfig& config, const CommandOptions& options = {});

// 0 success, 1 usage or config, 2 data, 3 verification.
int exit_code_for(const std::exception& e);

}  // namespace smn

#endif  // SMN_CLI_HPP_
