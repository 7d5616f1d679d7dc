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

#include "smn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <type_traits>

#include "smn/checkpoint.hpp"
#include "smn/error.hpp"
#include "smn/inference.hpp"
#include "smn/io.hpp"
#include "smn/metrics.hpp"
#include "smn/trainer.hpp"

namespace smn {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Model keys that a run config does not carry: they come from the vocabulary
// files and from `seed`.
const std::set<std::string>& derived_model_keys() {
  static const std::set<std::string> keys = {"code_vocab_size", "rng_seed", "summary_vocab_size"};
  return keys;
}

const std::vector<std::string>& own_keys() {
  static const std::vector<std::string> keys = {
      "ablation",     "checkpoint",     "clip_norm",      "code_vocab_max", "data_dir",
      "dataset",      "exclude_ids",    "learning_rate",  "max_epochs",     "min_statements",
      "predictions",  "predictions_b",  "report",         "seed",           "split_ratios",
      "summary_vocab_max", "synthetic"};
  return keys;
}

template <typename T>
T get_key(const json& j, const std::string& key) {
  if constexpr (std::is_integral_v<T>) {
    const json& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError("key '" + key + "' must be a non-negative integer");
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.at(key).is_number()) throw ConfigError("key '" + key + "' must be a number");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

ModelConfig apply_overrides(const ModelConfig& base, const json& overrides,
                            const std::string& where) {
  if (!overrides.is_object()) throw ConfigError(where + ": overrides must be an object");
  json merged = to_json(base);
  for (const auto& [key, value] : overrides.items()) {
    if (!merged.contains(key) || derived_model_keys().contains(key)) {
      throw ConfigError(where + ": '" + key + "' is not an overridable model key");
    }
    merged[key] = value;
  }
  ModelConfig out;
  try {
    out = model_config_from_json(merged);
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  out.validate();
  return out;
}

bool safe_name(const std::string& name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == '+';
  }) && name != "." && name != "..";
}

const std::string& require_path(const std::string& value, const std::string& key,
                                const std::string& command) {
  if (value.empty()) throw ConfigError(command + " needs '" + key + "'");
  return value;
}

fs::path output_path(const CommandOptions& options, const std::string& configured,
                     const std::string& key, const std::string& command) {
  if (!options.out.empty()) return options.out;
  return require_path(configured, key, command);
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  return fs::path(p.string() + suffix);
}

RunConfig with_seed(const RunConfig& config, const CommandOptions& options) {
  RunConfig c = config;
  if (options.seed) c.seed = *options.seed;
  c.validate();
  return c;
}

void say(const CommandOptions& options, const std::string& message) {
  if (options.log) *options.log << message << '\n';
}

std::string without_prefix(const std::string& what, const std::string& prefix) {
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

// Runs a loader, pointing a data error at the command that makes the file.
template <typename F>
auto load_artifact(const std::string& producer, F&& load) -> decltype(load()) {
  const std::string hint = "`smn " + producer + "`";
  auto message = [&](const std::string& what) {
    return what.find(hint) == std::string::npos ? what + " (expected output of " + hint + ")" : what;
  };
  try {
    return load();
  } catch (const DataError& e) {
    throw DataError(message(without_prefix(e.what(), "data error: ")));
  } catch (const VocabularyError& e) {
    throw DataError(message(e.what()));
  }
}

std::vector<EncodedSample> encode_all(std::span<const Sample> samples, const PreparedData& data,
                                      const ModelConfig& model) {
  std::vector<EncodedSample> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) {
    out.push_back(encode_sample(s, data.code_vocab, data.summary_vocab, model.encoding_shape()));
  }
  return out;
}

ModelConfig sized_model(const RunConfig& config, const PreparedData& data) {
  ModelConfig m = config.seeded_model();
  m.code_vocab_size = data.code_vocab.size();
  m.summary_vocab_size = data.summary_vocab.size();
  m.validate();
  return m;
}

TrainOptions train_options(const RunConfig& config, std::ostream* log) {
  TrainOptions o;
  o.max_epochs = config.max_epochs;
  o.adam.learning_rate = config.learning_rate;
  o.clip_norm = config.clip_norm;
  o.log = log;
  return o;
}

std::vector<PredictionLine> to_lines(std::span<const PredictionRecord> records) {
  std::vector<PredictionLine> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back({r.sample_id, r.predicted_tokens});
  return lines;
}

std::string system_name(const fs::path& predictions) { return predictions.stem().string(); }

std::vector<PredictionLine> load_predictions(const fs::path& path) {
  return load_artifact("predict", [&] { return read_predictions(path); });
}

}  // namespace

std::vector<AblationEntry> default_ablation_sweep(std::size_t base_h) {
  std::vector<AblationEntry> out;
  for (std::size_t h = 1; h <= 5; ++h) {
    out.push_back({"h" + std::to_string(h),
                   {{"h", h}, {"statement_encoding", "positional"}, {"gate_query", "constant_q"}}});
  }
  const std::string suffix = "_h" + std::to_string(base_h);
  out.push_back({"eos" + suffix,
                 {{"h", base_h}, {"statement_encoding", "eos"}, {"gate_query", "constant_q"}}});
  out.push_back({"summary_vector" + suffix,
                 {{"h", base_h}, {"statement_encoding", "positional"}, {"gate_query", "summary_vector"}}});
  out.push_back({"eos_summary_vector" + suffix,
                 {{"h", base_h}, {"statement_encoding", "eos"}, {"gate_query", "summary_vector"}}});
  return out;
}

void RunConfig::validate() const {
  model.validate();
  double total = 0;
  for (double r : split_ratios) {
    if (!(r > 0) || !std::isfinite(r)) throw ConfigError("split_ratios must all be positive");
    total += r;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw ConfigError("split_ratios must sum to 1, got " + format_fixed(total, 6));
  }
  if (max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (!(clip_norm >= 0) || !std::isfinite(clip_norm)) {
    throw ConfigError("clip_norm must be non-negative (0 disables clipping)");
  }
  if (code_vocab_max <= Vocabulary::kReservedCount || summary_vocab_max <= Vocabulary::kReservedCount) {
    throw ConfigError("vocabulary limits must exceed the 4 reserved tokens");
  }
  if (synthetic) synthetic->validate();
  std::set<std::string> names;
  for (const auto& e : ablation) {
    if (!safe_name(e.name)) {
      throw ConfigError("ablation name '" + e.name + "' must be non-empty [A-Za-z0-9_.+-]");
    }
    if (!names.insert(e.name).second) throw ConfigError("duplicate ablation name '" + e.name + "'");
    apply_overrides(model, e.overrides, "ablation '" + e.name + "'");
  }
}

ModelConfig RunConfig::seeded_model() const {
  ModelConfig m = model;
  m.rng_seed = seed;
  return m;
}

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k = own_keys();
    for (const auto& key : model_config_keys()) {
      if (!derived_model_keys().contains(key)) k.push_back(key);
    }
    std::sort(k.begin(), k.end());
    return k;
  }();
  return keys;
}

json to_json(const RunConfig& c) {
  json j = to_json(c.model);
  for (const auto& key : derived_model_keys()) j.erase(key);
  json ablation = json::array();
  for (const auto& e : c.ablation) ablation.push_back({{"name", e.name}, {"overrides", e.overrides}});
  j["ablation"] = ablation;
  j["checkpoint"] = c.checkpoint;
  j["clip_norm"] = c.clip_norm;
  j["code_vocab_max"] = c.code_vocab_max;
  j["data_dir"] = c.data_dir;
  j["dataset"] = c.dataset;
  j["exclude_ids"] = c.exclude_ids;
  j["learning_rate"] = c.learning_rate;
  j["max_epochs"] = c.max_epochs;
  j["min_statements"] = c.min_statements;
  j["predictions"] = c.predictions;
  j["predictions_b"] = c.predictions_b;
  j["report"] = c.report;
  j["seed"] = c.seed;
  j["split_ratios"] = c.split_ratios;
  j["summary_vocab_max"] = c.summary_vocab_max;
  j["synthetic"] = c.synthetic ? to_json(*c.synthetic) : json(nullptr);
  return j;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  const auto& known = run_config_keys();
  json model_part = json::object();
  for (const auto& [key, value] : j.items()) {
    if (!std::binary_search(known.begin(), known.end(), key)) {
      throw ConfigError("unknown key '" + key + "'");
    }
    if (std::find(own_keys().begin(), own_keys().end(), key) == own_keys().end()) {
      model_part[key] = value;
    }
  }
  RunConfig c;
  try {
    c.model = model_config_from_json(model_part);
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) field = get_key<std::decay_t<decltype(field)>>(j, key);
  };
  opt("checkpoint", c.checkpoint);
  opt("clip_norm", c.clip_norm);
  opt("code_vocab_max", c.code_vocab_max);
  opt("data_dir", c.data_dir);
  opt("dataset", c.dataset);
  opt("exclude_ids", c.exclude_ids);
  opt("learning_rate", c.learning_rate);
  opt("max_epochs", c.max_epochs);
  opt("min_statements", c.min_statements);
  opt("predictions", c.predictions);
  opt("predictions_b", c.predictions_b);
  opt("report", c.report);
  opt("seed", c.seed);
  opt("split_ratios", c.split_ratios);
  opt("summary_vocab_max", c.summary_vocab_max);
  if (j.contains("synthetic") && !j.at("synthetic").is_null()) {
    try {
      c.synthetic = synthetic_spec_from_json(j.at("synthetic"));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("key 'synthetic': ") + e.what());
    }
  }
  if (j.contains("ablation")) {
    const json& a = j.at("ablation");
    if (!a.is_array()) throw ConfigError("key 'ablation' must be an array");
    for (const json& e : a) {
      if (!e.is_object() || !e.contains("name") || e.size() > 2 ||
          (e.size() == 2 && !e.contains("overrides"))) {
        throw ConfigError("ablation entries are {\"name\": ..., \"overrides\": {...}}");
      }
      c.ablation.push_back({get_key<std::string>(e, "name"),
                            e.contains("overrides") ? e.at("overrides") : json::object()});
    }
  }
  c.model.code_vocab_size = c.code_vocab_max;
  c.model.summary_vocab_size = c.summary_vocab_max;
  c.model.rng_seed = c.seed;
  c.validate();
  return c;
}

RunConfig read_run_config(const fs::path& path) {
  const std::string text = read_text_file(path, "run config");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return run_config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + without_prefix(e.what(), "config error: "));
  }
}

std::string canonical_json(const json& j) { return j.dump(2) + "\n"; }

DataLayout::DataLayout(const fs::path& dir)
    : train(dir / "train.tsv"),
      validation(dir / "valid.tsv"),
      test(dir / "test.tsv"),
      code_vocab(dir / "code.vocab"),
      summary_vocab(dir / "summary.vocab") {}

PreparedData load_prepared(const fs::path& dir) {
  const DataLayout layout(dir);
  return load_artifact("prepare", [&] {
    return PreparedData{read_dataset(layout.train), read_dataset(layout.validation),
                        read_dataset(layout.test), Vocabulary::read(layout.code_vocab),
                        Vocabulary::read(layout.summary_vocab)};
  });
}

std::vector<fs::path> cmd_prepare(const RunConfig& base, const CommandOptions& options) {
  const RunConfig config = with_seed(base, options);
  const fs::path dir = output_path(options, config.data_dir, "data_dir", "prepare");
  std::vector<Sample> samples;
  if (!config.dataset.empty()) {
    samples = read_dataset(config.dataset);
  } else if (config.synthetic) {
    samples = generate_synthetic_corpus(*config.synthetic, config.seed);
  } else {
    throw ConfigError("prepare needs 'dataset' or 'synthetic'");
  }
  const std::size_t raw = samples.size();
  if (!config.exclude_ids.empty()) samples = exclude_samples(samples, read_id_list(config.exclude_ids));
  if (config.min_statements > 0) samples = filter_by_length(samples, config.min_statements);
  CorpusSplit split = split_by_project(samples, config.split_ratios, config.seed);
  if (split.train.empty()) throw DataError("no training samples left after filtering");
  const Vocabulary code = Vocabulary::build(split.train, config.code_vocab_max, VocabField::kCode);
  const Vocabulary summary =
      Vocabulary::build(split.train, config.summary_vocab_max, VocabField::kSummary);

  const DataLayout layout(dir);
  write_dataset(layout.train, split.train);
  write_dataset(layout.validation, split.validation);
  write_dataset(layout.test, split.test);
  code.write(layout.code_vocab);
  summary.write(layout.summary_vocab);
  say(options, "prepare: " + std::to_string(raw) + " samples, kept " +
                   std::to_string(samples.size()) + "; train " + std::to_string(split.train.size()) +
                   ", valid " + std::to_string(split.validation.size()) + ", test " +
                   std::to_string(split.test.size()) + "; vocabularies " +
                   std::to_string(code.size()) + "/" + std::to_string(summary.size()));
  return {layout.train, layout.validation, layout.test, layout.code_vocab, layout.summary_vocab};
}

std::vector<fs::path> cmd_train(const RunConfig& base, const CommandOptions& options) {
  const RunConfig config = with_seed(base, options);
  require_path(config.data_dir, "data_dir", "train");
  const fs::path ckpt = output_path(options, config.checkpoint, "checkpoint", "train");
  const PreparedData data = load_prepared(config.data_dir);
  const ModelConfig model = sized_model(config, data);
  const auto train_set = encode_all(data.train, data, model);
  const auto val_set = encode_all(data.validation, data, model);
  std::ostringstream log;
  const TrainResult result = train(train_set, val_set, model, train_options(config, &log));
  save_checkpoint(ckpt, to_json(model), result.best);
  const fs::path log_path = with_suffix(ckpt, ".log");
  write_text_file(log_path, log.str(), "training log");
  const EpochReport& best = result.reports[result.best_epoch];
  say(options, "train: best epoch " + std::to_string(best.epoch) + " of " +
                   std::to_string(result.reports.size()) + ", val accuracy " +
                   format_fixed(best.val_accuracy, 4) + ", val loss " +
                   format_fixed(best.val_loss, 4));
  return {ckpt, log_path};
}

std::vector<fs::path> cmd_predict(const RunConfig& base, const CommandOptions& options) {
  const RunConfig config = with_seed(base, options);
  require_path(config.data_dir, "data_dir", "predict");
  const fs::path out = output_path(options, config.predictions, "predictions", "predict");
  std::vector<std::string> paths = options.checkpoints;
  if (paths.empty()) paths.push_back(require_path(config.checkpoint, "checkpoint", "predict"));
  PreparedData data = load_prepared(config.data_dir);
  auto code = std::make_shared<const Vocabulary>(std::move(data.code_vocab));
  auto summary = std::make_shared<const Vocabulary>(std::move(data.summary_vocab));
  std::vector<std::unique_ptr<ModelPredictor>> owned;
  std::vector<NextWordModel*> models;
  for (const auto& p : paths) {
    owned.push_back(load_artifact("train", [&] { return ModelPredictor::from_checkpoint(p, code, summary); }));
    models.push_back(owned.back().get());
  }
  const auto records = predict_corpus(models, data.test);
  write_predictions(out, records);
  std::vector<fs::path> written = {out};
  if (options.dump_gates) {
    const fs::path gates = with_suffix(out, ".gates");
    write_text_file(gates, format_gate_dump(records), "gate dump");
    written.push_back(gates);
  }
  say(options, "predict: " + std::to_string(records.size()) + " summaries from " +
                   std::to_string(models.size()) + " model(s)");
  return written;
}

std::vector<fs::path> cmd_evaluate(const RunConfig& base, const CommandOptions& options) {
  const RunConfig config = with_seed(base, options);
  require_path(config.data_dir, "data_dir", "evaluate");
  const fs::path pred_a = require_path(config.predictions, "predictions", "evaluate");
  const fs::path out = output_path(options, config.report, "report", "evaluate");
  const std::vector<Sample> refs =
      load_artifact("prepare", [&] { return read_dataset(DataLayout(config.data_dir).test); });

  std::vector<MetricRow> rows;
  const ScoredCorpus a = score_corpus(refs, load_predictions(pred_a));
  rows.push_back({system_name(pred_a), a.mean_meteor, a.bleu, std::nullopt, true});
  if (!config.predictions_b.empty()) {
    const fs::path pred_b = config.predictions_b;
    const ScoredCorpus b = score_corpus(refs, load_predictions(pred_b));
    std::optional<TTestResult> t;
    if (a.meteor.size() >= 2) t = paired_t_test(b.meteor, a.meteor);
    rows.push_back({system_name(pred_b), b.mean_meteor, b.bleu, t, false});
  }
  json j_rows = json::array();
  for (const auto& r : rows) j_rows.push_back(to_json(r));
  const json report = {{"rows", j_rows}, {"samples", refs.size()}};
  write_text_file(out, format_metric_table(rows), "metric report");
  const fs::path json_path = with_suffix(out, ".json");
  write_text_file(json_path, canonical_json(report), "metric report");
  say(options, "evaluate: " + rows.front().system + " METEOR " +
                   format_fixed(100 * rows.front().meteor, 2) + " BLEU " +
                   format_fixed(rows.front().bleu, 2));
  return {out, json_path};
}

std::vector<fs::path> cmd_analyze(const RunConfig& base, const CommandOptions& options) {
  const RunConfig config = with_seed(base, options);
  require_path(config.data_dir, "data_dir", "analyze");
  const fs::path pred_a = require_path(config.predictions, "predictions", "analyze");
  const fs::path pred_b = require_path(config.predictions_b, "predictions_b", "analyze");
  const fs::path out = output_path(options, config.report, "report", "analyze");
  const std::vector<Sample> refs =
      load_artifact("prepare", [&] { return read_dataset(DataLayout(config.data_dir).test); });
  const ScoredCorpus a = score_corpus(refs, load_predictions(pred_a));
  const ScoredCorpus b = score_corpus(refs, load_predictions(pred_b));
  const SetPartition partition = difference_set(a, b);
  const ImprovedSet ab = improved_set(a.ids, a.meteor, b.meteor);
  const ImprovedSet ba = improved_set(a.ids, b.meteor, a.meteor);
  const std::string na = system_name(pred_a), nb = system_name(pred_b);
  write_text_file(out, format_analysis(na, nb, partition, ab, ba), "analysis report");
  const fs::path json_path = with_suffix(out, ".json");
  write_text_file(json_path, canonical_json(analysis_json(na, nb, partition, ab, ba)),
                  "analysis report");
  say(options, "analyze: difference set " + format_fixed(partition.difference_pct, 2) + "%");
  return {out, json_path};
}

AblationResult run_ablation(const RunConfig& base, const CommandOptions& options) {
  const RunConfig config = with_seed(base, options);
  require_path(config.data_dir, "data_dir", "ablate");
  const fs::path out = output_path(options, config.report, "report", "ablate");
  const fs::path ckpt_dir = out.parent_path() / (out.stem().string() + "_checkpoints");
  const PreparedData data = load_prepared(config.data_dir);
  const ModelConfig model = sized_model(config, data);
  auto code = std::make_shared<const Vocabulary>(data.code_vocab);
  auto summary = std::make_shared<const Vocabulary>(data.summary_vocab);

  std::vector<AblationEntry> sweep =
      config.ablation.empty() ? default_ablation_sweep(model.h) : config.ablation;
  std::vector<ModelConfig> configs;
  for (const auto& e : sweep) configs.push_back(apply_overrides(model, e.overrides, "ablation '" + e.name + "'"));
  const json base_json = to_json(model);
  auto is_base = [&](const ModelConfig& c) { return to_json(c) == base_json; };
  if (std::none_of(configs.begin(), configs.end(), is_base)) {
    std::string name = "default";
    while (std::any_of(sweep.begin(), sweep.end(), [&](const auto& e) { return e.name == name; })) {
      name += "_";
    }
    sweep.insert(sweep.begin(), {name, json::object()});
    configs.insert(configs.begin(), model);
  }

  AblationResult result;
  result.baseline = static_cast<std::size_t>(
      std::find_if(configs.begin(), configs.end(), is_base) - configs.begin());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const ModelConfig& c = configs[i];
    const auto train_set = encode_all(data.train, data, c);
    const auto val_set = encode_all(data.validation, data, c);
    std::ostringstream log;
    TrainResult trained = train(train_set, val_set, c, train_options(config, &log));

    AblationRow row;
    row.name = sweep[i].name;
    row.model = c;
    row.parameters = trained.best.parameter_count();
    row.best_epoch = trained.reports[trained.best_epoch].epoch;
    row.finite = std::all_of(trained.reports.begin(), trained.reports.end(), [](const auto& r) {
      return std::isfinite(r.train_loss) && std::isfinite(r.val_loss);
    });
    row.checkpoint = ckpt_dir / (row.name + ".ckpt");
    save_checkpoint(row.checkpoint, to_json(c), trained.best);
    const fs::path log_path = with_suffix(row.checkpoint, ".log");
    write_text_file(log_path, log.str(), "training log");
    result.written.push_back(row.checkpoint);
    result.written.push_back(log_path);

    ModelPredictor predictor(c, std::move(trained.best), code, summary);
    NextWordModel* models[] = {&predictor};
    const auto lines = to_lines(predict_corpus(models, data.test));
    const ScoredCorpus scored = score_corpus(data.test, lines);
    row.meteor = scored.meteor;
    row.mean_meteor = scored.mean_meteor;
    row.bleu = scored.bleu;
    say(options, "ablate: " + row.name + " METEOR " + format_fixed(100 * row.mean_meteor, 2) +
                     " BLEU " + format_fixed(row.bleu, 2) + " best epoch " +
                     std::to_string(row.best_epoch));
    result.rows.push_back(std::move(row));
  }

  const AblationRow& baseline = result.rows[result.baseline];
  std::vector<MetricRow> metric_rows;
  json j_rows = json::array();
  std::string configs_table = "configuration            h  encoding    gate_query      squash  parameters  best_epoch\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const AblationRow& r = result.rows[i];
    MetricRow m{r.name, r.mean_meteor, r.bleu, std::nullopt, i == result.baseline};
    if (i != result.baseline && r.meteor.size() >= 2) m.t_test = paired_t_test(r.meteor, baseline.meteor);
    metric_rows.push_back(m);
    json jr = to_json(m);
    jr["best_epoch"] = r.best_epoch;
    jr["checkpoint"] = r.checkpoint.filename().string();
    jr["finite"] = r.finite;
    jr["h"] = r.model.h;
    jr["encoder_kind"] = to_string(r.model.encoder_kind);
    jr["gate_query"] = to_string(r.model.gate_query);
    jr["gate_squash"] = to_string(r.model.gate_squash);
    jr["parameters"] = r.parameters;
    jr["statement_encoding"] = to_string(r.model.statement_encoding);
    j_rows.push_back(jr);
    char line[200];
    std::snprintf(line, sizeof line, "%-24s %zu  %-10s  %-14s  %-6s  %10zu  %10zu\n", r.name.c_str(),
                  r.model.h, to_string(r.model.statement_encoding).c_str(),
                  to_string(r.model.gate_query).c_str(), to_string(r.model.gate_squash).c_str(),
                  r.parameters, r.best_epoch);
    configs_table += line;
  }
  const std::string text = "ablation over " + std::to_string(result.rows.size()) +
                           " configurations, seed " + std::to_string(config.seed) +
                           ", baseline " + baseline.name + ", " +
                           std::to_string(data.test.size()) + " test samples\n\n" +
                           format_metric_table(metric_rows) + "\n" + configs_table;
  const json report = {{"baseline", baseline.name},
                       {"rows", j_rows},
                       {"seed", config.seed},
                       {"test_samples", data.test.size()}};
  write_text_file(out, text, "ablation report");
  const fs::path json_path = with_suffix(out, ".json");
  write_text_file(json_path, canonical_json(report), "ablation report");
  result.written.push_back(out);
  result.written.push_back(json_path);
  return result;
}

std::vector<fs::path> cmd_ablate(const RunConfig& config, const CommandOptions& options) {
  return run_ablation(config, options).written;
}

GradcheckReport cmd_gradcheck(const RunConfig& base, const CommandOptions& options) {
  const RunConfig config = with_seed(base, options);
  GradcheckOptions go;
  go.seed = config.seed;
  const GradcheckReport report = run_gradcheck(config.seeded_model(), go, options.gate_fn);
  const std::string text = format_gradcheck_report(report);
  if (options.log) *options.log << text;
  const std::string out = !options.out.empty() ? options.out : config.report;
  if (!out.empty()) {
    write_text_file(out, text, "gradcheck report");
    write_text_file(with_suffix(out, ".json"), canonical_json(to_json(report)), "gradcheck report");
  }
  if (!report.passed()) {
    std::string failed;
    for (const auto& e : report.entries) {
      if (!e.passed) failed += (failed.empty() ? "" : ", ") + e.name;
    }
    throw VerificationError("gradient check failed for " + failed);
  }
  return report;
}

int exit_code_for(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (!err) return 2;
  switch (err->kind()) {
    case ErrorKind::kUsage:
    case ErrorKind::kConfig:
      return 1;
    case ErrorKind::kVerification:
      return 3;
    default:
      return 2;
  }
}

}  // namespace smn
