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

#include "smn/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "smn/error.hpp"
#include "smn/io.hpp"
#include "smn/random.hpp"

namespace smn {
namespace {

bool is_reserved_token(std::string_view token) {
  return token == Vocabulary::kPadToken || token == Vocabulary::kStartToken ||
         token == Vocabulary::kEndToken || token == Vocabulary::kUnknownToken;
}

}  // namespace

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] != ' ') ++pos;
    if (pos > start) tokens.emplace_back(text.substr(start, pos - start));
  }
  return tokens;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<Sample> parse_dataset(std::string_view text, const std::string& origin) {
  std::vector<Sample> samples;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t field_start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', field_start);
      fields.push_back(line.substr(field_start, tab - field_start));
      if (tab == std::string_view::npos) break;
      field_start = tab + 1;
    }
    const std::string where = origin + ":" + std::to_string(line_no);
    if (fields.size() != 4) {
      throw DataError(where + ": expected 4 tab-separated fields, found " +
                      std::to_string(fields.size()));
    }
    Sample s{std::string(fields[0]), std::string(fields[1]), split_tokens(fields[2]),
             split_tokens(fields[3])};
    if (s.sample_id.empty() || s.project_id.empty()) {
      throw DataError(where + ": empty sample or project id");
    }
    if (s.code_tokens.empty()) throw DataError(where + ": sample '" + s.sample_id + "' has no code");
    if (s.summary_tokens.empty()) {
      throw DataError(where + ": sample '" + s.sample_id + "' has no summary");
    }
    for (const std::string& t : s.summary_tokens) {
      if (is_reserved_token(t)) {
        throw DataError(where + ": summary contains reserved token '" + t + "'");
      }
    }
    if (!seen.insert(s.sample_id).second) {
      throw DataError(where + ": duplicate sample id '" + s.sample_id + "'");
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

std::string format_dataset(std::span<const Sample> samples) {
  std::string out;
  for (const Sample& s : samples) {
    out += s.sample_id;
    out += '\t';
    out += s.project_id;
    out += '\t';
    out += join_tokens(s.code_tokens);
    out += '\t';
    out += join_tokens(s.summary_tokens);
    out += '\n';
  }
  return out;
}

std::vector<Sample> read_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_text_file(path, "dataset"), path.string());
}

void write_dataset(const std::filesystem::path& path, std::span<const Sample> samples) {
  write_text_file(path, format_dataset(samples), "dataset");
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw VocabularyError("duplicate token '" + tokens_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::build(std::span<const Sample> samples, std::size_t max_size,
                             VocabField field) {
  if (max_size <= kReservedCount) {
    throw UsageError("vocabulary max_size must exceed the 4 reserved ids, got " +
                     std::to_string(max_size));
  }
  if (samples.empty()) throw UsageError("cannot build a vocabulary from an empty corpus");
  std::unordered_map<std::string, std::size_t> counts;
  for (const Sample& s : samples) {
    const auto& toks = field == VocabField::kCode ? s.code_tokens : s.summary_tokens;
    for (const std::string& t : toks) {
      if (!is_reserved_token(t)) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> tokens = {std::string(kPadToken), std::string(kStartToken),
                                     std::string(kEndToken), std::string(kUnknownToken)};
  for (const auto& [token, count] : ranked) {
    if (tokens.size() >= max_size) break;
    tokens.push_back(token);
  }
  return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kReservedCount || tokens[0] != kPadToken || tokens[1] != kStartToken ||
      tokens[2] != kEndToken || tokens[3] != kUnknownToken) {
    throw VocabularyError("vocabulary must start with <PAD>, <s>, </s>, <UNK>");
  }
  return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::read(const std::filesystem::path& path) {
  const std::string text = read_text_file(path, "vocabulary");
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    tokens.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  try {
    return from_tokens(std::move(tokens));
  } catch (const VocabularyError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string Vocabulary::format() const {
  std::string out;
  for (const std::string& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

void Vocabulary::write(const std::filesystem::path& path) const {
  write_text_file(path, format(), "vocabulary");
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::id(std::string_view token) const { return find(token).value_or(kUnknown); }

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw VocabularyError("id " + std::to_string(id) + " outside vocabulary of " +
                          std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocabulary::decode(std::span<const int> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

// ---------------------------------------------------------------------------
// Statements and encoding

StatementMatrix split_statements(std::span<const std::string> code_tokens, const Vocabulary& vocab,
                                 std::size_t max_statements, std::size_t statement_len) {
  if (max_statements == 0 || statement_len == 0) {
    throw UsageError("statement matrix dimensions must be positive");
  }
  StatementMatrix m;
  m.max_statements = max_statements;
  m.statement_len = statement_len;
  m.ids.assign(max_statements * statement_len, Vocabulary::kPad);
  m.lengths.assign(max_statements, 0);

  std::size_t current_len = 0;
  auto close_statement = [&]() {
    if (current_len > 0) {
      m.lengths[m.statement_count] = std::min(current_len, statement_len);
      ++m.statement_count;
    }
    current_len = 0;
  };
  for (const std::string& token : code_tokens) {
    if (m.statement_count == max_statements) break;
    if (token == kNewlineToken) {
      close_statement();
      continue;
    }
    if (current_len < statement_len) {
      m.ids[m.statement_count * statement_len + current_len] = vocab.id(token);
    }
    ++current_len;
  }
  if (m.statement_count < max_statements) close_statement();
  return m;
}

std::size_t count_statements(std::span<const std::string> code_tokens) {
  std::size_t count = 0;
  bool open = false;
  for (const std::string& token : code_tokens) {
    if (token == kNewlineToken) {
      if (open) ++count;
      open = false;
    } else {
      open = true;
    }
  }
  return count + (open ? 1 : 0);
}

EncodedSample encode_sample(const Sample& sample, const Vocabulary& code_vocab,
                            const Vocabulary& summary_vocab, const EncodingShape& shape) {
  if (shape.comlen < 2) throw UsageError("comlen must leave room for <s> and </s>");
  if (shape.tdatlen == 0) throw UsageError("tdatlen must be positive");
  EncodedSample out;
  out.sample_id = sample.sample_id;

  out.code_ids.assign(shape.tdatlen, Vocabulary::kPad);
  const std::size_t code_len = std::min(shape.tdatlen, sample.code_tokens.size());
  for (std::size_t i = 0; i < code_len; ++i) out.code_ids[i] = code_vocab.id(sample.code_tokens[i]);

  out.statements =
      split_statements(sample.code_tokens, code_vocab, shape.max_statements, shape.statement_len);

  out.summary_ids.assign(shape.comlen, Vocabulary::kPad);
  out.summary_ids[0] = Vocabulary::kStart;
  const std::size_t words = std::min(shape.comlen - 2, sample.summary_tokens.size());
  for (std::size_t i = 0; i < words; ++i) {
    out.summary_ids[i + 1] = summary_vocab.id(sample.summary_tokens[i]);
  }
  out.summary_ids[words + 1] = Vocabulary::kEnd;
  return out;
}

// ---------------------------------------------------------------------------
// Splits and filters

CorpusSplit split_by_project(std::span<const Sample> samples, const std::array<double, 3>& ratios,
                             std::uint64_t seed) {
  double total_ratio = 0;
  for (double r : ratios) {
    if (!(r > 0)) throw UsageError("split ratios must be positive");
    total_ratio += r;
  }
  if (std::fabs(total_ratio - 1.0) > 1e-9) throw UsageError("split ratios must sum to 1");

  std::map<std::string, std::size_t> project_sizes;
  for (const Sample& s : samples) ++project_sizes[s.project_id];
  if (project_sizes.size() < 3) {
    throw UsageError("a train/validation/test split needs at least 3 projects, found " +
                     std::to_string(project_sizes.size()));
  }
  std::vector<std::string> projects;
  for (const auto& [p, n] : project_sizes) projects.push_back(p);
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(projects));

  const double total = static_cast<double>(samples.size());
  std::array<double, 3> filled = {0, 0, 0};
  std::array<std::size_t, 3> project_counts = {0, 0, 0};
  std::map<std::string, int> bucket_of;
  for (std::size_t i = 0; i < projects.size(); ++i) {
    const std::size_t remaining = projects.size() - i;
    const std::size_t empty_buckets =
        static_cast<std::size_t>(std::count(project_counts.begin(), project_counts.end(), 0u));
    int best = 0;
    double best_deficit = -INFINITY;
    for (int b = 0; b < 3; ++b) {
      // Once only enough projects remain to give each empty bucket one, they must go there.
      if (remaining <= empty_buckets && project_counts[b] != 0) continue;
      const double deficit = ratios[b] * total - filled[b];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = b;
      }
    }
    bucket_of[projects[i]] = best;
    filled[best] += static_cast<double>(project_sizes[projects[i]]);
    ++project_counts[best];
  }

  CorpusSplit split;
  for (const Sample& s : samples) {
    switch (bucket_of[s.project_id]) {
      case 0: split.train.push_back(s); break;
      case 1: split.validation.push_back(s); break;
      default: split.test.push_back(s); break;
    }
  }
  return split;
}

std::vector<Sample> filter_by_length(std::span<const Sample> samples, std::size_t min_statements) {
  if (min_statements == 0) throw UsageError("min_statements must be at least 1");
  std::vector<Sample> out;
  for (const Sample& s : samples) {
    if (count_statements(s.code_tokens) >= min_statements) out.push_back(s);
  }
  return out;
}

std::vector<Sample> exclude_samples(std::span<const Sample> samples,
                                    const std::set<std::string>& excluded_ids) {
  std::vector<Sample> out;
  for (const Sample& s : samples) {
    if (!excluded_ids.contains(s.sample_id)) out.push_back(s);
  }
  return out;
}

std::set<std::string> read_id_list(const std::filesystem::path& path) {
  std::set<std::string> ids;
  for (const std::string& token : split_tokens([&] {
         std::string text = read_text_file(path, "exclusion list");
         std::replace(text.begin(), text.end(), '\n', ' ');
         std::replace(text.begin(), text.end(), '\r', ' ');
         std::replace(text.begin(), text.end(), '\t', ' ');
         return text;
       }())) {
    ids.insert(token);
  }
  return ids;
}

}  // namespace smn
