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

#ifndef SMN_CORPUS_HPP_
#define SMN_CORPUS_HPP_

// Token-level datasets of (code, summary) pairs.
//
// Dataset file: UTF-8, one sample per line,
//   sample_id \t project_id \t code tokens (space separated, may contain <NL>) \t summary tokens
//
// Vocabulary file: one token per line, line number (from 0) = id, first four
// lines are <PAD>, <s>, </s>, <UNK>.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace smn {

inline constexpr std::string_view kNewlineToken = "<NL>";

struct Sample {
  std::string sample_id;
  std::string project_id;
  std::vector<std::string> code_tokens;
  std::vector<std::string> summary_tokens;

  bool operator==(const Sample&) const = default;
};

std::vector<std::string> split_tokens(std::string_view text);
std::string join_tokens(std::span<const std::string> tokens);

std::vector<Sample> parse_dataset(std::string_view text, const std::string& origin = "<memory>");
std::string format_dataset(std::span<const Sample> samples);
std::vector<Sample> read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, std::span<const Sample> samples);

enum class VocabField { kCode, kSummary };

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kStart = 1;
  static constexpr int kEnd = 2;
  static constexpr int kUnknown = 3;
  static constexpr int kReservedCount = 4;
  static constexpr std::string_view kPadToken = "<PAD>";
  static constexpr std::string_view kStartToken = "<s>";
  static constexpr std::string_view kEndToken = "</s>";
  static constexpr std::string_view kUnknownToken = "<UNK>";

  // Keeps the max_size - 4 most frequent tokens of the field, ties broken
  // lexicographically. Throws UsageError on an empty corpus or max_size <= 4.
  static Vocabulary build(std::span<const Sample> samples, std::size_t max_size, VocabField field);
  // The first four tokens must be the reserved ones; tokens must be unique.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  static Vocabulary read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;
  std::string format() const;

  std::size_t size() const { return tokens_.size(); }
  std::optional<int> find(std::string_view token) const;
  // Unknown tokens map to <UNK>.
  int id(std::string_view token) const;
  // Throws VocabularyError for ids outside [0, size).
  const std::string& token(int id) const;
  static bool is_reserved(int id) { return id >= 0 && id < kReservedCount; }

  std::vector<int> encode(std::span<const std::string> tokens) const;
  std::vector<std::string> decode(std::span<const int> ids) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  explicit Vocabulary(std::vector<std::string> tokens);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// n x Y grid of statement token ids. Row i holds lengths[i] ids followed by
// padding; rows at or after statement_count are all padding.
struct StatementMatrix {
  std::size_t max_statements = 0;  // n
  std::size_t statement_len = 0;   // Y
  std::size_t statement_count = 0;
  std::vector<int> ids;            // n * Y, row-major
  std::vector<std::size_t> lengths;  // n

  std::span<const int> statement(std::size_t i) const {
    return std::span<const int>(ids).subspan(i * statement_len, lengths[i]);
  }
};

// Splits at <NL> (dropped), keeps a trailing statement without <NL>, drops
// empty segments, keeps the first Y tokens of each statement and the first n
// statements.
StatementMatrix split_statements(std::span<const std::string> code_tokens, const Vocabulary& vocab,
                                 std::size_t max_statements, std::size_t statement_len);

// Number of non-empty <NL>-delimited statements, without any cap.
std::size_t count_statements(std::span<const std::string> code_tokens);

struct EncodingShape {
  std::size_t tdatlen = 200;
  std::size_t comlen = 13;
  std::size_t max_statements = 70;
  std::size_t statement_len = 30;
};

struct EncodedSample {
  std::string sample_id;
  std::vector<int> code_ids;     // tdatlen
  StatementMatrix statements;
  std::vector<int> summary_ids;  // comlen: <s> words... </s> <PAD>...
};

// Code keeps its first tdatlen tokens (<NL> included) padded with 0. The
// summary is framed by <s> ... </s>, keeping the first comlen - 2 words so
// </s> always survives, then padded to comlen.
EncodedSample encode_sample(const Sample& sample, const Vocabulary& code_vocab,
                            const Vocabulary& summary_vocab, const EncodingShape& shape);

struct CorpusSplit {
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;
};

// Shuffles project ids with the seed and assigns each project whole to the
// bucket furthest below its target sample count. Samples keep input order
// inside each bucket. Throws UsageError for fewer than three projects or
// ratios that are not positive and summing to 1.
CorpusSplit split_by_project(std::span<const Sample> samples, const std::array<double, 3>& ratios,
                             std::uint64_t seed);

// Keeps samples with at least min_statements statements, in order.
std::vector<Sample> filter_by_length(std::span<const Sample> samples, std::size_t min_statements);

// Drops samples whose id is listed (clone-removal hook).
std::vector<Sample> exclude_samples(std::span<const Sample> samples,
                                    const std::set<std::string>& excluded_ids);
std::set<std::string> read_id_list(const std::filesystem::path& path);

}  // namespace smn

#endif  // SMN_CORPUS_HPP_
