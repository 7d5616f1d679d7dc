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

#ifndef SMN_METRICS_HPP_
#define SMN_METRICS_HPP_

// Corpus BLEU-4, exact-match METEOR, paired t-tests and the
// difference/improved-set analyses. All comparisons run on canonical tokens:
// lowercased, split on single spaces.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smn/corpus.hpp"
#include "smn/inference.hpp"

namespace smn {

using Tokens = std::vector<std::string>;

Tokens canonicalize(std::span<const std::string> tokens);

// Clipped n-gram precisions for n = 1..4, uniform geometric mean, brevity
// penalty, x100. 0 when any precision is 0. Throws UsageError on an empty
// corpus and DimensionError when the lists differ in length.
double bleu_corpus(std::span<const Tokens> hypotheses, std::span<const Tokens> references);

struct MeteorDetail {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0;
  double recall = 0;
  double fmean = 0;
  double penalty = 0;
  double score = 0;
};

// Exact unigram alignment with the most matches, then the fewest chunks.
// Fmean = 10PR / (R + 9P), penalty = 0.5 (chunks / matches)^3.
MeteorDetail meteor_detail(std::span<const std::string> prediction,
                           std::span<const std::string> reference);
double meteor(std::span<const std::string> prediction, std::span<const std::string> reference);

struct TTestResult {
  double t = 0;
  double p = 1;
  std::size_t df = 0;
  bool degenerate = false;  // zero variance with a non-zero mean difference
};

// Two-tailed p of Student's t with df degrees of freedom.
double student_t_two_tailed_p(double t, double df);
// Paired test on a - b. Throws UsageError for unequal lengths or fewer than 2.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct ScoredCorpus {
  std::vector<std::string> ids;
  std::vector<Tokens> references;
  std::vector<Tokens> predictions;
  std::vector<double> meteor;
  double bleu = 0;
  double mean_meteor = 0;
};

// Aligns predictions to references by sample id, in reference order. Throws
// AlignmentError listing missing, unexpected or duplicate ids.
ScoredCorpus score_corpus(std::span<const Sample> references,
                          std::span<const PredictionLine> predictions);

struct SetScores {
  std::optional<double> bleu;  // empty for an empty set
  std::optional<double> meteor;
};

struct SetPartition {
  std::vector<std::string> difference_ids;
  std::vector<std::string> same_ids;
  double difference_pct = 0;
  SetScores a_difference, b_difference, a_same, b_same;
};

// Samples whose canonical predictions differ between a and b. Both corpora
// must be scored against the same references.
SetPartition difference_set(const ScoredCorpus& a, const ScoredCorpus& b);

struct ImprovedSet {
  std::vector<std::string> ids;
  double size_pct = 0;
  std::optional<double> mean_a;
  std::optional<double> mean_b;
};

// Samples where a's METEOR strictly exceeds b's.
ImprovedSet improved_set(std::span<const std::string> ids, std::span<const double> meteor_a,
                         std::span<const double> meteor_b);

// ---------------------------------------------------------------------------
// Reports

struct MetricRow {
  std::string system;
  double meteor = 0;  // mean, in [0, 1]
  double bleu = 0;    // [0, 100]
  std::optional<TTestResult> t_test;  // against the baseline row
  bool baseline = false;
};

// Columns: system, METEOR (x100), USE (always "n/a (out of scope)"), BLEU, t, p.
std::string format_metric_table(std::span<const MetricRow> rows);
nlohmann::json to_json(const MetricRow& row);

std::string format_analysis(const std::string& name_a, const std::string& name_b,
                            const SetPartition& partition, const ImprovedSet& a_over_b,
                            const ImprovedSet& b_over_a);
nlohmann::json analysis_json(const std::string& name_a, const std::string& name_b,
                             const SetPartition& partition, const ImprovedSet& a_over_b,
                             const ImprovedSet& b_over_a);

// Fixed-precision rendering used in every report ("%.2f" etc.).
std::string format_fixed(double value, int digits);

}  // namespace smn

#endif  // SMN_METRICS_HPP_
