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

#include "smn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include <boost/math/special_functions/beta.hpp>

#include "smn/error.hpp"

namespace smn {

Tokens canonicalize(std::span<const std::string> tokens) {
  Tokens out;
  for (const std::string& t : tokens) {
    std::string lower = t;
    for (char& ch : lower) {
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    for (std::string& piece : split_tokens(lower)) out.push_back(std::move(piece));
  }
  return out;
}

// ---------------------------------------------------------------------------
// BLEU

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

double bleu_corpus(std::span<const Tokens> hypotheses, std::span<const Tokens> references) {
  if (hypotheses.size() != references.size()) {
    throw DimensionError("BLEU needs one reference per hypothesis (" +
                         std::to_string(hypotheses.size()) + " vs " +
                         std::to_string(references.size()) + ")");
  }
  if (hypotheses.empty()) throw UsageError("BLEU of an empty corpus is undefined");
  constexpr std::size_t kMaxN = 4;
  std::size_t matched[kMaxN] = {};
  std::size_t total[kMaxN] = {};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const Tokens hyp = canonicalize(hypotheses[s]);
    const Tokens ref = canonicalize(references[s]);
    hyp_len += hyp.size();
    ref_len += ref.size();
    for (std::size_t n = 1; n <= kMaxN; ++n) {
      const NgramCounts h = count_ngrams(hyp, n);
      const NgramCounts r = count_ngrams(ref, n);
      for (const auto& [gram, count] : h) {
        auto it = r.find(gram);
        if (it != r.end()) matched[n - 1] += std::min(count, it->second);
        total[n - 1] += count;
      }
    }
  }
  double log_sum = 0;
  for (std::size_t n = 0; n < kMaxN; ++n) {
    if (matched[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched[n]) / static_cast<double>(total[n]));
  }
  const double c = static_cast<double>(hyp_len);
  const double r = static_cast<double>(ref_len);
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  return 100.0 * brevity * std::exp(log_sum / kMaxN);
}

// ---------------------------------------------------------------------------
// METEOR

namespace {

// Best (matches, links) over alignments of pred[i..]; a link is a pair of
// consecutive prediction tokens aligned to consecutive reference positions.
class MeteorAligner {
 public:
  MeteorAligner(const Tokens& pred, const Tokens& ref) : pred_(pred) {
    // Only reference positions holding a prediction word can be used; they
    // are renumbered into bit positions of the used-mask.
    std::set<std::string> words(pred.begin(), pred.end());
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (words.contains(ref[j])) {
        candidates_[ref[j]].push_back(static_cast<int>(bits_.size()));
        bits_.push_back(static_cast<int>(j));
      }
    }
    if (bits_.size() > 64) {
      throw UsageError("METEOR alignment supports at most 64 candidate reference positions");
    }
  }

  std::pair<int, int> best() { return solve(0, 0, -1); }

 private:
  // prev: reference position of pred[i-1], or -1 when it was left unmatched.
  std::pair<int, int> solve(std::size_t i, std::uint64_t used, int prev) {
    if (i == pred_.size()) return {0, 0};
    const Key key{i, used, prev};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::pair<int, int> best = solve(i + 1, used, -1);
    if (auto c = candidates_.find(pred_[i]); c != candidates_.end()) {
      for (int bit : c->second) {
        if (used & (std::uint64_t{1} << bit)) continue;
        const int j = bits_[static_cast<std::size_t>(bit)];
        auto rest = solve(i + 1, used | (std::uint64_t{1} << bit), j);
        rest.first += 1;
        rest.second += (prev >= 0 && j == prev + 1) ? 1 : 0;
        best = std::max(best, rest);
      }
    }
    memo_.emplace(key, best);
    return best;
  }

  struct Key {
    std::size_t i;
    std::uint64_t used;
    int prev;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = std::hash<std::uint64_t>()(k.used);
      h ^= std::hash<std::size_t>()(k.i) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h ^= std::hash<int>()(k.prev) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      return h;
    }
  };

  const Tokens& pred_;
  std::vector<int> bits_;
  std::map<std::string, std::vector<int>> candidates_;
  std::unordered_map<Key, std::pair<int, int>, KeyHash> memo_;
};

}  // namespace

MeteorDetail meteor_detail(std::span<const std::string> prediction,
                           std::span<const std::string> reference) {
  const Tokens pred = canonicalize(prediction);
  const Tokens ref = canonicalize(reference);
  MeteorDetail d;
  if (pred.empty() || ref.empty()) return d;
  const auto [matches, links] = MeteorAligner(pred, ref).best();
  if (matches == 0) return d;
  d.matches = static_cast<std::size_t>(matches);
  d.chunks = static_cast<std::size_t>(matches - links);
  const double m = matches;
  d.precision = m / static_cast<double>(pred.size());
  d.recall = m / static_cast<double>(ref.size());
  d.fmean = 10.0 * d.precision * d.recall / (d.recall + 9.0 * d.precision);
  const double frag = static_cast<double>(d.chunks) / m;
  d.penalty = 0.5 * frag * frag * frag;
  d.score = d.fmean * (1.0 - d.penalty);
  return d;
}

double meteor(std::span<const std::string> prediction, std::span<const std::string> reference) {
  return meteor_detail(prediction, reference).score;
}

// ---------------------------------------------------------------------------
// Significance

double student_t_two_tailed_p(double t, double df) {
  if (!(df > 0)) throw UsageError("t distribution needs positive degrees of freedom");
  if (std::isnan(t)) throw NumericInputError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  // P(|T| > |t|) = I_{df / (df + t^2)}(df / 2, 1 / 2)
  return boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw UsageError("paired t-test needs aligned samples (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  const std::size_t n = a.size();
  if (n < 2) throw UsageError("paired t-test needs at least 2 pairs");
  std::vector<double> d(n);
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = a[i] - b[i];
    mean += d[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  TTestResult r;
  r.df = n - 1;
  if (sd == 0.0) {
    if (mean == 0.0) return r;
    r.t = mean > 0 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    r.degenerate = true;
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = student_t_two_tailed_p(r.t, static_cast<double>(r.df));
  return r;
}

// ---------------------------------------------------------------------------
// Corpus scoring and set analyses

ScoredCorpus score_corpus(std::span<const Sample> references,
                          std::span<const PredictionLine> predictions) {
  std::map<std::string, const PredictionLine*> by_id;
  std::vector<std::string> duplicates;
  for (const PredictionLine& p : predictions) {
    if (!by_id.emplace(p.sample_id, &p).second) duplicates.push_back(p.sample_id);
  }
  std::vector<std::string> missing;
  std::set<std::string> reference_ids;
  for (const Sample& s : references) {
    reference_ids.insert(s.sample_id);
    if (!by_id.contains(s.sample_id)) missing.push_back(s.sample_id);
  }
  std::vector<std::string> unexpected;
  for (const auto& [id, p] : by_id) {
    if (!reference_ids.contains(id)) unexpected.push_back(id);
  }
  if (!missing.empty() || !unexpected.empty() || !duplicates.empty()) {
    auto list = [](const std::vector<std::string>& ids) {
      std::string out;
      for (std::size_t i = 0; i < ids.size() && i < 10; ++i) out += (i ? ", " : "") + ids[i];
      if (ids.size() > 10) out += ", ... (" + std::to_string(ids.size()) + " total)";
      return out;
    };
    std::string msg = "predictions do not align with references:";
    if (!missing.empty()) msg += " missing [" + list(missing) + "]";
    if (!unexpected.empty()) msg += " unexpected [" + list(unexpected) + "]";
    if (!duplicates.empty()) msg += " duplicated [" + list(duplicates) + "]";
    throw AlignmentError(msg);
  }
  if (references.empty()) throw UsageError("cannot score an empty corpus");

  ScoredCorpus out;
  double meteor_sum = 0;
  for (const Sample& s : references) {
    out.ids.push_back(s.sample_id);
    out.references.push_back(canonicalize(s.summary_tokens));
    out.predictions.push_back(canonicalize(by_id.at(s.sample_id)->tokens));
    out.meteor.push_back(meteor(out.predictions.back(), out.references.back()));
    meteor_sum += out.meteor.back();
  }
  out.bleu = bleu_corpus(out.predictions, out.references);
  out.mean_meteor = meteor_sum / static_cast<double>(out.ids.size());
  return out;
}

namespace {

SetScores subset_scores(const ScoredCorpus& c, const std::vector<std::size_t>& rows) {
  SetScores s;
  if (rows.empty()) return s;
  std::vector<Tokens> hyps, refs;
  double total = 0;
  for (std::size_t i : rows) {
    hyps.push_back(c.predictions[i]);
    refs.push_back(c.references[i]);
    total += c.meteor[i];
  }
  s.bleu = bleu_corpus(hyps, refs);
  s.meteor = total / static_cast<double>(rows.size());
  return s;
}

}  // namespace

SetPartition difference_set(const ScoredCorpus& a, const ScoredCorpus& b) {
  if (a.ids != b.ids || a.references != b.references) {
    std::vector<std::string> only;
    std::set<std::string> sa(a.ids.begin(), a.ids.end()), sb(b.ids.begin(), b.ids.end());
    std::set_symmetric_difference(sa.begin(), sa.end(), sb.begin(), sb.end(),
                                  std::back_inserter(only));
    std::string msg = "systems were scored on different samples";
    for (std::size_t i = 0; i < only.size() && i < 10; ++i) msg += (i ? ", " : ": ") + only[i];
    throw AlignmentError(msg);
  }
  SetPartition p;
  std::vector<std::size_t> diff_rows, same_rows;
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    if (a.predictions[i] != b.predictions[i]) {
      diff_rows.push_back(i);
      p.difference_ids.push_back(a.ids[i]);
    } else {
      same_rows.push_back(i);
      p.same_ids.push_back(a.ids[i]);
    }
  }
  p.difference_pct = a.ids.empty() ? 0.0
                                   : 100.0 * static_cast<double>(diff_rows.size()) /
                                         static_cast<double>(a.ids.size());
  p.a_difference = subset_scores(a, diff_rows);
  p.b_difference = subset_scores(b, diff_rows);
  p.a_same = subset_scores(a, same_rows);
  p.b_same = subset_scores(b, same_rows);
  return p;
}

ImprovedSet improved_set(std::span<const std::string> ids, std::span<const double> meteor_a,
                         std::span<const double> meteor_b) {
  if (ids.size() != meteor_a.size() || ids.size() != meteor_b.size()) {
    throw AlignmentError("improved set needs one score per id for both systems");
  }
  ImprovedSet out;
  double sum_a = 0, sum_b = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (meteor_a[i] > meteor_b[i]) {
      out.ids.push_back(ids[i]);
      sum_a += meteor_a[i];
      sum_b += meteor_b[i];
    }
  }
  if (!ids.empty()) {
    out.size_pct = 100.0 * static_cast<double>(out.ids.size()) / static_cast<double>(ids.size());
  }
  if (!out.ids.empty()) {
    out.mean_a = sum_a / static_cast<double>(out.ids.size());
    out.mean_b = sum_b / static_cast<double>(out.ids.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string format_fixed(double value, int digits) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

namespace {

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string optional_fixed(const std::optional<double>& v, int digits, double factor = 1.0) {
  return v ? format_fixed(*v * factor, digits) : "-";
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

std::string format_metric_table(std::span<const MetricRow> rows) {
  static constexpr char kUse[] = "n/a (out of scope)";
  std::size_t name_width = 8;
  for (const MetricRow& r : rows) name_width = std::max(name_width, r.system.size() + 2);
  std::string out = pad("system", name_width) + pad("METEOR", 9) + pad("USE", 20) + pad("BLEU", 9) +
                    pad("t", 10) + "p\n";
  for (const MetricRow& r : rows) {
    std::string t = "-", p = "-";
    if (r.t_test) {
      t = format_fixed(r.t_test->t, 3);
      p = format_fixed(r.t_test->p, 4);
      if (r.t_test->degenerate) p += " (zero variance)";
    }
    out += pad(r.system + (r.baseline ? "*" : ""), name_width) +
           pad(format_fixed(100.0 * r.meteor, 2), 9) + pad(kUse, 20) +
           pad(format_fixed(r.bleu, 2), 9) + pad(t, 10) + p + "\n";
  }
  return out;
}

nlohmann::json to_json(const MetricRow& r) {
  nlohmann::json j = {{"system", r.system},
                      {"meteor", r.meteor},
                      {"bleu", r.bleu},
                      {"use", "n/a (out of scope)"},
                      {"baseline", r.baseline}};
  if (r.t_test) {
    j["t"] = number_json(r.t_test->t);
    j["p"] = r.t_test->p;
    j["df"] = r.t_test->df;
    j["degenerate_variance"] = r.t_test->degenerate;
  } else {
    j["t"] = nullptr;
    j["p"] = nullptr;
  }
  return j;
}

std::string format_analysis(const std::string& name_a, const std::string& name_b,
                            const SetPartition& p, const ImprovedSet& a_over_b,
                            const ImprovedSet& b_over_a) {
  const std::size_t total = p.difference_ids.size() + p.same_ids.size();
  std::string out = "difference set: " + name_a + " vs " + name_b + "\n";
  out += "  samples        " + std::to_string(total) + "\n";
  out += "  diff %         " + format_fixed(p.difference_pct, 2) + " (" +
         std::to_string(p.difference_ids.size()) + ")\n";
  out += "  same METEOR    " + optional_fixed(p.a_same.meteor, 2, 100.0) + "\n";
  out += "  same BLEU      " + optional_fixed(p.a_same.bleu, 2) + "\n";
  const std::size_t w = std::max(name_a.size(), name_b.size()) + 2;
  out += "  " + pad("system", w) + pad("diff METEOR", 13) + "diff BLEU\n";
  out += "  " + pad(name_a, w) + pad(optional_fixed(p.a_difference.meteor, 2, 100.0), 13) +
         optional_fixed(p.a_difference.bleu, 2) + "\n";
  out += "  " + pad(name_b, w) + pad(optional_fixed(p.b_difference.meteor, 2, 100.0), 13) +
         optional_fixed(p.b_difference.bleu, 2) + "\n";
  auto improved = [&](const std::string& better, const std::string& worse, const ImprovedSet& s) {
    return "improved set: " + better + " > " + worse + "\n  size %         " +
           format_fixed(s.size_pct, 2) + " (" + std::to_string(s.ids.size()) + ")\n  " +
           pad(better, w) + optional_fixed(s.mean_a, 2, 100.0) + "\n  " + pad(worse, w) +
           optional_fixed(s.mean_b, 2, 100.0) + "\n";
  };
  out += improved(name_a, name_b, a_over_b);
  out += improved(name_b, name_a, b_over_a);
  return out;
}

nlohmann::json analysis_json(const std::string& name_a, const std::string& name_b,
                             const SetPartition& p, const ImprovedSet& a_over_b,
                             const ImprovedSet& b_over_a) {
  auto scores = [](const SetScores& s) {
    return nlohmann::json{{"bleu", optional_json(s.bleu)}, {"meteor", optional_json(s.meteor)}};
  };
  auto improved = [](const ImprovedSet& s) {
    return nlohmann::json{{"ids", s.ids},
                          {"size_pct", s.size_pct},
                          {"mean_meteor_better", optional_json(s.mean_a)},
                          {"mean_meteor_other", optional_json(s.mean_b)}};
  };
  return {{"system_a", name_a},
          {"system_b", name_b},
          {"difference",
           {{"ids", p.difference_ids},
            {"pct", p.difference_pct},
            {"a", scores(p.a_difference)},
            {"b", scores(p.b_difference)}}},
          {"same", {{"ids", p.same_ids}, {"a", scores(p.a_same)}, {"b", scores(p.b_same)}}},
          {"improved_a_over_b", improved(a_over_b)},
          {"improved_b_over_a", improved(b_over_a)}};
}

}  // namespace smn
