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

#include <algorithm>
#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "smn/error.hpp"
#include "smn/metrics.hpp"
#include "smn/random.hpp"

namespace smn {
namespace {

Tokens toks(const std::string& s) { return split_tokens(s); }

TEST(BleuTest, HandComputedExample) {
  std::vector<Tokens> hyp = {toks("the cat sat on mat")};
  std::vector<Tokens> ref = {toks("the cat sat on the mat")};
  const double expected = 100.0 * std::exp(-0.2) * std::pow(1.0 * 0.75 * (2.0 / 3.0) * 0.5, 0.25);
  EXPECT_NEAR(bleu_corpus(hyp, ref), expected, 1e-9);
  EXPECT_NEAR(bleu_corpus(hyp, ref), 57.89, 0.01);
}

TEST(BleuTest, PerfectAndDisjoint) {
  std::vector<Tokens> refs = {toks("returns the name of it"), toks("sets the value now please")};
  EXPECT_NEAR(bleu_corpus(refs, refs), 100.0, 1e-12);
  std::vector<Tokens> other = {toks("x y z w"), toks("q r s t u")};
  EXPECT_EQ(bleu_corpus(other, refs), 0.0);
  EXPECT_THROW(bleu_corpus({}, {}), UsageError);
  EXPECT_THROW(bleu_corpus(refs, std::span(refs).first(1)), DimensionError);
}

TEST(BleuTest, CaseInsensitiveAndOrderInvariant) {
  std::vector<Tokens> hyp = {toks("Returns THE name"), toks("adds an item to list"),
                             toks("clears the cache now")};
  std::vector<Tokens> ref = {toks("returns the name"), toks("adds an item to the list"),
                             toks("clears the cache")};
  const double a = bleu_corpus(hyp, ref);
  std::vector<Tokens> hyp2 = {hyp[2], hyp[0], hyp[1]};
  std::vector<Tokens> ref2 = {ref[2], ref[0], ref[1]};
  EXPECT_EQ(a, bleu_corpus(hyp2, ref2));
  EXPECT_GT(a, 0.0);
  EXPECT_LT(a, 100.0);
}

TEST(MeteorTest, HandCases) {
  EXPECT_NEAR(meteor(toks("a b c"), toks("a b c")), 1.0 - 0.5 / 27.0, 1e-12);
  EXPECT_NEAR(meteor(toks("a b c"), toks("a b c")), 0.98148, 1e-5);
  EXPECT_EQ(meteor(toks("x"), toks("y")), 0.0);
  EXPECT_NEAR(meteor(toks("b a"), toks("a b")), 0.5, 1e-12);
  EXPECT_EQ(meteor({}, toks("a b")), 0.0);
  MeteorDetail d = meteor_detail(toks("b a"), toks("a b"));
  EXPECT_EQ(d.matches, 2u);
  EXPECT_EQ(d.chunks, 2u);
}

// Exhaustive search over every partial one-to-one alignment of equal words.
std::pair<std::size_t, std::size_t> brute_force_alignment(const Tokens& pred, const Tokens& ref) {
  std::size_t best_m = 0, best_chunks = 0;
  std::vector<int> map(pred.size(), -1);
  std::vector<bool> used(ref.size(), false);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == pred.size()) {
      std::size_t m = 0, chunks = 0;
      for (std::size_t k = 0; k < pred.size(); ++k) {
        if (map[k] < 0) continue;
        ++m;
        const bool continues = k > 0 && map[k - 1] >= 0 && map[k] == map[k - 1] + 1;
        if (!continues) ++chunks;
      }
      if (m > best_m || (m == best_m && chunks < best_chunks)) {
        best_m = m;
        best_chunks = chunks;
      }
      return;
    }
    rec(i + 1);
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (used[j] || ref[j] != pred[i]) continue;
      used[j] = true;
      map[i] = static_cast<int>(j);
      rec(i + 1);
      map[i] = -1;
      used[j] = false;
    }
  };
  rec(0);
  return {best_m, best_chunks};
}

TEST(MeteorTest, MatchesBruteForceAligner) {
  Rng rng(2024);
  const std::vector<std::string> words = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 200; ++trial) {
    Tokens pred, ref;
    const std::size_t lp = 1 + rng.index(6), lr = 1 + rng.index(6);
    const std::size_t alphabet = 2 + rng.index(3);
    for (std::size_t i = 0; i < lp; ++i) pred.push_back(words[rng.index(alphabet)]);
    for (std::size_t i = 0; i < lr; ++i) ref.push_back(words[rng.index(alphabet)]);
    const auto [m, chunks] = brute_force_alignment(pred, ref);
    MeteorDetail d = meteor_detail(pred, ref);
    ASSERT_EQ(d.matches, m) << join_tokens(pred) << " | " << join_tokens(ref);
    ASSERT_EQ(d.chunks, chunks) << join_tokens(pred) << " | " << join_tokens(ref);
    double expected = 0;
    if (m > 0) {
      const double p = static_cast<double>(m) / lp, r = static_cast<double>(m) / lr;
      const double f = 10 * p * r / (r + 9 * p);
      const double frag = static_cast<double>(chunks) / m;
      expected = f * (1 - 0.5 * frag * frag * frag);
    }
    ASSERT_EQ(d.score, expected);
    ASSERT_GE(d.score, 0.0);
    ASSERT_LE(d.score, 1.0);
  }
}

// Two-tailed p by Simpson integration of the t density, independent of the
// incomplete beta route.
double integrated_p(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  auto density = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const int steps = 200000;
  const double h = std::fabs(t) / steps;
  double s = density(0) + density(std::fabs(t));
  for (int i = 1; i < steps; ++i) s += density(i * h) * (i % 2 ? 4 : 2);
  const double central = s * h / 3;  // P(0 < T < |t|)
  return 1.0 - 2.0 * central;
}

TEST(TTestTest, TableValues) {
  std::vector<double> d = {1, 2, 3, 4, 5};
  std::vector<double> zero(5, 0.0);
  TTestResult r = paired_t_test(d, zero);
  EXPECT_NEAR(r.t, 4.2426, 1e-4);
  EXPECT_EQ(r.df, 4u);
  EXPECT_NEAR(r.p, 0.0132, 0.0005);
  EXPECT_NEAR(student_t_two_tailed_p(2.228, 10), 0.050, 0.001);
  for (double df : {1.0, 3.0, 4.0, 10.0, 29.0}) {
    for (double t : {0.3, 1.0, 2.228, 4.2426}) {
      EXPECT_NEAR(student_t_two_tailed_p(t, df), integrated_p(t, df), 1e-8);
    }
  }
}

TEST(TTestTest, NullSymmetryAndDegenerateCases) {
  std::vector<double> a = {0.3, 0.5, 0.1, 0.9};
  TTestResult same = paired_t_test(a, a);
  EXPECT_EQ(same.t, 0.0);
  EXPECT_EQ(same.p, 1.0);
  EXPECT_FALSE(same.degenerate);
  std::vector<double> b = {0.2, 0.1, 0.3, 0.4};
  TTestResult ab = paired_t_test(a, b), ba = paired_t_test(b, a);
  EXPECT_EQ(ab.t, -ba.t);
  EXPECT_EQ(ab.p, ba.p);
  std::vector<double> ones(4, 1.0), zeros(4, 0.0);
  TTestResult exact = paired_t_test(ones, zeros);
  EXPECT_TRUE(exact.degenerate);
  EXPECT_EQ(exact.p, 0.0);
  EXPECT_THROW(paired_t_test(std::vector<double>{1}, std::vector<double>{2}), UsageError);
  EXPECT_THROW(paired_t_test(a, std::span(b).first(3)), UsageError);
}

std::vector<Sample> refs3() {
  return {Sample{"s1", "p", {"a"}, toks("returns the name")},
          Sample{"s2", "p", {"a"}, toks("sets the value")},
          Sample{"s3", "p", {"a"}, toks("clears the cache")}};
}

TEST(ScoreCorpusTest, AlignsByIdAndReportsMismatches) {
  auto refs = refs3();
  std::vector<PredictionLine> preds = {{"s3", toks("clears the cache")},
                                       {"s1", toks("Returns the name")},
                                       {"s2", toks("sets value")}};
  ScoredCorpus c = score_corpus(refs, preds);
  EXPECT_EQ(c.ids, (std::vector<std::string>{"s1", "s2", "s3"}));
  EXPECT_NEAR(c.meteor[0], 0.98148, 1e-5);
  EXPECT_NEAR(c.mean_meteor, (c.meteor[0] + c.meteor[1] + c.meteor[2]) / 3, 1e-15);

  std::vector<PredictionLine> missing = {{"s1", {}}, {"s4", {}}};
  try {
    score_corpus(refs, missing);
    FAIL();
  } catch (const AlignmentError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("s2"), std::string::npos);
    EXPECT_NE(msg.find("s3"), std::string::npos);
    EXPECT_NE(msg.find("s4"), std::string::npos);
  }
}

TEST(DifferenceSetTest, Cases) {
  auto refs = refs3();
  std::vector<PredictionLine> a = {{"s1", toks("returns the name")},
                                   {"s2", toks("sets the value")},
                                   {"s3", toks("clears the cache")}};
  std::vector<PredictionLine> b = {{"s1", toks("RETURNS the name")},
                                   {"s2", toks("sets a value")},
                                   {"s3", toks("clears cache")}};
  ScoredCorpus ca = score_corpus(refs, a), cb = score_corpus(refs, b);
  SetPartition self = difference_set(ca, ca);
  EXPECT_TRUE(self.difference_ids.empty());
  EXPECT_EQ(self.same_ids.size(), 3u);
  EXPECT_EQ(self.difference_pct, 0.0);
  EXPECT_FALSE(self.a_difference.meteor.has_value());

  SetPartition p = difference_set(ca, cb);
  EXPECT_NEAR(p.difference_pct, 66.67, 0.005);
  EXPECT_EQ(p.difference_ids, (std::vector<std::string>{"s2", "s3"}));
  EXPECT_EQ(p.same_ids, (std::vector<std::string>{"s1"}));
  SetPartition q = difference_set(cb, ca);
  EXPECT_EQ(q.difference_ids, p.difference_ids);
  EXPECT_EQ(q.a_difference.meteor, p.b_difference.meteor);
  EXPECT_EQ(q.b_difference.meteor, p.a_difference.meteor);

  std::vector<PredictionLine> c = {{"s1", toks("x")}, {"s2", toks("y")}, {"s3", toks("z")}};
  EXPECT_EQ(difference_set(ca, score_corpus(refs, c)).difference_pct, 100.0);
}

TEST(ImprovedSetTest, Cases) {
  std::vector<std::string> ids = {"a", "b", "c", "d"};
  std::vector<double> a = {0.1, 0.5, 0.3, 0.2};
  ImprovedSet none = improved_set(ids, a, a);
  EXPECT_TRUE(none.ids.empty());
  EXPECT_EQ(none.size_pct, 0.0);
  std::vector<double> up = a;
  for (double& v : up) v += 0.1;
  ImprovedSet all = improved_set(ids, up, a);
  EXPECT_EQ(all.size_pct, 100.0);
  EXPECT_NEAR(*all.mean_a - *all.mean_b, 0.1, 1e-12);
  std::vector<double> mixed = {0.2, 0.4, 0.3, 0.9};
  ImprovedSet some = improved_set(ids, mixed, a);
  EXPECT_EQ(some.ids, (std::vector<std::string>{"a", "d"}));
  EXPECT_GE(*some.mean_a, *some.mean_b);
}

TEST(ReportTest, TableLayout) {
  std::vector<MetricRow> rows = {{"smn", 0.3468, 19.47, std::nullopt, true},
                                 {"attendgru", 0.30, 17.0, TTestResult{3.5, 0.0123, 99, false}, false}};
  const std::string table = format_metric_table(rows);
  EXPECT_NE(table.find("n/a (out of scope)"), std::string::npos);
  EXPECT_NE(table.find("34.68"), std::string::npos);
  EXPECT_NE(table.find("19.47"), std::string::npos);
  EXPECT_NE(table.find("0.0123"), std::string::npos);
  EXPECT_EQ(to_json(rows[0])["t"], nullptr);
  EXPECT_EQ(to_json(rows[1])["df"], 99);
}

}  // namespace
}  // namespace smn
