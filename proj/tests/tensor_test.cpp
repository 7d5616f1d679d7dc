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

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "smn/error.hpp"
#include "smn/ops.hpp"
#include "support/finite_diff.hpp"

namespace smn {
namespace {

using testing::max_gradient_error;
using testing::random_tensor;

Tensor mat(Shape shape, std::vector<double> v, bool rg = false) {
  return Tensor::from_data(std::move(shape), std::move(v), rg);
}

void expect_values(const Tensor& t, const std::vector<double>& expected, double tol = 1e-12) {
  ASSERT_EQ(t.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(t.at(i), expected[i], tol) << i;
}

// Weighted sum so that every output element gets a distinct upstream gradient.
Tensor weighted_sum(const Tensor& out, const Tensor& weights) { return sum(mul(out, weights)); }

TEST(MatmulTest, IdentityTimesMatrix) {
  expect_values(matmul(mat({2, 2}, {1, 0, 0, 1}), mat({2, 2}, {5, 6, 7, 8})), {5, 6, 7, 8});
}

TEST(MatmulTest, HandComputedProduct) {
  expect_values(matmul(mat({2, 2}, {1, 2, 3, 4}), mat({2, 2}, {5, 6, 7, 8})), {19, 22, 43, 50});
}

TEST(MatmulTest, ZeroMatrix) {
  Rng rng(3);
  Tensor b = random_tensor(rng, {3, 4}, -1, 1, false);
  expect_values(matmul(Tensor::zeros({2, 3}), b), std::vector<double>(8, 0.0), 0.0);
}

TEST(MatmulTest, ShapeMismatchNamesBothShapes) {
  try {
    matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3}));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("[2x3]"), std::string::npos);
  }
}

TEST(MatmulTest, AlgebraicProperties) {
  Rng rng(11);
  Tensor eye = mat({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  for (int trial = 0; trial < 20; ++trial) {
    Tensor a = random_tensor(rng, {3, 3}, -2, 2, false);
    Tensor b = random_tensor(rng, {3, 3}, -2, 2, false);
    Tensor c = random_tensor(rng, {3, 3}, -2, 2, false);
    Tensor left = matmul(matmul(a, b), c);
    Tensor right = matmul(a, matmul(b, c));
    Tensor dist_l = matmul(a, add(b, c));
    Tensor dist_r = add(matmul(a, b), matmul(a, c));
    for (std::size_t i = 0; i < 9; ++i) {
      EXPECT_NEAR(left.at(i), right.at(i), 1e-9);
      EXPECT_NEAR(dist_l.at(i), dist_r.at(i), 1e-9);
      EXPECT_NEAR(matmul(a, eye).at(i), a.at(i), 1e-9);
      EXPECT_NEAR(matmul(eye, a).at(i), a.at(i), 1e-9);
    }
  }
}

TEST(ElementwiseTest, Examples) {
  Tensor zero = Tensor::scalar(0.0, true);
  Tensor t = tanh(zero);
  EXPECT_EQ(t.item(), 0.0);
  t.backward();
  EXPECT_EQ(zero.grad()[0], 1.0);
  EXPECT_EQ(sigmoid(Tensor::scalar(0.0)).item(), 0.5);
  EXPECT_DOUBLE_EQ(abs(Tensor::scalar(-0.1)).item(), 0.1);
}

TEST(ElementwiseTest, AbsGradientAtZeroIsZero) {
  Tensor x = mat({3}, {-2.0, 0.0, 3.0}, true);
  sum(abs(x)).backward();
  expect_values(Tensor::from_data({3}, {x.grad().begin(), x.grad().end()}), {-1.0, 0.0, 1.0}, 0.0);
}

TEST(ElementwiseTest, BinaryShapeMismatch) {
  EXPECT_THROW(add(Tensor::zeros({2}), Tensor::zeros({3})), DimensionError);
  EXPECT_THROW(mul(Tensor::zeros({2, 1}), Tensor::zeros({1, 2})), DimensionError);
  EXPECT_THROW(sub(Tensor::zeros({4}), Tensor::zeros({2, 2})), DimensionError);
}

TEST(ElementwiseTest, GenericDispatchChecksArity) {
  Tensor a = mat({2}, {1, 2});
  Tensor args[] = {a, a};
  expect_values(elementwise(Elementwise::kAdd, args), {2, 4});
  EXPECT_THROW(elementwise(Elementwise::kTanh, args), UsageError);
}

TEST(SoftmaxTest, Examples) {
  expect_values(softmax(mat({2}, {0, 0})), {0.5, 0.5});
  expect_values(softmax(mat({3}, {1, 2, 3})), {0.09003, 0.24473, 0.66524}, 5e-6);
  expect_values(softmax(mat({2}, {1000, 0})), {1.0, 0.0});
}

TEST(SoftmaxTest, NonFiniteInputRejected) {
  EXPECT_THROW(softmax(mat({2}, {1.0, NAN})), NumericInputError);
  EXPECT_THROW(softmax(mat({2}, {INFINITY, 0.0})), NumericInputError);
}

TEST(SoftmaxTest, NormalizedAndShiftInvariant) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng.index(12);
    Tensor x = random_tensor(rng, {3, d}, -30, 30, false);
    const double shift = rng.uniform(-50, 50);
    std::vector<double> shifted(x.data().begin(), x.data().end());
    for (double& v : shifted) v += shift;
    Tensor y = softmax(x);
    Tensor ys = softmax(mat({3, d}, shifted));
    for (std::size_t r = 0; r < 3; ++r) {
      double total = 0;
      for (std::size_t i = 0; i < d; ++i) {
        EXPECT_GT(y.at(r, i), 0.0);
        EXPECT_NEAR(y.at(r, i), ys.at(r, i), 1e-12);
        total += y.at(r, i);
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(ConcatTest, Examples) {
  Tensor x = mat({2}, {1, 2});
  Tensor single[] = {x};
  expect_values(concat(single, 0), {1, 2});

  Tensor rows[] = {mat({2, 1}, {1, 2}), mat({2, 1}, {3, 4})};
  Tensor stacked = concat(rows, 0);
  EXPECT_EQ(stacked.shape(), (Shape{4, 1}));
  expect_values(stacked, {1, 2, 3, 4});

  Tensor four[] = {Tensor::zeros({5}), Tensor::zeros({5}), Tensor::zeros({5}), Tensor::zeros({5})};
  EXPECT_EQ(concat(four, 0).shape(), (Shape{20}));
}

TEST(ConcatTest, ColumnsInterleaveRows) {
  Tensor parts[] = {mat({2, 1}, {1, 2}), mat({2, 2}, {3, 4, 5, 6})};
  Tensor out = concat(parts, 1);
  EXPECT_EQ(out.shape(), (Shape{2, 3}));
  expect_values(out, {1, 3, 4, 2, 5, 6});
}

TEST(ConcatTest, MismatchedNonAxisDims) {
  Tensor parts[] = {Tensor::zeros({2, 1}), Tensor::zeros({3, 1})};
  EXPECT_THROW(concat(parts, 1), DimensionError);
}

TEST(EmbeddingTest, Examples) {
  Tensor table = mat({4, 2}, {1, 2, 3, 4, 5, 6, 7, 8}, true);
  const int zeros[] = {0, 0};
  expect_values(embedding_lookup(table, zeros), {1, 2, 1, 2});

  const int threes[] = {3, 3};
  sum(embedding_lookup(table, threes)).backward();
  expect_values(Tensor::from_data({8}, {table.grad().begin(), table.grad().end()}),
                {0, 0, 0, 0, 0, 0, 2, 2}, 0.0);

  Tensor empty = embedding_lookup(table, std::span<const int>());
  EXPECT_EQ(empty.shape(), (Shape{0, 2}));
}

TEST(EmbeddingTest, OutOfRangeIdNamesTheId) {
  Tensor table = Tensor::zeros({4, 2});
  const int bad[] = {1, 4};
  try {
    embedding_lookup(table, bad);
    FAIL();
  } catch (const VocabularyError& e) {
    EXPECT_NE(std::string(e.what()).find("4"), std::string::npos);
  }
  const int negative[] = {-1};
  EXPECT_THROW(embedding_lookup(table, negative), VocabularyError);
}

GruWeights zero_gru(std::size_t in, std::size_t hid) {
  return {Tensor::zeros({in, 3 * hid}, true), Tensor::zeros({hid, 3 * hid}, true),
          Tensor::zeros({3 * hid}, true)};
}

GruWeights random_gru(Rng& rng, std::size_t in, std::size_t hid) {
  return {random_tensor(rng, {in, 3 * hid}), random_tensor(rng, {hid, 3 * hid}),
          random_tensor(rng, {3 * hid})};
}

TEST(GruCellTest, ZeroEverythingIsFixedPoint) {
  expect_values(gru_cell(Tensor::zeros({3}), Tensor::zeros({4}), zero_gru(3, 4)),
                {0, 0, 0, 0}, 0.0);
}

TEST(GruCellTest, ZeroWeightsHalveTheState) {
  Tensor h = mat({3}, {0.8, -1.5, 2.0});
  expect_values(gru_cell(mat({2}, {0.3, -0.7}), h, zero_gru(2, 3)), {0.4, -0.75, 1.0});
}

TEST(GruCellTest, MatchesUnfusedEquations) {
  Rng rng(21);
  GruWeights w = random_gru(rng, 3, 4);
  Tensor x = random_tensor(rng, {3});
  Tensor h = random_tensor(rng, {4});
  Tensor out = gru_cell(x, h, w);
  // Independent evaluation straight from the equations.
  for (std::size_t j = 0; j < 4; ++j) {
    auto pre = [&](std::size_t block, const std::vector<double>& state) {
      double v = w.bias.at(block * 4 + j);
      for (std::size_t i = 0; i < 3; ++i) v += x.at(i) * w.input_kernel.at(i, block * 4 + j);
      for (std::size_t i = 0; i < 4; ++i) v += state[i] * w.recurrent_kernel.at(i, block * 4 + j);
      return v;
    };
    std::vector<double> hv(h.data().begin(), h.data().end());
    std::vector<double> rh(4);
    for (std::size_t i = 0; i < 4; ++i) {
      double r_pre = w.bias.at(4 + i);
      for (std::size_t k = 0; k < 3; ++k) r_pre += x.at(k) * w.input_kernel.at(k, 4 + i);
      for (std::size_t k = 0; k < 4; ++k) r_pre += hv[k] * w.recurrent_kernel.at(k, 4 + i);
      rh[i] = hv[i] / (1 + std::exp(-r_pre));
    }
    const double z = 1 / (1 + std::exp(-pre(0, hv)));
    const double c = std::tanh(pre(2, rh));
    EXPECT_NEAR(out.at(j), z * hv[j] + (1 - z) * c, 1e-12);
  }
}

TEST(GruCellTest, GradientMatchesFiniteDifferences) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    GruWeights w = random_gru(rng, 3, 4);
    Tensor x = random_tensor(rng, {3});
    Tensor h = random_tensor(rng, {4});
    Tensor probe = random_tensor(rng, {4}, -1, 1, false);
    const double err = max_gradient_error(
        {x, h, w.input_kernel, w.recurrent_kernel, w.bias},
        [&] { return weighted_sum(gru_cell(x, h, w), probe); });
    EXPECT_LT(err, 1e-4);
  }
}

TEST(GruCellTest, ShapeMismatch) {
  EXPECT_THROW(gru_cell(Tensor::zeros({2}), Tensor::zeros({4}), zero_gru(3, 4)), DimensionError);
  EXPECT_THROW(gru_cell(Tensor::zeros({3}), Tensor::zeros({5}), zero_gru(3, 4)), DimensionError);
}

TEST(CrossEntropyTest, Examples) {
  EXPECT_NEAR(cross_entropy(mat({4}, {0.25, 0.25, 0.25, 0.25}), 2).item(), std::log(4.0), 1e-12);
  EXPECT_NEAR(std::log(4.0), 1.38629, 1e-5);
  EXPECT_EQ(cross_entropy(mat({3}, {0, 1, 0}), 1).item(), 0.0);
  EXPECT_NEAR(cross_entropy(mat({2}, {0.25, 0.75}), 0).item(), 1.38629, 1e-5);
  EXPECT_NEAR(cross_entropy(mat({2}, {0.0, 1.0}), 0).item(), -std::log(1e-12), 1e-9);
}

TEST(CrossEntropyTest, TargetOutOfRange) {
  EXPECT_THROW(cross_entropy(mat({2}, {0.5, 0.5}), 2), VocabularyError);
  EXPECT_THROW(cross_entropy(mat({2}, {0.5, 0.5}), -1), VocabularyError);
}

TEST(BackwardTest, SquareAtThree) {
  Tensor x = Tensor::scalar(3.0, true);
  mul(x, x).backward();
  EXPECT_EQ(x.grad()[0], 6.0);
}

TEST(BackwardTest, NonScalarLossRejected) {
  Tensor x = Tensor::zeros({2}, true);
  EXPECT_THROW(tanh(x).backward(), UsageError);
}

TEST(BackwardTest, LeafGradientsAccumulateAcrossCalls) {
  Tensor x = Tensor::scalar(3.0, true);
  Tensor loss = mul(x, x);
  loss.backward();
  loss.backward();
  EXPECT_EQ(x.grad()[0], 12.0);
  x.zero_grad();
  loss.backward();
  EXPECT_EQ(x.grad()[0], 6.0);
}

TEST(BackwardTest, NoGradGuardRecordsNothing) {
  Tensor x = Tensor::scalar(2.0, true);
  NoGradGuard guard;
  EXPECT_FALSE(tanh(x).requires_grad());
}

// Every differentiable op against central differences, 100 random trials each.
TEST(GradientPropertyTest, EveryOpMatchesFiniteDifferences) {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t r = 1 + rng.index(3), k = 1 + rng.index(4), c = 1 + rng.index(4);
    Tensor a = random_tensor(rng, {r, k});
    Tensor b = random_tensor(rng, {k, c});
    Tensor bt = random_tensor(rng, {c, k});
    Tensor probe = random_tensor(rng, {r, c}, -1, 1, false);
    worst = std::max(worst, max_gradient_error({a, b}, [&] { return weighted_sum(matmul(a, b), probe); }));
    worst = std::max(worst, max_gradient_error({a, bt}, [&] { return weighted_sum(matmul_nt(a, bt), probe); }));

    Tensor u = random_tensor(rng, {r, k});
    Tensor v = random_tensor(rng, {r, k});
    Tensor w = random_tensor(rng, {r, k}, -1, 1, false);
    worst = std::max(worst, max_gradient_error({u, v}, [&] { return weighted_sum(add(u, v), w); }));
    worst = std::max(worst, max_gradient_error({u, v}, [&] { return weighted_sum(sub(u, v), w); }));
    worst = std::max(worst, max_gradient_error({u, v}, [&] { return weighted_sum(mul(u, v), w); }));
    worst = std::max(worst, max_gradient_error({u}, [&] { return weighted_sum(abs(u), w); }));
    worst = std::max(worst, max_gradient_error({u}, [&] { return weighted_sum(tanh(u), w); }));
    worst = std::max(worst, max_gradient_error({u}, [&] { return weighted_sum(sigmoid(u), w); }));
    worst = std::max(worst, max_gradient_error({u}, [&] { return weighted_sum(relu(u), w); }));
    worst = std::max(worst, max_gradient_error({u}, [&] { return weighted_sum(scale(u, -1.7), w); }));
    worst = std::max(worst, max_gradient_error({u}, [&] { return weighted_sum(softmax(u), w); }));

    Tensor parts[] = {u, v};
    Tensor w2 = random_tensor(rng, {r, 2 * k}, -1, 1, false);
    worst = std::max(worst, max_gradient_error({u, v}, [&] { return weighted_sum(concat(parts, 1), w2); }));
    Tensor w3 = random_tensor(rng, {2 * r, k}, -1, 1, false);
    worst = std::max(worst, max_gradient_error({u, v}, [&] { return weighted_sum(concat(parts, 0), w3); }));

    Tensor bias = random_tensor(rng, {k});
    worst = std::max(worst, max_gradient_error({u, bias}, [&] { return weighted_sum(add_rowwise(u, bias), w); }));
    Tensor wk = random_tensor(rng, {k}, -1, 1, false);
    worst = std::max(worst, max_gradient_error({u}, [&] { return weighted_sum(sum_rows(u), wk); }));
    worst = std::max(worst, max_gradient_error({u}, [&] { return weighted_sum(row(u, r - 1), wk); }));

    Tensor table = random_tensor(rng, {5, k});
    std::vector<int> ids = {static_cast<int>(rng.index(5)), static_cast<int>(rng.index(5)), 2};
    Tensor we = random_tensor(rng, {3, k}, -1, 1, false);
    worst = std::max(worst, max_gradient_error({table}, [&] { return weighted_sum(embedding_lookup(table, ids), we); }));

    Tensor logits = random_tensor(rng, {4}, -2, 2);
    const int target = static_cast<int>(rng.index(4));
    worst = std::max(worst, max_gradient_error({logits}, [&] { return cross_entropy(softmax(logits), target); }));

    GruWeights gw = random_gru(rng, k, c);
    Tensor x = random_tensor(rng, {k});
    Tensor h = random_tensor(rng, {c});
    Tensor wc = random_tensor(rng, {c}, -1, 1, false);
    worst = std::max(worst, max_gradient_error({x, h, gw.input_kernel, gw.recurrent_kernel, gw.bias},
                                               [&] { return weighted_sum(gru_cell(x, h, gw), wc); }));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(DeterminismTest, IdenticalInputsGiveIdenticalBits) {
  auto run = [] {
    Rng rng(99);
    GruWeights w = random_gru(rng, 5, 6);
    Tensor h = Tensor::zeros({6});
    for (int step = 0; step < 10; ++step) h = gru_cell(random_tensor(rng, {5}), h, w);
    return std::vector<double>(h.data().begin(), h.data().end());
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace smn
