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

#ifndef SMN_OPS_HPP_
#define SMN_OPS_HPP_

// Differentiable ops over Tensor. There is no implicit broadcasting: binary
// elementwise ops need identical shapes, and the few shape coercions the model
// needs (row-wise bias, scalar gate) are explicit ops.

#include <span>
#include <vector>

#include "smn/tensor.hpp"

namespace smn {

// a[r x k] * b[k x c] -> [r x c]. A rank-1 lhs [k] is treated as a single
// row and gives a rank-1 [c] result.
Tensor matmul(const Tensor& a, const Tensor& b);
// a[r x k] * b[c x k]^T -> [r x c]
Tensor matmul_nt(const Tensor& a, const Tensor& b);

enum class Elementwise { kAdd, kSub, kMul, kAbs, kTanh, kSigmoid, kRelu };

Tensor elementwise(Elementwise op, std::span<const Tensor> args);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor abs(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor scale(const Tensor& x, double factor);

// Along the last axis, with max subtraction. Non-finite input throws
// NumericInputError.
Tensor softmax(const Tensor& x);

// Rank-1 or rank-2 tensors; all non-axis dimensions must match.
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
// k rank-1 [d] tensors -> [k x d].
Tensor stack(std::span<const Tensor> rows);
// Row i of a [r x c] matrix as a rank-1 [c] tensor.
Tensor row(const Tensor& matrix, std::size_t i);
Tensor reshape(const Tensor& x, Shape shape);

// Sum of every element, as a scalar.
Tensor sum(const Tensor& x);
// [r x c] -> [c]
Tensor sum_rows(const Tensor& x);
// m[r x c] + bias[c] on every row; a rank-1 m[c] is a single row.
Tensor add_rowwise(const Tensor& m, const Tensor& bias);

// table[V x E], ids in [0, V) -> [len x E]. Gradients scatter-add into the
// table rows.
Tensor embedding_lookup(const Tensor& table, std::span<const int> ids);

// Gate blocks are laid out [z | r | candidate] along the 3H axis.
struct GruWeights {
  Tensor input_kernel;      // [E x 3H]
  Tensor recurrent_kernel;  // [H x 3H]
  Tensor bias;              // [3H]

  std::size_t input_dim() const { return input_kernel.dim(0); }
  std::size_t hidden_dim() const { return recurrent_kernel.dim(0); }
};

// z = sigmoid(x Wz + h Uz + bz)
// r = sigmoid(x Wr + h Ur + br)
// c = tanh(x Wc + (r * h) Uc + bc)
// h' = z * h + (1 - z) * c
Tensor gru_cell(const Tensor& x, const Tensor& h, const GruWeights& weights);

// -ln(max(dist[target], 1e-12)) for a probability vector dist.
Tensor cross_entropy(const Tensor& dist, int target);

}  // namespace smn

#endif  // SMN_OPS_HPP_
