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

#include "smn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smn/error.hpp"
#include "smn/kernels.hpp"

namespace smn {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()) + " differ");
  }
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + shape_to_string(t.shape()));
  }
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Unary op whose derivative is expressed through (input, output).
template <typename Forward, typename Derivative>
Tensor unary_op(const Tensor& x, Forward forward, Derivative derivative) {
  std::vector<double> out(x.size());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = forward(in[i]);
  return Tensor::from_op(x.shape(), std::move(out), {x},
                         [derivative](const Tensor& o, std::span<const Tensor> inputs) {
                           const Tensor& src = inputs[0];
                           auto g = o.grad();
                           auto y = o.data();
                           auto xv = src.data();
                           auto dx = src.grad_buffer();
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             dx[i] += g[i] * derivative(xv[i], y[i]);
                           }
                         });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(b, 2, "matmul rhs");
  const bool vector_lhs = a.rank() == 1;
  if (!vector_lhs) require_rank(a, 2, "matmul lhs");
  const std::size_t r = vector_lhs ? 1 : a.dim(0);
  const std::size_t k = vector_lhs ? a.dim(0) : a.dim(1);
  if (k != b.dim(0)) {
    throw DimensionError("matmul: cannot multiply " + shape_to_string(a.shape()) + " by " +
                         shape_to_string(b.shape()));
  }
  const std::size_t c = b.dim(1);
  std::vector<double> out(r * c, 0.0);
  kernels::gemm_nn(a.data(), b.data(), out, r, k, c);
  Shape shape = vector_lhs ? Shape{c} : Shape{r, c};
  return Tensor::from_op(std::move(shape), std::move(out), {a, b},
                         [r, k, c](const Tensor& o, std::span<const Tensor> in) {
                           auto g = o.grad();
                           if (in[0].requires_grad()) {
                             // dA += dC * B^T
                             kernels::gemm_nt(g, in[1].data(), in[0].grad_buffer(), r, c, k);
                           }
                           if (in[1].requires_grad()) {
                             // dB += A^T * dC
                             kernels::gemm_tn(in[0].data(), g, in[1].grad_buffer(), k, r, c);
                           }
                         });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul_nt lhs");
  require_rank(b, 2, "matmul_nt rhs");
  const std::size_t r = a.dim(0);
  const std::size_t k = a.dim(1);
  const std::size_t c = b.dim(0);
  if (k != b.dim(1)) {
    throw DimensionError("matmul_nt: cannot multiply " + shape_to_string(a.shape()) +
                         " by the transpose of " + shape_to_string(b.shape()));
  }
  std::vector<double> out(r * c, 0.0);
  kernels::gemm_nt(a.data(), b.data(), out, r, k, c);
  return Tensor::from_op({r, c}, std::move(out), {a, b},
                         [r, k, c](const Tensor& o, std::span<const Tensor> in) {
                           auto g = o.grad();
                           if (in[0].requires_grad()) {
                             // dA += dC * B
                             kernels::gemm_nn(g, in[1].data(), in[0].grad_buffer(), r, c, k);
                           }
                           if (in[1].requires_grad()) {
                             // dB += dC^T * A
                             kernels::gemm_tn(g, in[0].data(), in[1].grad_buffer(), c, r, k);
                           }
                         });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  kernels::add(a.data(), b.data(), out);
  return Tensor::from_op(a.shape(), std::move(out), {a, b},
                         [](const Tensor& o, std::span<const Tensor> in) {
                           for (const Tensor& t : in) {
                             if (t.requires_grad()) kernels::axpy(1.0, o.grad(), t.grad_buffer());
                           }
                         });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  kernels::sub(a.data(), b.data(), out);
  return Tensor::from_op(a.shape(), std::move(out), {a, b},
                         [](const Tensor& o, std::span<const Tensor> in) {
                           if (in[0].requires_grad()) kernels::axpy(1.0, o.grad(), in[0].grad_buffer());
                           if (in[1].requires_grad()) kernels::axpy(-1.0, o.grad(), in[1].grad_buffer());
                         });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  kernels::mul(a.data(), b.data(), out);
  return Tensor::from_op(a.shape(), std::move(out), {a, b},
                         [](const Tensor& o, std::span<const Tensor> in) {
                           if (in[0].requires_grad()) {
                             kernels::mul_acc(o.grad(), in[1].data(), in[0].grad_buffer());
                           }
                           if (in[1].requires_grad()) {
                             kernels::mul_acc(o.grad(), in[0].data(), in[1].grad_buffer());
                           }
                         });
}

Tensor abs(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
}

Tensor tanh(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary_op(x, sigmoid_scalar, [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
  return unary_op(
      x, [](double v) { return v > 0 ? v : 0.0; }, [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Tensor scale(const Tensor& x, double factor) {
  return unary_op(
      x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor elementwise(Elementwise op, std::span<const Tensor> args) {
  const bool binary = op == Elementwise::kAdd || op == Elementwise::kSub || op == Elementwise::kMul;
  const std::size_t expected = binary ? 2 : 1;
  if (args.size() != expected) {
    throw UsageError("elementwise op expects " + std::to_string(expected) + " arguments, got " +
                     std::to_string(args.size()));
  }
  switch (op) {
    case Elementwise::kAdd: return add(args[0], args[1]);
    case Elementwise::kSub: return sub(args[0], args[1]);
    case Elementwise::kMul: return mul(args[0], args[1]);
    case Elementwise::kAbs: return abs(args[0]);
    case Elementwise::kTanh: return tanh(args[0]);
    case Elementwise::kSigmoid: return sigmoid(args[0]);
    case Elementwise::kRelu: return relu(args[0]);
  }
  throw UsageError("unknown elementwise op");
}

Tensor softmax(const Tensor& x) {
  if (x.rank() == 0) throw DimensionError("softmax needs at least one axis");
  const std::size_t d = x.shape().back();
  if (d == 0) throw DimensionError("softmax over an empty axis");
  const std::size_t rows = x.size() / d;
  auto in = x.data();
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = in.data() + r * d;
    double* dst = out.data() + r * d;
    double peak = src[0];
    for (std::size_t i = 0; i < d; ++i) {
      if (!std::isfinite(src[i])) {
        throw NumericInputError("softmax input contains a non-finite value");
      }
      peak = std::max(peak, src[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      dst[i] = std::exp(src[i] - peak);
      total += dst[i];
    }
    for (std::size_t i = 0; i < d; ++i) dst[i] /= total;
  }
  return Tensor::from_op(x.shape(), std::move(out), {x},
                         [rows, d](const Tensor& o, std::span<const Tensor> in) {
                           auto g = o.grad();
                           auto y = o.data();
                           auto dx = in[0].grad_buffer();
                           for (std::size_t r = 0; r < rows; ++r) {
                             const auto gr = g.subspan(r * d, d);
                             const auto yr = y.subspan(r * d, d);
                             const double inner = kernels::dot(gr, yr);
                             for (std::size_t i = 0; i < d; ++i) {
                               dx[r * d + i] += yr[i] * (gr[i] - inner);
                             }
                           }
                         });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw UsageError("concat of zero tensors");
  const std::size_t rank = parts[0].rank();
  if (rank == 0 || rank > 2 || axis >= rank) {
    throw DimensionError("concat supports rank-1/2 tensors along an existing axis, got shape " +
                         shape_to_string(parts[0].shape()) + " axis " + std::to_string(axis));
  }
  for (const Tensor& p : parts) {
    bool ok = p.rank() == rank;
    for (std::size_t a = 0; ok && a < rank; ++a) {
      if (a != axis && p.dim(a) != parts[0].dim(a)) ok = false;
    }
    if (!ok) {
      throw DimensionError("concat: shape " + shape_to_string(p.shape()) +
                           " does not match " + shape_to_string(parts[0].shape()) +
                           " outside axis " + std::to_string(axis));
    }
  }
  // View every part as [outer x inner_k] where the concat runs along inner.
  const std::size_t outer = (rank == 2 && axis == 1) ? parts[0].dim(0) : 1;
  std::vector<std::size_t> widths;
  std::size_t total_width = 0;
  for (const Tensor& p : parts) {
    widths.push_back(p.size() / outer);
    total_width += widths.back();
  }
  std::vector<double> out(outer * total_width);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto src = parts[k].data();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(src.data() + o * widths[k], widths[k], out.data() + o * total_width + offset);
    }
    offset += widths[k];
  }
  Shape shape = parts[0].shape();
  shape[axis] = 0;
  for (const Tensor& p : parts) shape[axis] += p.dim(axis);
  return Tensor::from_op(std::move(shape), std::move(out),
                         std::vector<Tensor>(parts.begin(), parts.end()),
                         [outer, widths, total_width](const Tensor& o, std::span<const Tensor> in) {
                           auto g = o.grad();
                           std::size_t offset = 0;
                           for (std::size_t k = 0; k < in.size(); ++k) {
                             if (in[k].requires_grad()) {
                               auto dst = in[k].grad_buffer();
                               for (std::size_t r = 0; r < outer; ++r) {
                                 kernels::axpy(1.0, g.subspan(r * total_width + offset, widths[k]),
                                               dst.subspan(r * widths[k], widths[k]));
                               }
                             }
                             offset += widths[k];
                           }
                         });
}

Tensor stack(std::span<const Tensor> rows) {
  if (rows.empty()) throw UsageError("stack of zero tensors");
  for (const Tensor& r : rows) {
    require_rank(r, 1, "stack");
    if (r.dim(0) != rows[0].dim(0)) {
      throw DimensionError("stack: row shapes " + shape_to_string(r.shape()) + " and " +
                           shape_to_string(rows[0].shape()) + " differ");
    }
  }
  Tensor flat = concat(rows, 0);
  return reshape(flat, {rows.size(), rows[0].dim(0)});
}

Tensor row(const Tensor& matrix, std::size_t i) {
  require_rank(matrix, 2, "row");
  const std::size_t cols = matrix.dim(1);
  if (i >= matrix.dim(0)) {
    throw DimensionError("row " + std::to_string(i) + " out of range for shape " +
                         shape_to_string(matrix.shape()));
  }
  auto src = matrix.data().subspan(i * cols, cols);
  return Tensor::from_op({cols}, std::vector<double>(src.begin(), src.end()), {matrix},
                         [i, cols](const Tensor& o, std::span<const Tensor> in) {
                           kernels::axpy(1.0, o.grad(), in[0].grad_buffer().subspan(i * cols, cols));
                         });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("cannot reshape " + shape_to_string(x.shape()) + " to " +
                         shape_to_string(shape));
  }
  auto src = x.data();
  return Tensor::from_op(std::move(shape), std::vector<double>(src.begin(), src.end()), {x},
                         [](const Tensor& o, std::span<const Tensor> in) {
                           kernels::axpy(1.0, o.grad(), in[0].grad_buffer());
                         });
}

Tensor sum(const Tensor& x) {
  return Tensor::from_op({}, {kernels::sum(x.data())}, {x},
                         [](const Tensor& o, std::span<const Tensor> in) {
                           const double g = o.grad()[0];
                           for (double& v : in[0].grad_buffer()) v += g;
                         });
}

Tensor sum_rows(const Tensor& x) {
  require_rank(x, 2, "sum_rows");
  const std::size_t rows = x.dim(0);
  const std::size_t cols = x.dim(1);
  std::vector<double> out(cols, 0.0);
  auto src = x.data();
  for (std::size_t r = 0; r < rows; ++r) kernels::axpy(1.0, src.subspan(r * cols, cols), out);
  return Tensor::from_op({cols}, std::move(out), {x},
                         [rows, cols](const Tensor& o, std::span<const Tensor> in) {
                           auto dx = in[0].grad_buffer();
                           for (std::size_t r = 0; r < rows; ++r) {
                             kernels::axpy(1.0, o.grad(), dx.subspan(r * cols, cols));
                           }
                         });
}

Tensor add_rowwise(const Tensor& m, const Tensor& bias) {
  require_rank(bias, 1, "add_rowwise bias");
  const std::size_t cols = bias.dim(0);
  if (m.rank() == 0 || m.rank() > 2 || m.shape().back() != cols) {
    throw DimensionError("add_rowwise: matrix " + shape_to_string(m.shape()) +
                         " does not match bias " + shape_to_string(bias.shape()));
  }
  const std::size_t rows = m.size() / cols;
  std::vector<double> out(m.size());
  for (std::size_t r = 0; r < rows; ++r) {
    kernels::add(m.data().subspan(r * cols, cols), bias.data(),
                 std::span<double>(out).subspan(r * cols, cols));
  }
  return Tensor::from_op(m.shape(), std::move(out), {m, bias},
                         [rows, cols](const Tensor& o, std::span<const Tensor> in) {
                           auto g = o.grad();
                           if (in[0].requires_grad()) kernels::axpy(1.0, g, in[0].grad_buffer());
                           if (in[1].requires_grad()) {
                             auto db = in[1].grad_buffer();
                             for (std::size_t r = 0; r < rows; ++r) {
                               kernels::axpy(1.0, g.subspan(r * cols, cols), db);
                             }
                           }
                         });
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> ids) {
  require_rank(table, 2, "embedding_lookup table");
  const std::size_t vocab = table.dim(0);
  const std::size_t width = table.dim(1);
  std::vector<double> out(ids.size() * width);
  auto src = table.data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw VocabularyError("token id " + std::to_string(ids[i]) +
                            " outside embedding table of " + std::to_string(vocab) + " rows");
    }
    std::copy_n(src.data() + ids[i] * width, width, out.data() + i * width);
  }
  std::vector<int> kept(ids.begin(), ids.end());
  return Tensor::from_op({ids.size(), width}, std::move(out), {table},
                         [kept, width](const Tensor& o, std::span<const Tensor> in) {
                           auto g = o.grad();
                           auto dt = in[0].grad_buffer();
                           for (std::size_t i = 0; i < kept.size(); ++i) {
                             kernels::axpy(1.0, g.subspan(i * width, width),
                                           dt.subspan(static_cast<std::size_t>(kept[i]) * width, width));
                           }
                         });
}

Tensor gru_cell(const Tensor& x, const Tensor& h, const GruWeights& w) {
  require_rank(x, 1, "gru_cell input");
  require_rank(h, 1, "gru_cell state");
  require_rank(w.input_kernel, 2, "gru_cell input kernel");
  require_rank(w.recurrent_kernel, 2, "gru_cell recurrent kernel");
  require_rank(w.bias, 1, "gru_cell bias");
  const std::size_t in_dim = x.dim(0);
  const std::size_t hid = h.dim(0);
  if (w.input_kernel.dim(0) != in_dim || w.input_kernel.dim(1) != 3 * hid ||
      w.recurrent_kernel.dim(0) != hid || w.recurrent_kernel.dim(1) != 3 * hid ||
      w.bias.dim(0) != 3 * hid) {
    throw DimensionError("gru_cell: input " + shape_to_string(x.shape()) + ", state " +
                         shape_to_string(h.shape()) + " do not fit kernels " +
                         shape_to_string(w.input_kernel.shape()) + ", " +
                         shape_to_string(w.recurrent_kernel.shape()) + ", bias " +
                         shape_to_string(w.bias.shape()));
  }
  const std::size_t h3 = 3 * hid;
  auto xv = x.data();
  auto hv = h.data();
  auto wx = w.input_kernel.data();
  auto uh = w.recurrent_kernel.data();

  // Pre-activations [z | r | c]; the recurrent part of c is added after r is known.
  std::vector<double> pre(w.bias.data().begin(), w.bias.data().end());
  kernels::gemm_nn(xv, wx, pre, 1, in_dim, h3);
  for (std::size_t i = 0; i < hid; ++i) {
    kernels::axpy(hv[i], uh.subspan(i * h3, 2 * hid), std::span<double>(pre).subspan(0, 2 * hid));
  }
  std::vector<double> z(hid), r(hid), rh(hid), cand(hid), out(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    z[j] = 1.0 / (1.0 + std::exp(-pre[j]));
    r[j] = 1.0 / (1.0 + std::exp(-pre[hid + j]));
    rh[j] = r[j] * hv[j];
  }
  for (std::size_t i = 0; i < hid; ++i) {
    kernels::axpy(rh[i], uh.subspan(i * h3 + 2 * hid, hid),
                  std::span<double>(pre).subspan(2 * hid, hid));
  }
  for (std::size_t j = 0; j < hid; ++j) {
    cand[j] = std::tanh(pre[2 * hid + j]);
    out[j] = z[j] * hv[j] + (1.0 - z[j]) * cand[j];
  }

  auto backward = [in_dim, hid, z, r, rh, cand](const Tensor& o, std::span<const Tensor> in) {
    const std::size_t h3 = 3 * hid;
    const Tensor& x = in[0];
    const Tensor& h = in[1];
    const Tensor& wx = in[2];
    const Tensor& uh = in[3];
    const Tensor& b = in[4];
    auto g = o.grad();
    auto hv = h.data();
    auto uv = uh.data();

    std::vector<double> dpre(h3, 0.0);  // gradient w.r.t. pre-activations
    std::vector<double> dh(hid, 0.0);
    for (std::size_t j = 0; j < hid; ++j) {
      const double dz = g[j] * (hv[j] - cand[j]);
      const double dc = g[j] * (1.0 - z[j]);
      dh[j] += g[j] * z[j];
      dpre[j] = dz * z[j] * (1.0 - z[j]);
      dpre[2 * hid + j] = dc * (1.0 - cand[j] * cand[j]);
    }
    const std::span<const double> dcand(dpre.data() + 2 * hid, hid);
    // d(r*h) = dcand * Uc^T
    std::vector<double> drh(hid, 0.0);
    for (std::size_t i = 0; i < hid; ++i) drh[i] = kernels::dot(uv.subspan(i * h3 + 2 * hid, hid), dcand);
    for (std::size_t j = 0; j < hid; ++j) {
      dh[j] += drh[j] * r[j];
      const double dr = drh[j] * hv[j];
      dpre[hid + j] = dr * r[j] * (1.0 - r[j]);
    }
    const std::span<const double> dzr(dpre.data(), 2 * hid);
    for (std::size_t i = 0; i < hid; ++i) dh[i] += kernels::dot(uv.subspan(i * h3, 2 * hid), dzr);

    if (b.requires_grad()) kernels::axpy(1.0, dpre, b.grad_buffer());
    if (wx.requires_grad()) kernels::gemm_tn(x.data(), dpre, wx.grad_buffer(), in_dim, 1, h3);
    if (uh.requires_grad()) {
      auto du = uh.grad_buffer();
      for (std::size_t i = 0; i < hid; ++i) {
        kernels::axpy(hv[i], dzr, du.subspan(i * h3, 2 * hid));
        kernels::axpy(rh[i], dcand, du.subspan(i * h3 + 2 * hid, hid));
      }
    }
    if (x.requires_grad()) kernels::gemm_nt(dpre, wx.data(), x.grad_buffer(), 1, h3, in_dim);
    if (h.requires_grad()) kernels::axpy(1.0, dh, h.grad_buffer());
  };
  return Tensor::from_op({hid}, std::move(out),
                         {x, h, w.input_kernel, w.recurrent_kernel, w.bias}, std::move(backward));
}

Tensor cross_entropy(const Tensor& dist, int target) {
  require_rank(dist, 1, "cross_entropy");
  if (target < 0 || static_cast<std::size_t>(target) >= dist.dim(0)) {
    throw VocabularyError("target id " + std::to_string(target) + " outside distribution of " +
                          std::to_string(dist.dim(0)) + " classes");
  }
  constexpr double kFloor = 1e-12;
  const double p = dist.at(static_cast<std::size_t>(target));
  const double clamped = std::max(p, kFloor);
  return Tensor::from_op({}, {-std::log(clamped)}, {dist},
                         [target, p](const Tensor& o, std::span<const Tensor> in) {
                           if (p > kFloor) {
                             in[0].grad_buffer()[static_cast<std::size_t>(target)] -= o.grad()[0] / p;
                           }
                         });
}

}  // namespace smn
