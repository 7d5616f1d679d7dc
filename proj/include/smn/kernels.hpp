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

#ifndef SMN_KERNELS_HPP_
#define SMN_KERNELS_HPP_

// Dense f64 inner loops used by the tensor library. Every kernel has a scalar
// reference version and, where the CPU supports it, an AVX2 (x86-64) or NEON
// (aarch64) version. The active backend is chosen once at startup from CPU
// features and can be overridden with SMN_KERNELS=scalar|avx2|neon or
// set_backend().
//
// Elementwise kernels give bit-identical results on every backend. Reductions
// (dot, sum) use a fixed lane order per backend, so results are deterministic
// for a given backend but may differ from the scalar order in the last bits.

#include <cstddef>
#include <span>
#include <string_view>

namespace smn::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

std::string_view backend_name(Backend backend);
bool backend_supported(Backend backend);
Backend active_backend();
// Throws UsageError if the backend is not supported on this CPU.
void set_backend(Backend backend);

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> x);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// out = a + b, a - b, a * b
void add(std::span<const double> a, std::span<const double> b, std::span<double> out);
void sub(std::span<const double> a, std::span<const double> b, std::span<double> out);
void mul(std::span<const double> a, std::span<const double> b, std::span<double> out);
// out += a * b
void mul_acc(std::span<const double> a, std::span<const double> b, std::span<double> out);

// Row-major matrix products that accumulate into c.
//   gemm_nn: c[r x n] += a[r x k] * b[k x n]
//   gemm_nt: c[r x n] += a[r x k] * b[n x k]^T
//   gemm_tn: c[r x n] += a[k x r]^T * b[k x n]
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t r, std::size_t k, std::size_t n);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t r, std::size_t k, std::size_t n);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t r, std::size_t k, std::size_t n);

// Per-backend entry points, exposed for equivalence testing.
struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*add)(const double*, const double*, double*, std::size_t);
  void (*sub)(const double*, const double*, double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*mul_acc)(const double*, const double*, double*, std::size_t);
};

// nullptr when the backend was not compiled in.
const KernelTable* table_for(Backend backend);

namespace detail {
const KernelTable* scalar_table();
const KernelTable* avx2_table();
const KernelTable* neon_table();
bool cpu_has_avx2();
}  // namespace detail

}  // namespace smn::kernels

#endif  // SMN_KERNELS_HPP_
