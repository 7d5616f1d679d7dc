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

#include <atomic>
#include <cstdlib>
#include <string>

#include "smn/error.hpp"
#include "smn/kernels.hpp"

namespace smn::kernels {
namespace {

Backend detect_backend() {
  if (const char* forced = std::getenv("SMN_KERNELS")) {
    const std::string name(forced);
    if (name == "scalar") return Backend::kScalar;
    if (name == "avx2" && backend_supported(Backend::kAvx2)) return Backend::kAvx2;
    if (name == "neon" && backend_supported(Backend::kNeon)) return Backend::kNeon;
  }
  if (backend_supported(Backend::kAvx2)) return Backend::kAvx2;
  if (backend_supported(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{table_for(detect_backend())};
  return table;
}

const KernelTable& kt() { return *active_table().load(std::memory_order_relaxed); }

void check_same(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": lengths " + std::to_string(a) + " and " +
                         std::to_string(b) + " differ");
  }
}

}  // namespace

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
    case Backend::kNeon: return "neon";
  }
  return "unknown";
}

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::kScalar: return detail::scalar_table();
    case Backend::kAvx2: return detail::cpu_has_avx2() ? detail::avx2_table() : nullptr;
    case Backend::kNeon: return detail::neon_table();
  }
  return nullptr;
}

bool backend_supported(Backend backend) { return table_for(backend) != nullptr; }

Backend active_backend() {
  const KernelTable* table = active_table().load();
  if (table == detail::scalar_table()) return Backend::kScalar;
  return table == detail::avx2_table() ? Backend::kAvx2 : Backend::kNeon;
}

void set_backend(Backend backend) {
  const KernelTable* table = table_for(backend);
  if (table == nullptr) {
    throw UsageError("kernel backend '" + std::string(backend_name(backend)) +
                     "' is not available on this CPU");
  }
  active_table().store(table);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size(), "dot");
  return kt().dot(a.data(), b.data(), a.size());
}

double sum(std::span<const double> x) { return kt().sum(x.data(), x.size()); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same(x.size(), y.size(), "axpy");
  kt().axpy(alpha, x.data(), y.data(), x.size());
}

void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_same(a.size(), b.size(), "add");
  check_same(a.size(), out.size(), "add");
  kt().add(a.data(), b.data(), out.data(), a.size());
}

void sub(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_same(a.size(), b.size(), "sub");
  check_same(a.size(), out.size(), "sub");
  kt().sub(a.data(), b.data(), out.data(), a.size());
}

void mul(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_same(a.size(), b.size(), "mul");
  check_same(a.size(), out.size(), "mul");
  kt().mul(a.data(), b.data(), out.data(), a.size());
}

void mul_acc(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_same(a.size(), b.size(), "mul_acc");
  check_same(a.size(), out.size(), "mul_acc");
  kt().mul_acc(a.data(), b.data(), out.data(), a.size());
}

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t r, std::size_t k, std::size_t n) {
  check_same(a.size(), r * k, "gemm_nn lhs");
  check_same(b.size(), k * n, "gemm_nn rhs");
  check_same(c.size(), r * n, "gemm_nn out");
  const KernelTable& t = kt();
  for (std::size_t i = 0; i < r; ++i) {
    double* c_row = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      t.axpy(a[i * k + p], b.data() + p * n, c_row, n);
    }
  }
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t r, std::size_t k, std::size_t n) {
  check_same(a.size(), r * k, "gemm_nt lhs");
  check_same(b.size(), n * k, "gemm_nt rhs");
  check_same(c.size(), r * n, "gemm_nt out");
  const KernelTable& t = kt();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      c[i * n + j] += t.dot(a.data() + i * k, b.data() + j * k, k);
    }
  }
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t r, std::size_t k, std::size_t n) {
  check_same(a.size(), k * r, "gemm_tn lhs");
  check_same(b.size(), k * n, "gemm_tn rhs");
  check_same(c.size(), r * n, "gemm_tn out");
  const KernelTable& t = kt();
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < r; ++i) {
      t.axpy(a[p * r + i], b.data() + p * n, c.data() + i * n, n);
    }
  }
}

}  // namespace smn::kernels
