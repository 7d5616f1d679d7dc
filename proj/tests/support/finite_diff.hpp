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

#ifndef SMN_TESTS_SUPPORT_FINITE_DIFF_HPP_
#define SMN_TESTS_SUPPORT_FINITE_DIFF_HPP_

// Central-difference gradient oracle for tests. It only ever evaluates the
// forward pass, so it is independent of every backward implementation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "smn/random.hpp"
#include "smn/tensor.hpp"

namespace smn::testing {

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
  return std::fabs(analytic - numeric) / scale;
}

// Largest relative error between backward() gradients and central differences
// of loss() with respect to every element of every input.
inline double max_gradient_error(std::vector<Tensor> inputs, const std::function<Tensor()>& loss,
                                 double step = 1e-5) {
  for (Tensor& t : inputs) t.drop_grad();
  loss().backward();
  std::vector<std::vector<double>> analytic;
  for (const Tensor& t : inputs) {
    auto g = t.grad();
    analytic.emplace_back(g.begin(), g.end());
    if (analytic.back().empty()) analytic.back().assign(t.size(), 0.0);
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto values = inputs[k].mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = loss().item();
      values[i] = saved - step;
      const double down = loss().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, relative_error(analytic[k][i], numeric));
    }
  }
  return worst;
}

inline Tensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0,
                            bool requires_grad = true) {
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::from_data(std::move(shape), std::move(v), requires_grad);
}

}  // namespace smn::testing

#endif  // SMN_TESTS_SUPPORT_FINITE_DIFF_HPP_
