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

#include "smn/adam.hpp"

#include <cmath>

#include "smn/error.hpp"

namespace smn {

AdamState::AdamState(const ParameterSet& params, AdamOptions options) : options_(options) {
  for (const auto& [name, t] : params) {
    moments_.emplace(name, Moments{std::vector<double>(t.size(), 0.0),
                                   std::vector<double>(t.size(), 0.0)});
  }
}

void AdamState::step(ParameterSet& params) {
  if (params.size() != moments_.size()) {
    throw UsageError("Adam state tracks " + std::to_string(moments_.size()) +
                     " parameters, set has " + std::to_string(params.size()));
  }
  for (const auto& [name, t] : params) {
    if (!moments_.contains(name)) throw UsageError("Adam state has no moments for '" + name + "'");
    if (!t.has_grad()) throw UsageError("parameter '" + name + "' has no gradient");
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(options_.beta1, t);
  const double correction2 = 1.0 - std::pow(options_.beta2, t);
  for (auto& [name, param] : params) {
    Moments& m = moments_.at(name);
    auto values = param.mutable_data();
    auto grad = param.grad();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      m.first[i] = options_.beta1 * m.first[i] + (1.0 - options_.beta1) * g;
      m.second[i] = options_.beta2 * m.second[i] + (1.0 - options_.beta2) * g * g;
      const double m_hat = m.first[i] / correction1;
      const double v_hat = m.second[i] / correction2;
      values[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
    param.zero_grad();
  }
}

double clip_grad_norm(ParameterSet& params, double max_norm) {
  double total = 0.0;
  for (const auto& [name, t] : params) {
    for (double g : t.grad()) total += g * g;
  }
  const double norm = std::sqrt(total);
  if (max_norm > 0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& [name, t] : params) {
      if (!t.has_grad()) continue;
      for (double& g : t.grad_buffer()) g *= factor;
    }
  }
  return norm;
}

}  // namespace smn
