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

#ifndef SMN_GRADCHECK_HPP_
#define SMN_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smn/model.hpp"
#include "smn/tensor.hpp"

namespace smn {

// Configurations above this many weights are refused by run_gradcheck.
inline constexpr std::size_t kGradcheckMaxParameters = 100000;

// Largest relative error, |a - n| / max(|a|, |n|, 1e-6), between backward()
// gradients of loss() and central differences over every element of inputs.
double max_gradient_error(std::vector<Tensor> inputs, const std::function<Tensor()>& loss,
                          double step = 1e-5);

struct GradcheckEntry {
  std::string name;
  double max_relative_error = 0;
  bool passed = false;
};

struct GradcheckReport {
  double tolerance = 0;
  std::vector<GradcheckEntry> entries;

  bool passed() const;
};

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  std::size_t trials = 3;
  std::uint64_t seed = 0;
};

// tdatlen 8, comlen 4, e = l = 3, n 2, Y 3, h 2, small vocabularies.
ModelConfig gradcheck_toy_config();

// Checks every differentiable op at the config's dims, then the full forward
// pass of the config and its statement-encoding, gate-query, squash and
// attendgru_only variants. gate_fn replaces the gate everywhere it is used.
// Throws ConfigError when the config is invalid or has too many weights.
GradcheckReport run_gradcheck(const ModelConfig& config, const GradcheckOptions& options = {},
                              const GateFn& gate_fn = gate);

std::string format_gradcheck_report(const GradcheckReport& report);
nlohmann::json to_json(const GradcheckReport& report);

}  // namespace smn

#endif  // SMN_GRADCHECK_HPP_
