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

#ifndef SMN_ADAM_HPP_
#define SMN_ADAM_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "smn/parameters.hpp"

namespace smn {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment buffers for exactly the parameters of the set it was created for.
class AdamState {
 public:
  AdamState(const ParameterSet& params, AdamOptions options = {});

  const AdamOptions& options() const { return options_; }
  std::uint64_t steps() const { return steps_; }

  // Bias-corrected Adam update of every parameter, then zeroes the gradients.
  // Throws UsageError naming a parameter without a gradient.
  void step(ParameterSet& params);

 private:
  struct Moments {
    std::vector<double> first;
    std::vector<double> second;
  };
  AdamOptions options_;
  std::uint64_t steps_ = 0;
  std::map<std::string, Moments> moments_;
};

inline void adam_step(ParameterSet& params, AdamState& state) { state.step(params); }

// Rescales all gradients so their global L2 norm is at most max_norm. Returns
// the norm before clipping.
double clip_grad_norm(ParameterSet& params, double max_norm);

}  // namespace smn

#endif  // SMN_ADAM_HPP_
