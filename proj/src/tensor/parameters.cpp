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

#include "smn/parameters.hpp"

#include <cmath>
#include <cstring>

#include "smn/error.hpp"

namespace smn {

const Tensor& ParameterSet::add(const std::string& name, Shape shape, Init init) {
  if (params_.contains(name)) throw UsageError("duplicate parameter '" + name + "'");
  std::vector<double> values(shape_size(shape), 0.0);
  switch (init) {
    case Init::kZeros:
      break;
    case Init::kUniformEmbedding:
      for (double& v : values) v = rng_.uniform(-0.05, 0.05);
      break;
    case Init::kGlorotUniform: {
      if (shape.size() != 2) {
        throw DimensionError("Glorot init needs a matrix, got " + shape_to_string(shape) +
                             " for '" + name + "'");
      }
      const double limit = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
      for (double& v : values) v = rng_.uniform(-limit, limit);
      break;
    }
  }
  auto [it, inserted] =
      params_.emplace(name, Tensor::from_data(std::move(shape), std::move(values), true));
  return it->second;
}

void ParameterSet::insert(const std::string& name, Tensor value) {
  if (params_.contains(name)) throw UsageError("duplicate parameter '" + name + "'");
  params_.emplace(name, Tensor::from_data(value.shape(),
                                          std::vector<double>(value.data().begin(),
                                                              value.data().end()),
                                          true));
}

const Tensor& ParameterSet::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw UsageError("unknown parameter '" + name + "'");
  return it->second;
}

Tensor& ParameterSet::get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw UsageError("unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [name, t] : params_) t.zero_grad();
}

ParameterSet ParameterSet::clone() const {
  ParameterSet copy(seed_);
  for (const auto& [name, t] : params_) copy.insert(name, t);
  return copy;
}

bool ParameterSet::bitwise_equal(const ParameterSet& other) const {
  if (params_.size() != other.params_.size()) return false;
  auto a = params_.begin();
  auto b = other.params_.begin();
  for (; a != params_.end(); ++a, ++b) {
    if (a->first != b->first || a->second.shape() != b->second.shape()) return false;
    const auto x = a->second.data();
    const auto y = b->second.data();
    if (std::memcmp(x.data(), y.data(), x.size_bytes()) != 0) return false;
  }
  return true;
}

}  // namespace smn
