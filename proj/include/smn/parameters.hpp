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

#ifndef SMN_PARAMETERS_HPP_
#define SMN_PARAMETERS_HPP_

#include <cstdint>
#include <map>
#include <string>

#include "smn/random.hpp"
#include "smn/tensor.hpp"

namespace smn {

enum class Init {
  kZeros,
  kUniformEmbedding,  // uniform(-0.05, 0.05)
  kGlorotUniform,     // uniform(+-sqrt(6 / (fan_in + fan_out))) on a [fan_in x fan_out] matrix
};

// Named model weights, iterated in lexicographic name order. Initial values
// are drawn from one generator seeded at construction, in the order the
// parameters are added.
class ParameterSet {
 public:
  using Map = std::map<std::string, Tensor>;

  explicit ParameterSet(std::uint64_t seed = 0) : seed_(seed), rng_(seed) {}

  const Tensor& add(const std::string& name, Shape shape, Init init);
  // Takes ownership of an existing tensor (used when loading checkpoints).
  void insert(const std::string& name, Tensor value);

  bool contains(const std::string& name) const { return params_.contains(name); }
  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);

  std::size_t size() const { return params_.size(); }
  std::size_t parameter_count() const;
  std::uint64_t seed() const { return seed_; }

  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }
  Map::iterator begin() { return params_.begin(); }
  Map::iterator end() { return params_.end(); }

  void zero_grad();
  // Deep copy with fresh storage and no gradients.
  ParameterSet clone() const;
  // True when names, shapes and every value match bit for bit.
  bool bitwise_equal(const ParameterSet& other) const;

 private:
  std::uint64_t seed_;
  Rng rng_;
  Map params_;
};

}  // namespace smn

#endif  // SMN_PARAMETERS_HPP_
