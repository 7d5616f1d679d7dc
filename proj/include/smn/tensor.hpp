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

#ifndef SMN_TENSOR_HPP_
#define SMN_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace smn {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

class Tensor;

// Propagates output.grad() into the grad buffers of the inputs that require
// gradients. Must not capture the output tensor itself.
using BackwardFn = std::function<void(const Tensor& output, std::span<const Tensor> inputs)>;

namespace detail {
struct Node;
}  // namespace detail

// Dense row-major f64 array with reverse-mode gradient tracking.
//
// Tensor is a shared handle: copies alias the same storage. Results of ops on
// tensors that require gradients remember their inputs; Tensor::backward on a
// scalar result walks that graph in reverse topological order.
//
// Gradients of leaf tensors accumulate across backward() calls until
// zero_grad() is called; intermediate results get fresh gradients on every
// backward().
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  // Builds the result of an op. The graph edge is only recorded when gradient
  // recording is enabled and at least one input requires gradients.
  static Tensor from_op(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                        BackwardFn backward);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> data() const;
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t i) const;
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  bool has_grad() const;
  // Empty span when no gradient has been produced yet.
  std::span<const double> grad() const;
  // Allocates a zero gradient on first use.
  std::span<double> grad_buffer() const;
  void zero_grad();
  void drop_grad();

  // Fills gradients of every requires_grad tensor reachable from this scalar.
  void backward() const;

  // Copy of the values without graph history.
  Tensor detach() const;
  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

bool grad_enabled();

// Disables graph recording for its lifetime on the current thread.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace smn

#endif  // SMN_TENSOR_HPP_
