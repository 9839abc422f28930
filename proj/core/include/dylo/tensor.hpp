// Copyright (c) 2026 The dylo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dylo {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <typename T>
class Tape;

template <typename T>
struct TensorStorage {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until a gradient is accumulated
  bool requires_grad = false;
  // Tape that recorded the op producing this tensor; null for leaves.
  const Tape<T>* tape = nullptr;
};

/// Dense row-major tensor (NCHW for images).
///
/// A Tensor is a shared handle: copies alias the same storage, which is what
/// lets the tape and the model refer to one parameter buffer. Use clone() for
/// a deep copy and detach() for a copy that is cut off from any tape.
template <typename T>
class Tensor {
 public:
  using Storage = TensorStorage<T>;
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> data);

  static Tensor scalar(T value) { return Tensor(Shape{1}, value); }

  bool defined() const { return storage_ != nullptr; }
  const Shape& shape() const { return storage_->shape; }
  std::size_t dim(std::size_t axis) const { return storage_->shape.at(axis); }
  std::size_t rank() const { return storage_->shape.size(); }
  std::size_t numel() const { return storage_->data.size(); }

  std::span<T> data() { return storage_->data; }
  std::span<const T> data() const { return storage_->data; }
  T item() const;

  // 4-d accessors for NCHW tensors.
  T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x);
  T at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const;

  bool requires_grad() const { return storage_->requires_grad; }
  Tensor& set_requires_grad(bool on = true);

  bool has_grad() const { return !storage_->grad.empty(); }
  std::span<T> grad();
  std::span<const T> grad() const;
  void zero_grad();
  // Allocates the gradient buffer (zero-filled) if absent.
  std::span<T> ensure_grad();

  // Deep copy of shape and data; the copy is a leaf with no gradient.
  Tensor clone() const;
  Tensor detach() const { return clone(); }

  Storage* storage() const { return storage_.get(); }
  const std::shared_ptr<Storage>& storage_ptr() const { return storage_; }

 private:
  std::shared_ptr<Storage> storage_;
};

/// Ordered record of differentiable ops. Nodes are appended in execution
/// order, so reverse iteration is a valid topological order.
template <typename T>
class Tape {
 public:
  using StoragePtr = std::shared_ptr<TensorStorage<T>>;
  using BackwardFn = std::function<void()>;

  struct Node {
    std::vector<StoragePtr> inputs;
    StoragePtr output;
    BackwardFn backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::vector<StoragePtr> inputs, StoragePtr output, BackwardFn fn);

  /// Seeds d(loss)/d(loss) = 1 and runs every recorded rule in reverse.
  /// Gradients accumulate into leaves; the tape is cleared afterwards.
  void backward(const Tensor<T>& loss);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  void clear() { nodes_.clear(); }

 private:
  std::vector<Node> nodes_;
};

template <typename T>
void backward(const Tensor<T>& loss, Tape<T>& tape) {
  tape.backward(loss);
}

// The tape ops record onto. Thread-local so independent training runs can
// share a process.
template <typename T>
Tape<T>* active_tape();

template <typename T>
class TapeScope {
 public:
  explicit TapeScope(Tape<T>& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape<T>* previous_;
};

// Suspends recording (inference, validation).
template <typename T>
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape<T>* previous_;
};

using Tensorf = Tensor<float>;
using Tensord = Tensor<double>;

}  // namespace dylo
