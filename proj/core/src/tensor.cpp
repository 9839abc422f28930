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

#include "dylo/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "dylo/errors.hpp"

namespace dylo {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one axis");
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor shape " + shape_str(shape) + " has a zero extent");
  }
}

template <typename T>
Tape<T>*& tape_slot() {
  thread_local Tape<T>* slot = nullptr;
  return slot;
}

}  // namespace

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : storage_(std::make_shared<Storage>()) {
  check_shape(shape);
  storage_->data.assign(shape_numel(shape), fill);
  storage_->shape = std::move(shape);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : storage_(std::make_shared<Storage>()) {
  check_shape(shape);
  if (data.size() != shape_numel(shape)) {
    throw DimensionError("data length " + std::to_string(data.size()) + " does not match shape " +
                         shape_str(shape));
  }
  storage_->shape = std::move(shape);
  storage_->data = std::move(data);
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  return storage_->data[0];
}

template <typename T>
T& Tensor<T>::at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
  const auto& s = storage_->shape;
  return storage_->data[((n * s[1] + c) * s[2] + y) * s[3] + x];
}

template <typename T>
T Tensor<T>::at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
  const auto& s = storage_->shape;
  return storage_->data[((n * s[1] + c) * s[2] + y) * s[3] + x];
}

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
  storage_->requires_grad = on;
  return *this;
}

template <typename T>
std::span<T> Tensor<T>::grad() {
  if (!has_grad()) throw StateError("tensor has no gradient");
  return storage_->grad;
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
  if (!has_grad()) throw StateError("tensor has no gradient");
  return storage_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() {
  std::fill(storage_->grad.begin(), storage_->grad.end(), T(0));
}

template <typename T>
std::span<T> Tensor<T>::ensure_grad() {
  if (storage_->grad.empty()) storage_->grad.assign(storage_->data.size(), T(0));
  return storage_->grad;
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return Tensor(storage_->shape, storage_->data);
}

template <typename T>
void Tape<T>::record(std::vector<StoragePtr> inputs, StoragePtr output, BackwardFn fn) {
  output->tape = this;
  nodes_.push_back(Node{std::move(inputs), std::move(output), std::move(fn)});
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ArgumentError("backward requires a scalar loss");
  }
  if (loss.storage()->tape != this) {
    throw StateError("loss was not produced by this tape");
  }
  auto& seed = loss.storage()->grad;
  if (seed.empty()) seed.assign(1, T(0));
  seed[0] += T(1);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->output->grad.empty()) continue;  // not upstream of the loss
    it->backward();
  }
  nodes_.clear();
}

template <typename T>
Tape<T>* active_tape() {
  return tape_slot<T>();
}

template <typename T>
TapeScope<T>::TapeScope(Tape<T>& tape) : previous_(tape_slot<T>()) {
  tape_slot<T>() = &tape;
}

template <typename T>
TapeScope<T>::~TapeScope() {
  tape_slot<T>() = previous_;
}

template <typename T>
NoGradScope<T>::NoGradScope() : previous_(tape_slot<T>()) {
  tape_slot<T>() = nullptr;
}

template <typename T>
NoGradScope<T>::~NoGradScope() {
  tape_slot<T>() = previous_;
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template Tape<float>* active_tape<float>();
template Tape<double>* active_tape<double>();
template class TapeScope<float>;
template class TapeScope<double>;
template class NoGradScope<float>;
template class NoGradScope<double>;

}  // namespace dylo
