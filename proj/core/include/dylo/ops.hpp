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
#include <optional>
#include <vector>

#include "dylo/tensor.hpp"

// Differentiable tensor operations. Every op computes its forward result
// eagerly and, when a tape is active and some input requires a gradient,
// records a backward rule on that tape.
//
// Binary ops require identical shapes; the only broadcast is tensor-vs-scalar
// through add_scalar() and scale().

namespace dylo {

inline constexpr double kLeakySlope = 0.1;
inline constexpr double kBceClamp = 1e-7;

// Output side for a conv or pool window: floor((in + 2*pad - k) / stride) + 1.
std::size_t conv_out_size(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad);

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                 std::size_t stride, std::size_t padding);

// Padding behaves as -inf. Gradient goes to the first (row-major) maximum.
template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& input, std::size_t k, std::size_t stride,
                    std::size_t padding);

template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& input, std::size_t factor);

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis);

template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& input, std::size_t n);

// Channels [begin, end) of an NCHW tensor.
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& input, std::size_t begin, std::size_t end);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> minimum(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> maximum(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T s);
template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s);

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& a, T slope = T(kLeakySlope));
template <typename T>
Tensor<T> relu(const Tensor<T>& a);
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a);
template <typename T>
Tensor<T> exp(const Tensor<T>& a);
template <typename T>
Tensor<T> clamp(const Tensor<T>& a, T lo, T hi);

// Elementwise binary cross-entropy -[t ln p + (1-t) ln(1-p)], p clamped to
// [1e-7, 1-1e-7]. The gradient w.r.t. p is zero where the clamp is active.
template <typename T>
Tensor<T> bce(const Tensor<T>& p, const Tensor<T>& target);

// bce(sigmoid(z), t) computed from logits: max(z,0) - z t + ln(1 + e^-|z|).
// Gradient w.r.t. z is sigmoid(z) - t and never vanishes, unlike the
// clamped form, so a saturated positive can still recover.
template <typename T>
Tensor<T> bce_logits(const Tensor<T>& logits, const Tensor<T>& target);

template <typename T>
Tensor<T> sum(const Tensor<T>& a);
template <typename T>
Tensor<T> mean(const Tensor<T>& a);

// Flat-index gather into a 1-d tensor; backward scatters (adds) back.
template <typename T>
Tensor<T> gather(const Tensor<T>& a, const std::vector<std::size_t>& flat_indices);

enum class Elementwise { add, mul, sub, leaky_relu, sigmoid, bce };

// Dispatcher over the named elementwise kinds; unary kinds ignore `b`.
template <typename T>
Tensor<T> elementwise(Elementwise kind, const Tensor<T>& a,
                      const std::optional<Tensor<T>>& b = std::nullopt);

}  // namespace dylo
