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
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dylo/box.hpp"
#include "dylo/tensor.hpp"

namespace dylo {

struct Ratio {
  int num = 1;
  int den = 4;
  double value() const { return static_cast<double>(num) / den; }
  bool operator==(const Ratio&) const = default;
};

struct ModelConfig {
  int input_size = 160;
  int input_channels = 1;
  int num_classes = 7;
  std::vector<int> strides{8, 16, 32};
  int width = 16;
  int resc2net_n = 4;
  std::vector<int> sppf_kernels{5, 9, 13};
  Ratio pconv_ratio{1, 4};
  std::uint64_t seed = 0;

  // Throws ConfigError on any broken invariant.
  void validate() const;
  // Channel count of backbone level i (w, 2w, 4w, ...).
  int level_width(std::size_t level) const { return width << level; }
  int head_channels() const { return 5 + num_classes; }
  bool operator==(const ModelConfig&) const = default;
};

/// Raw head output for one stride. Channel order per cell:
/// tx, ty, tw, th, obj, class_0 .. class_{C-1}.
template <typename T>
struct PredGrid {
  int stride = 0;
  Tensor<T> tensor;  // [N, 5+C, S, S]

  std::size_t side() const { return tensor.dim(2); }
  std::size_t batch() const { return tensor.dim(0); }
};

inline constexpr double kSizeLogitClamp = 8.0;

/// Decodes one image of a grid into a box per cell:
/// center = (cell + sigmoid(t)) * stride, size = exp(clamp(t, -8, 8)) * stride,
/// score = sigmoid(obj) * max_c sigmoid(class_c).
template <typename T>
std::vector<DetBox> decode(const PredGrid<T>& grid, std::size_t image = 0);

/// Geometry part of decode for a single cell, on raw (tx, ty, tw, th).
DetBox decode_cell(double tx, double ty, double tw, double th, std::size_t row, std::size_t col,
                   int stride);

template <typename T>
struct Conv {
  Tensor<T> weight;  // [Cout, Cin, k, k]
  Tensor<T> bias;    // [Cout]
  std::size_t stride = 1;
  std::size_t padding = 0;

  Conv() = default;
  Conv(std::size_t cin, std::size_t cout, std::size_t k, std::size_t stride, std::size_t padding);
  Tensor<T> operator()(const Tensor<T>& x) const;
  std::size_t param_count() const { return weight.numel() + bias.numel(); }
};

/// Residual multi-branch block: 1x1 conv, channel split into n sub-maps,
/// cascaded per-branch 3x3 residuals, concatenation, 1x1 fusion, and an
/// outer residual.
template <typename T>
struct ResC2NetBlock {
  Conv<T> reduce;
  std::vector<Conv<T>> branches;  // n - 1 convs over C/n channels
  Conv<T> fuse;
  std::size_t n = 1;

  ResC2NetBlock() = default;
  ResC2NetBlock(std::size_t channels, std::size_t n);
  Tensor<T> operator()(const Tensor<T>& x) const;
};

/// Partial convolution: 3x3 conv over the first C*ratio channels, identity on
/// the rest.
template <typename T>
struct PConv {
  Conv<T> conv;
  std::size_t channels = 0;
  std::size_t conv_channels = 0;

  PConv() = default;
  PConv(std::size_t channels, Ratio ratio);
  Tensor<T> operator()(const Tensor<T>& x) const;
};

/// Identity branch plus parallel same-padding max pools, concatenated on the
/// channel axis, then a 1x1 projection back to C channels.
template <typename T>
struct Sppf {
  std::vector<int> kernels;
  Conv<T> project;

  Sppf() = default;
  Sppf(std::size_t channels, std::vector<int> kernels);
  Tensor<T> pooled(const Tensor<T>& x) const;  // pre-projection, (1+|k|)C channels
  Tensor<T> operator()(const Tensor<T>& x) const;
};

// Pre-projection SPPF concat for arbitrary kernels (even kernels rejected).
template <typename T>
Tensor<T> sppf_concat(const Tensor<T>& x, const std::vector<int>& kernels);

template <typename T>
class Detector {
 public:
  using NamedTensor = std::pair<std::string, Tensor<T>>;

  explicit Detector(ModelConfig config);
  Detector(Detector&&) noexcept = default;
  Detector& operator=(Detector&&) noexcept = default;
  Detector(const Detector&) = delete;
  Detector& operator=(const Detector&) = delete;

  // Deep copy with independent parameter buffers.
  Detector clone() const;

  const ModelConfig& config() const { return config_; }

  std::vector<PredGrid<T>> forward(const Tensor<T>& image) const;

  // Stable, ordered parameter table; handles alias the model's buffers.
  const std::vector<NamedTensor>& parameters() const { return params_; }
  std::size_t parameter_count() const;
  void zero_grad();
  void set_requires_grad(bool on);
  // Sets every weight and bias to zero.
  void zero_weights();

 private:
  struct Stage {
    Conv<T> down;
    ResC2NetBlock<T> block;
  };
  struct NeckLevel {
    PConv<T> pconv;
    Conv<T> reduce;
  };

  void register_params();
  void init_weights();

  ModelConfig config_;
  Conv<T> stem1_;
  Conv<T> stem2_;
  std::vector<Stage> stages_;
  Sppf<T> sppf_;
  std::vector<NeckLevel> neck_;  // neck_[i] produces level i (top level has none)
  std::vector<Conv<T>> heads_;
  std::vector<NamedTensor> params_;
};

using Detectorf = Detector<float>;
using Detectord = Detector<double>;

}  // namespace dylo
