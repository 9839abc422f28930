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

#include "dylo/model.hpp"

#include <algorithm>
#include <cmath>

#include "dylo/errors.hpp"
#include "dylo/ops.hpp"

namespace dylo {

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("model config: " + what); };
  if (input_size <= 0) fail("input_size must be positive");
  if (input_channels != 1 && input_channels != 3) fail("input_channels must be 1 or 3");
  if (num_classes < 1) fail("num_classes must be >= 1");
  if (strides.empty()) fail("strides must not be empty");
  if (strides.front() != 8) fail("first stride must be 8");
  for (std::size_t i = 1; i < strides.size(); ++i) {
    if (strides[i] != 2 * strides[i - 1]) fail("strides must double level to level");
  }
  if (input_size % strides.back() != 0) {
    fail("input_size " + std::to_string(input_size) + " not divisible by max stride " +
         std::to_string(strides.back()));
  }
  if (width <= 0) fail("width must be positive");
  if (resc2net_n < 1 || width % resc2net_n != 0) {
    fail("width must be divisible by resc2net_n");
  }
  if (pconv_ratio.num <= 0 || pconv_ratio.den <= 0 || pconv_ratio.num > pconv_ratio.den) {
    fail("pconv_ratio must lie in (0, 1]");
  }
  if (width % pconv_ratio.den != 0) fail("width must be divisible by the pconv ratio denominator");
  if (sppf_kernels.empty()) fail("sppf_kernels must not be empty");
  for (int k : sppf_kernels) {
    if (k < 1 || k % 2 == 0) fail("sppf kernels must be odd and positive");
  }
}

namespace {

double sigmoid_d(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

DetBox decode_cell(double tx, double ty, double tw, double th, std::size_t row, std::size_t col,
                   int stride) {
  DetBox b;
  b.cx = (static_cast<double>(col) + sigmoid_d(tx)) * stride;
  b.cy = (static_cast<double>(row) + sigmoid_d(ty)) * stride;
  b.w = std::exp(std::clamp(tw, -kSizeLogitClamp, kSizeLogitClamp)) * stride;
  b.h = std::exp(std::clamp(th, -kSizeLogitClamp, kSizeLogitClamp)) * stride;
  return b;
}

template <typename T>
std::vector<DetBox> decode(const PredGrid<T>& grid, std::size_t image) {
  const Tensor<T>& t = grid.tensor;
  const std::size_t C = t.dim(1) - 5, S = t.dim(2);
  std::vector<DetBox> out;
  out.reserve(S * S);
  for (std::size_t i = 0; i < S; ++i) {
    for (std::size_t j = 0; j < S; ++j) {
      DetBox b = decode_cell(t.at(image, 0, i, j), t.at(image, 1, i, j), t.at(image, 2, i, j),
                             t.at(image, 3, i, j), i, j, grid.stride);
      int best = 0;
      double best_p = -1;
      for (std::size_t c = 0; c < C; ++c) {
        const double p = sigmoid_d(t.at(image, 5 + c, i, j));
        if (p > best_p) {
          best_p = p;
          best = static_cast<int>(c);
        }
      }
      b.class_id = best;
      b.score = sigmoid_d(t.at(image, 4, i, j)) * best_p;
      out.push_back(b);
    }
  }
  return out;
}

template <typename T>
Conv<T>::Conv(std::size_t cin, std::size_t cout, std::size_t k, std::size_t stride,
              std::size_t padding)
    : weight(Shape{cout, cin, k, k}), bias(Shape{cout}), stride(stride), padding(padding) {}

template <typename T>
Tensor<T> Conv<T>::operator()(const Tensor<T>& x) const {
  return conv2d(x, weight, bias, stride, padding);
}

template <typename T>
ResC2NetBlock<T>::ResC2NetBlock(std::size_t channels, std::size_t n)
    : reduce(channels, channels, 1, 1, 0), fuse(channels, channels, 1, 1, 0), n(n) {
  if (n < 1 || channels % n != 0) {
    throw DimensionError("resc2net: " + std::to_string(channels) + " channels not divisible by " +
                         std::to_string(n));
  }
  const std::size_t sub = channels / n;
  for (std::size_t i = 1; i < n; ++i) branches.emplace_back(sub, sub, 3, 1, 1);
}

template <typename T>
Tensor<T> ResC2NetBlock<T>::operator()(const Tensor<T>& x) const {
  if (x.rank() != 4 || x.dim(1) % n != 0) {
    throw DimensionError("resc2net: input " + shape_str(x.shape()) + " not splittable into " +
                         std::to_string(n));
  }
  const auto parts = split_channels(leaky_relu(reduce(x)), n);
  std::vector<Tensor<T>> outs;
  outs.reserve(n);
  outs.push_back(parts[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const auto& conv = branches[i - 1];
    outs.push_back(add(parts[i], leaky_relu(conv(add(parts[i], outs.back())))));
  }
  Tensor<T> fused = leaky_relu(fuse(concat(outs, 1)));
  if (fused.shape() == x.shape()) return add(x, fused);
  return fused;
}

template <typename T>
PConv<T>::PConv(std::size_t channels, Ratio ratio) : channels(channels) {
  if (ratio.num <= 0 || ratio.den <= 0 || ratio.num > ratio.den ||
      (channels * ratio.num) % ratio.den != 0) {
    throw DimensionError("pconv: " + std::to_string(channels) + " * " + std::to_string(ratio.num) +
                         "/" + std::to_string(ratio.den) + " is not a positive integer");
  }
  conv_channels = channels * ratio.num / ratio.den;
  conv = Conv<T>(conv_channels, conv_channels, 3, 1, 1);
}

template <typename T>
Tensor<T> PConv<T>::operator()(const Tensor<T>& x) const {
  if (x.rank() != 4 || x.dim(1) != channels) {
    throw DimensionError("pconv: expected " + std::to_string(channels) + " channels, got " +
                         shape_str(x.shape()));
  }
  if (conv_channels == channels) return conv(x);
  Tensor<T> head = conv(slice_channels(x, 0, conv_channels));
  return concat<T>({head, slice_channels(x, conv_channels, channels)}, 1);
}

template <typename T>
Tensor<T> sppf_concat(const Tensor<T>& x, const std::vector<int>& kernels) {
  std::vector<Tensor<T>> branches{x};
  for (int k : kernels) {
    if (k < 1 || k % 2 == 0) {
      throw ArgumentError("sppf kernel " + std::to_string(k) + " must be odd and positive");
    }
    const auto ks = static_cast<std::size_t>(k);
    branches.push_back(maxpool2d(x, ks, 1, (ks - 1) / 2));
  }
  return concat(branches, 1);
}

template <typename T>
Sppf<T>::Sppf(std::size_t channels, std::vector<int> kernels)
    : kernels(std::move(kernels)),
      project((1 + this->kernels.size()) * channels, channels, 1, 1, 0) {
  for (int k : this->kernels) {
    if (k < 1 || k % 2 == 0) {
      throw ArgumentError("sppf kernel " + std::to_string(k) + " must be odd and positive");
    }
  }
}

template <typename T>
Tensor<T> Sppf<T>::pooled(const Tensor<T>& x) const {
  return sppf_concat(x, kernels);
}

template <typename T>
Tensor<T> Sppf<T>::operator()(const Tensor<T>& x) const {
  return leaky_relu(project(pooled(x)));
}

template <typename T>
Detector<T>::Detector(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto levels = config_.strides.size();
  const auto w0 = static_cast<std::size_t>(config_.width);
  stem1_ = Conv<T>(static_cast<std::size_t>(config_.input_channels), w0, 3, 2, 1);
  stem2_ = Conv<T>(w0, w0, 3, 2, 1);
  std::size_t prev = w0;
  for (std::size_t i = 0; i < levels; ++i) {
    const auto wi = static_cast<std::size_t>(config_.level_width(i));
    stages_.push_back(
        Stage{Conv<T>(prev, wi, 3, 2, 1),
              ResC2NetBlock<T>(wi, static_cast<std::size_t>(config_.resc2net_n))});
    prev = wi;
  }
  sppf_ = Sppf<T>(prev, config_.sppf_kernels);
  neck_.resize(levels);
  for (std::size_t i = 0; i + 1 < levels; ++i) {
    const auto wi = static_cast<std::size_t>(config_.level_width(i));
    const auto wn = static_cast<std::size_t>(config_.level_width(i + 1));
    neck_[i] = NeckLevel{PConv<T>(wi + wn, config_.pconv_ratio), Conv<T>(wi + wn, wi, 1, 1, 0)};
  }
  for (std::size_t i = 0; i < levels; ++i) {
    heads_.emplace_back(static_cast<std::size_t>(config_.level_width(i)),
                        static_cast<std::size_t>(config_.head_channels()), 1, 1, 0);
  }
  register_params();
  init_weights();
}

template <typename T>
void Detector<T>::register_params() {
  params_.clear();
  auto add_conv = [this](const std::string& name, const Conv<T>& c) {
    params_.emplace_back(name + ".weight", c.weight);
    params_.emplace_back(name + ".bias", c.bias);
  };
  add_conv("stem1", stem1_);
  add_conv("stem2", stem2_);
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const std::string p = "stage" + std::to_string(i);
    add_conv(p + ".down", stages_[i].down);
    add_conv(p + ".block.reduce", stages_[i].block.reduce);
    for (std::size_t b = 0; b < stages_[i].block.branches.size(); ++b) {
      add_conv(p + ".block.branch" + std::to_string(b + 1), stages_[i].block.branches[b]);
    }
    add_conv(p + ".block.fuse", stages_[i].block.fuse);
  }
  add_conv("sppf.project", sppf_.project);
  for (std::size_t i = 0; i + 1 < neck_.size(); ++i) {
    const std::string p = "neck" + std::to_string(i);
    add_conv(p + ".pconv", neck_[i].pconv.conv);
    add_conv(p + ".reduce", neck_[i].reduce);
  }
  for (std::size_t i = 0; i < heads_.size(); ++i) add_conv("head" + std::to_string(i), heads_[i]);
}

template <typename T>
void Detector<T>::init_weights() {
  // Kaiming-uniform over fan-in with unit gain; biases stay zero. The leaky
  // gain (sqrt(2)) compounds through the unnormalized residual stack and
  // saturates the objectness logits before the first step.
  std::mt19937_64 rng(config_.seed);
  for (auto& [name, t] : params_) {
    if (t.rank() != 4) continue;
    const double fan_in = static_cast<double>(t.dim(1) * t.dim(2) * t.dim(3));
    const double bound = std::sqrt(3.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  }
}

template <typename T>
Detector<T> Detector<T>::clone() const {
  Detector copy(config_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto src = params_[i].second.data();
    auto dst = copy.params_[i].second.data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return copy;
}

template <typename T>
std::size_t Detector<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.second.numel();
  return n;
}

template <typename T>
void Detector<T>::zero_grad() {
  for (auto& p : params_) p.second.zero_grad();
}

template <typename T>
void Detector<T>::set_requires_grad(bool on) {
  for (auto& p : params_) p.second.set_requires_grad(on);
}

template <typename T>
void Detector<T>::zero_weights() {
  for (auto& p : params_) {
    for (auto& v : p.second.data()) v = T(0);
  }
}

template <typename T>
std::vector<PredGrid<T>> Detector<T>::forward(const Tensor<T>& image) const {
  const auto S = static_cast<std::size_t>(config_.input_size);
  const auto Cin = static_cast<std::size_t>(config_.input_channels);
  if (image.rank() != 4 || image.dim(1) != Cin || image.dim(2) != S || image.dim(3) != S) {
    throw DimensionError("detector expects [N," + std::to_string(Cin) + "," + std::to_string(S) +
                         "," + std::to_string(S) + "] input, got " + shape_str(image.shape()));
  }
  Tensor<T> x = leaky_relu(stem2_(leaky_relu(stem1_(image))));
  std::vector<Tensor<T>> features;
  for (const auto& stage : stages_) {
    x = stage.block(leaky_relu(stage.down(x)));
    features.push_back(x);
  }
  const std::size_t levels = features.size();
  std::vector<Tensor<T>> fused(levels);
  fused[levels - 1] = sppf_(features[levels - 1]);
  for (std::size_t i = levels - 1; i-- > 0;) {
    Tensor<T> merged = concat<T>({upsample_nearest(fused[i + 1], 2), features[i]}, 1);
    fused[i] = leaky_relu(neck_[i].reduce(neck_[i].pconv(merged)));
  }
  std::vector<PredGrid<T>> grids;
  for (std::size_t i = 0; i < levels; ++i) {
    grids.push_back(PredGrid<T>{config_.strides[i], heads_[i](fused[i])});
  }
  return grids;
}

template struct Conv<float>;
template struct Conv<double>;
template struct ResC2NetBlock<float>;
template struct ResC2NetBlock<double>;
template struct PConv<float>;
template struct PConv<double>;
template struct Sppf<float>;
template struct Sppf<double>;
template class Detector<float>;
template class Detector<double>;
template Tensor<float> sppf_concat(const Tensor<float>&, const std::vector<int>&);
template Tensor<double> sppf_concat(const Tensor<double>&, const std::vector<int>&);
template std::vector<DetBox> decode(const PredGrid<float>&, std::size_t);
template std::vector<DetBox> decode(const PredGrid<double>&, std::size_t);

}  // namespace dylo
