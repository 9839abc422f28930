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

#include "dylo/loss.hpp"

#include <cmath>

#include "dylo/errors.hpp"
#include "dylo/ops.hpp"

namespace dylo {

void LossWeights::validate() const {
  for (double v : {lambda_box, lambda_obj, lambda_cls}) {
    if (!std::isfinite(v) || v < 0) throw ConfigError("loss weights must be finite and >= 0");
  }
  if (!std::isfinite(neg_weight) || neg_weight <= 0 || neg_weight > 1) {
    throw ConfigError("neg_weight must lie in (0, 1]");
  }
}

namespace {

template <typename T>
void check_geometry(const std::vector<PredGrid<T>>& preds, const TargetMap& targets) {
  if (preds.size() != targets.levels.size()) {
    throw DimensionError("loss: " + std::to_string(preds.size()) + " prediction levels vs " +
                         std::to_string(targets.levels.size()) + " target levels");
  }
  for (std::size_t l = 0; l < preds.size(); ++l) {
    const auto& p = preds[l];
    const auto& t = targets.levels[l];
    const Shape expect{t.batch, static_cast<std::size_t>(5 + targets.num_classes), t.side, t.side};
    if (p.stride != t.stride || p.tensor.shape() != expect) {
      throw DimensionError("loss: level " + std::to_string(l) + " prediction " +
                           shape_str(p.tensor.shape()) + " does not match target grid " +
                           shape_str(expect));
    }
  }
}

// Flat index of (n, channel, row, col) in a [N, Ch, S, S] tensor.
std::size_t flat(std::size_t n, std::size_t ch, std::size_t channels, std::size_t side,
                 std::size_t cell_in_image) {
  return (n * channels + ch) * side * side + cell_in_image;
}

template <typename T>
Tensor<T> zero_scalar() {
  return Tensor<T>::scalar(T(0));
}

}  // namespace

template <typename T>
Tensor<T> localization_loss(const std::vector<PredGrid<T>>& preds, const TargetMap& targets) {
  check_geometry(preds, targets);
  std::vector<Tensor<T>> ious;
  std::size_t total = 0;
  for (std::size_t l = 0; l < preds.size(); ++l) {
    const auto& level = targets.levels[l];
    const std::size_t S = level.side, Ch = preds[l].tensor.dim(1), SS = S * S;
    std::array<std::vector<std::size_t>, 4> idx;
    std::vector<T> col, row, tx1, ty1, tx2, ty2, tarea;
    for (std::size_t cell = 0; cell < level.cells(); ++cell) {
      if (!level.positive(cell)) continue;
      const std::size_t n = cell / SS, in_image = cell % SS;
      for (std::size_t c = 0; c < 4; ++c) idx[c].push_back(flat(n, c, Ch, S, in_image));
      col.push_back(static_cast<T>(in_image % S));
      row.push_back(static_cast<T>(in_image / S));
      const DetBox& g = level.boxes[cell];
      tx1.push_back(static_cast<T>(g.x1()));
      ty1.push_back(static_cast<T>(g.y1()));
      tx2.push_back(static_cast<T>(g.x2()));
      ty2.push_back(static_cast<T>(g.y2()));
      tarea.push_back(static_cast<T>(g.area()));
    }
    if (col.empty()) continue;
    const Shape shp{col.size()};
    const T stride = static_cast<T>(level.stride);
    const Tensor<T>& raw = preds[l].tensor;
    const T lim = static_cast<T>(kSizeLogitClamp);

    Tensor<T> cx = scale(add(sigmoid(gather(raw, idx[0])), Tensor<T>(shp, col)), stride);
    Tensor<T> cy = scale(add(sigmoid(gather(raw, idx[1])), Tensor<T>(shp, row)), stride);
    Tensor<T> w = scale(exp(clamp(gather(raw, idx[2]), -lim, lim)), stride);
    Tensor<T> h = scale(exp(clamp(gather(raw, idx[3]), -lim, lim)), stride);
    Tensor<T> half_w = scale(w, T(0.5)), half_h = scale(h, T(0.5));
    Tensor<T> px1 = sub(cx, half_w), px2 = add(cx, half_w);
    Tensor<T> py1 = sub(cy, half_h), py2 = add(cy, half_h);

    Tensor<T> iw = relu(sub(minimum(px2, Tensor<T>(shp, tx2)), maximum(px1, Tensor<T>(shp, tx1))));
    Tensor<T> ih = relu(sub(minimum(py2, Tensor<T>(shp, ty2)), maximum(py1, Tensor<T>(shp, ty1))));
    Tensor<T> inter = mul(iw, ih);
    Tensor<T> uni = sub(add(mul(w, h), Tensor<T>(shp, tarea)), inter);
    ious.push_back(div(inter, uni));
    total += col.size();
  }
  if (total == 0) return zero_scalar<T>();
  Tensor<T> all = ious.size() == 1 ? ious.front() : concat(ious, 0);
  return add_scalar(scale(sum(all), T(-1) / static_cast<T>(total)), T(1));
}

template <typename T>
Tensor<T> confidence_loss(const std::vector<PredGrid<T>>& preds, const TargetMap& targets,
                          const LossWeights& weights) {
  check_geometry(preds, targets);
  std::vector<Tensor<T>> terms;
  std::size_t cells = 0;
  for (std::size_t l = 0; l < preds.size(); ++l) {
    const auto& level = targets.levels[l];
    const Shape shp{level.batch, 1, level.side, level.side};
    std::vector<T> target(level.cells()), weight(level.cells());
    for (std::size_t cell = 0; cell < level.cells(); ++cell) {
      const bool pos = level.positive(cell);
      target[cell] = pos ? T(1) : T(0);
      weight[cell] = pos ? T(1) : static_cast<T>(weights.neg_weight);
    }
    Tensor<T> obj = slice_channels(preds[l].tensor, 4, 5);
    Tensor<T> per_cell =
        mul(bce_logits(obj, Tensor<T>(shp, std::move(target))), Tensor<T>(shp, weight));
    terms.push_back(sum(per_cell));
    cells += level.cells();
  }
  Tensor<T> acc = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) acc = add(acc, terms[i]);
  return scale(acc, T(1) / static_cast<T>(cells));
}

template <typename T>
Tensor<T> classification_loss(const std::vector<PredGrid<T>>& preds, const TargetMap& targets) {
  check_geometry(preds, targets);
  const auto C = static_cast<std::size_t>(targets.num_classes);
  std::vector<Tensor<T>> terms;
  std::size_t count = 0;
  for (std::size_t l = 0; l < preds.size(); ++l) {
    const auto& level = targets.levels[l];
    const std::size_t S = level.side, Ch = preds[l].tensor.dim(1), SS = S * S;
    std::vector<std::size_t> idx;
    std::vector<T> onehot;
    for (std::size_t cell = 0; cell < level.cells(); ++cell) {
      if (!level.positive(cell)) continue;
      const std::size_t n = cell / SS, in_image = cell % SS;
      for (std::size_t c = 0; c < C; ++c) {
        idx.push_back(flat(n, 5 + c, Ch, S, in_image));
        onehot.push_back(static_cast<int>(c) == level.class_id[cell] ? T(1) : T(0));
      }
    }
    if (idx.empty()) continue;
    const Shape shp{idx.size()};
    terms.push_back(sum(bce_logits(gather(preds[l].tensor, idx), Tensor<T>(shp, onehot))));
    count += idx.size();
  }
  if (count == 0) return zero_scalar<T>();
  Tensor<T> acc = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) acc = add(acc, terms[i]);
  return scale(acc, T(1) / static_cast<T>(count));
}

template <typename T>
Tensor<T> combine_losses(const Tensor<T>& loc, const Tensor<T>& conf, const Tensor<T>& cls,
                         const LossWeights& weights) {
  return add(add(scale(loc, static_cast<T>(weights.lambda_box)),
                 scale(conf, static_cast<T>(weights.lambda_obj))),
             scale(cls, static_cast<T>(weights.lambda_cls)));
}

template <typename T>
LossBreakdown<T> compute_loss(const std::vector<PredGrid<T>>& preds, const TargetMap& targets,
                              const LossWeights& weights) {
  weights.validate();
  Tensor<T> loc = localization_loss(preds, targets);
  Tensor<T> conf = confidence_loss(preds, targets, weights);
  Tensor<T> cls = classification_loss(preds, targets);
  Tensor<T> total = combine_losses(loc, conf, cls, weights);
  return LossBreakdown<T>{total, static_cast<double>(loc.item()), static_cast<double>(conf.item()),
                          static_cast<double>(cls.item())};
}

#define DYLO_INSTANTIATE_LOSS(T)                                                              \
  template Tensor<T> localization_loss(const std::vector<PredGrid<T>>&, const TargetMap&);   \
  template Tensor<T> confidence_loss(const std::vector<PredGrid<T>>&, const TargetMap&,      \
                                     const LossWeights&);                                    \
  template Tensor<T> classification_loss(const std::vector<PredGrid<T>>&, const TargetMap&); \
  template Tensor<T> combine_losses(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,    \
                                    const LossWeights&);                                     \
  template LossBreakdown<T> compute_loss(const std::vector<PredGrid<T>>&, const TargetMap&,  \
                                         const LossWeights&);

DYLO_INSTANTIATE_LOSS(float)
DYLO_INSTANTIATE_LOSS(double)

#undef DYLO_INSTANTIATE_LOSS

}  // namespace dylo
