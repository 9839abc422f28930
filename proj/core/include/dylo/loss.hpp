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

#include <vector>

#include "dylo/model.hpp"
#include "dylo/targets.hpp"
#include "dylo/tensor.hpp"

namespace dylo {

struct LossWeights {
  double lambda_box = 5.0;
  double lambda_obj = 1.0;
  double lambda_cls = 1.0;
  double neg_weight = 0.5;  // confidence weight on negative cells; positives use 1

  void validate() const;
};

// Mean of 1 - IoU(decoded prediction, target) over positive cells; 0 without
// positives.
template <typename T>
Tensor<T> localization_loss(const std::vector<PredGrid<T>>& preds, const TargetMap& targets);

// Weighted BCE on sigmoid(obj) over every cell, divided by the cell count.
template <typename T>
Tensor<T> confidence_loss(const std::vector<PredGrid<T>>& preds, const TargetMap& targets,
                          const LossWeights& weights);

// Per-class BCE against one-hot targets, positives only, averaged over
// positives x classes.
template <typename T>
Tensor<T> classification_loss(const std::vector<PredGrid<T>>& preds, const TargetMap& targets);

// lambda_box * loc + lambda_obj * conf + lambda_cls * cls on scalar tensors.
template <typename T>
Tensor<T> combine_losses(const Tensor<T>& loc, const Tensor<T>& conf, const Tensor<T>& cls,
                         const LossWeights& weights);

template <typename T>
struct LossBreakdown {
  Tensor<T> total;
  double localization = 0;
  double confidence = 0;
  double classification = 0;
};

template <typename T>
LossBreakdown<T> compute_loss(const std::vector<PredGrid<T>>& preds, const TargetMap& targets,
                              const LossWeights& weights);

template <typename T>
Tensor<T> total_loss(const std::vector<PredGrid<T>>& preds, const TargetMap& targets,
                     const LossWeights& weights) {
  return compute_loss(preds, targets, weights).total;
}

}  // namespace dylo
