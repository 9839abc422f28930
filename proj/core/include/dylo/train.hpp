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

#include <functional>
#include <string>
#include <vector>

#include "dylo/augment.hpp"
#include "dylo/dataset.hpp"
#include "dylo/eval.hpp"
#include "dylo/loss.hpp"
#include "dylo/model.hpp"
#include "dylo/optim.hpp"

namespace dylo {

struct TrainData {
  std::vector<Sample> train;
  std::vector<Sample> val;
  std::vector<std::string> class_names;
};

struct EpochLog {
  int epoch = 0;
  double lr = 0;  // rate used during the epoch
  double train_loss = 0;
  double val_loss = 0;
  double val_map = 0;

  bool operator==(const EpochLog&) const = default;
};

inline constexpr const char* kEpochLogHeader = "epoch,lr,train_loss,val_loss,val_mAP";

// Header line plus one row per epoch; values use 17 significant digits so
// equal logs mean bitwise-equal numbers.
std::string epoch_log_csv(const std::vector<EpochLog>& log);

struct TrainOptions {
  LossWeights loss;
  EvalConfig eval;
  AugmentParams augment;
  bool restore_best = true;  // reload the best-val-mAP weights at the end
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_map = 0;
  bool early_stopped = false;
  std::int64_t adam_steps = 0;
  std::size_t dropped_targets = 0;  // boxes lost to cell collisions
  std::size_t dropped_boxes = 0;    // boxes lost to augmentation
};

// Shuffles, augments, batches and steps Adam each epoch, then validates.
// ConfigError for an empty split or an invalid config.
TrainResult train_loop(Detectorf& model, const TrainData& data, const TrainConfig& config,
                       const TrainOptions& options = {});

// Mean total loss over `samples` without augmentation or gradient.
double dataset_loss(const Detectorf& model, const std::vector<Sample>& samples, int batch_size,
                    const LossWeights& weights);

// Network input batch and targets for the listed samples.
struct Batch {
  Tensorf input;
  TargetMap targets;
};
Batch make_batch(const std::vector<Sample>& samples, const std::vector<std::size_t>& indices,
                 const ModelConfig& config);

}  // namespace dylo
