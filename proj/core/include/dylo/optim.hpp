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
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dylo/tensor.hpp"

namespace dylo {

/// Moment buffers and hyperparameters for Adam with decoupled weight decay.
template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  std::int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double alpha = 1e-3;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

/// One update over every parameter, reading gradients from the tensors.
/// Parameters without a gradient buffer count as zero gradient. All gradients
/// are checked before anything is written, so a TrainingError (naming the
/// first non-finite parameter) leaves parameters and state untouched.
template <typename T>
void adam_step(const std::vector<std::pair<std::string, Tensor<T>>>& params, AdamState<T>& state);

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 16;
  double weight_decay = 5e-4;
  int max_epochs = 200;
  double decay_factor = 0.1;
  int plateau_patience = 10;
  int stop_patience = 20;
  std::uint64_t seed = 0;
  std::vector<std::string> augment{"hflip", "rotate", "scale", "translate", "color_jitter",
                                   "random_crop"};
  double augment_prob = 0.5;  // chance of applying each listed op per sample

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

inline constexpr double kPlateauRelTol = 1e-4;
inline constexpr double kMinLearningRate = 1e-6;

struct ValRecord {
  int epoch = 0;
  double val_loss = 0;
  double val_map = 0;
};

class ValHistory {
 public:
  // Throws ArgumentError unless epoch exceeds the last recorded one.
  void push(int epoch, double val_loss, double val_map);
  const std::vector<ValRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const ValRecord& back() const { return records_.back(); }

 private:
  std::vector<ValRecord> records_;
};

// Plateau rule evaluated at the latest entry. The history is replayed from the
// start, so the counter reset after each decay needs no extra state.
double step_decay(double lr, const ValHistory& history, const TrainConfig& config);

// True once the best val mAP is at least stop_patience epochs old.
bool early_stop(const ValHistory& history, int stop_patience);

struct TrialOutcome {
  double val_map = 0;
  double val_loss = 0;
};

struct GridTrial {
  std::size_t index = 0;
  TrainConfig config;
  TrialOutcome outcome;
};

struct GridResult {
  std::size_t best_index = 0;
  TrainConfig best;
  std::vector<GridTrial> trials;  // in grid order
};

using TrainEvalFn = std::function<TrialOutcome(const TrainConfig&)>;

/// Runs fn on every config with max_epochs set to budget_epochs and ranks by
/// val mAP, then lower val loss, then grid order. `workers` > 1 runs trials
/// concurrently; fn must then be safe to call from several threads.
GridResult grid_search(const std::vector<TrainConfig>& grid, int budget_epochs,
                       const TrainEvalFn& fn, int workers = 1);

// {1e-2, 1e-3, 1e-4} x {0, 5e-4} around `base`.
std::vector<TrainConfig> default_grid(const TrainConfig& base);

}  // namespace dylo
