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

#include <optional>
#include <string>
#include <vector>

#include "dylo/augment.hpp"
#include "dylo/eval.hpp"
#include "dylo/loss.hpp"
#include "dylo/model.hpp"
#include "dylo/optim.hpp"

namespace dylo {

/// Everything `dylo train` reads from its --config file. Sections: model,
/// train, loss, eval, augment; every key is optional and unknown keys are
/// ConfigErrors. See docs/config.md.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  LossWeights loss;
  EvalConfig eval;
  AugmentParams augment;
  std::optional<int> declared_classes;  // model.num_classes when the file sets it
};

RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);

/// Hyperparameter grid: the cartesian product of the listed values around a
/// base TrainConfig. Omitted axes keep the base value; an empty file gives the
/// default {1e-2, 1e-3, 1e-4} x {0, 5e-4} grid.
struct GridSpec {
  int budget_epochs = 10;
  int workers = 1;
  std::vector<double> learning_rate;
  std::vector<double> weight_decay;
  std::vector<int> batch_size;

  std::vector<TrainConfig> expand(const TrainConfig& base) const;
};

GridSpec grid_spec_from_json(const std::string& text);

}  // namespace dylo
