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


#include "dylo/optim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "dylo/errors.hpp"

namespace dylo {

template <typename T>
void adam_step(const std::vector<std::pair<std::string, Tensor<T>>>& params, AdamState<T>& state) {
  if (state.m.empty()) {
    for (const auto& [name, p] : params) {
      state.m.emplace_back(p.numel(), T(0));
      state.v.emplace_back(p.numel(), T(0));
    }
  }
  if (state.m.size() != params.size()) {
    throw DimensionError("adam_step: state holds " + std::to_string(state.m.size()) +
                         " buffers for " + std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, p] = params[i];
    if (state.m[i].size() != p.numel() || state.v[i].size() != p.numel()) {
      throw DimensionError("adam_step: moment buffers do not match parameter " + name);
    }
    if (!p.has_grad()) continue;
    for (T g : p.grad()) {
      if (!std::isfinite(static_cast<double>(g))) {
        throw TrainingError("non-finite gradient in parameter " + name);
      }
    }
  }

  state.t += 1;
  const double b1 = state.beta1, b2 = state.beta2, lr = state.alpha;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  const double decay = lr * state.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T> p = params[i].second;
    std::span<T> theta = p.data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    const bool has = p.has_grad();
    std::span<const T> grad = has ? std::as_const(p).grad() : std::span<const T>{};
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double g = has ? static_cast<double>(grad[k]) : 0.0;
      double th = static_cast<double>(theta[k]);
      th -= decay * th;
      const double mk = b1 * static_cast<double>(m[k]) + (1.0 - b1) * g;
      const double vk = b2 * static_cast<double>(v[k]) + (1.0 - b2) * g * g;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      th -= lr * (mk / c1) / (std::sqrt(vk / c2) + state.epsilon);
      theta[k] = static_cast<T>(th);
    }
  }
}

template void adam_step(const std::vector<std::pair<std::string, Tensor<float>>>&,
                        AdamState<float>&);
template void adam_step(const std::vector<std::pair<std::string, Tensor<double>>>&,
                        AdamState<double>&);

void TrainConfig::validate() const {
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be > 0");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(weight_decay >= 0) || !std::isfinite(weight_decay)) {
    throw ConfigError("weight_decay must be >= 0");
  }
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (!(decay_factor > 0 && decay_factor < 1)) throw ConfigError("decay_factor must lie in (0, 1)");
  if (plateau_patience < 1) throw ConfigError("plateau_patience must be >= 1");
  if (stop_patience < plateau_patience) {
    throw ConfigError("stop_patience must be >= plateau_patience");
  }
  if (!(augment_prob >= 0 && augment_prob <= 1)) throw ConfigError("augment_prob must lie in [0, 1]");
}

void ValHistory::push(int epoch, double val_loss, double val_map) {
  if (!records_.empty() && epoch <= records_.back().epoch) {
    throw ArgumentError("ValHistory: epoch " + std::to_string(epoch) + " does not follow " +
                        std::to_string(records_.back().epoch));
  }
  records_.push_back({epoch, val_loss, val_map});
}

double step_decay(double lr, const ValHistory& history, const TrainConfig& config) {
  if (history.empty()) throw ArgumentError("step_decay: empty history");
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  bool fire = false;
  for (const auto& r : history.records()) {
    fire = false;
    if (r.val_loss < best - kPlateauRelTol * std::abs(best) || !std::isfinite(best)) {
      best = std::min(best, r.val_loss);
      stale = 0;
      continue;
    }
    if (++stale >= config.plateau_patience) {
      fire = true;
      stale = 0;
    }
  }
  if (!fire) return lr;
  return std::max(lr * config.decay_factor, kMinLearningRate);
}

bool early_stop(const ValHistory& history, int stop_patience) {
  if (history.empty()) throw ArgumentError("early_stop: empty history");
  const auto& rs = history.records();
  std::size_t best = 0;
  for (std::size_t i = 1; i < rs.size(); ++i) {
    if (rs[i].val_map > rs[best].val_map) best = i;
  }
  return rs.size() - 1 - best >= static_cast<std::size_t>(stop_patience);
}

GridResult grid_search(const std::vector<TrainConfig>& grid, int budget_epochs,
                       const TrainEvalFn& fn, int workers) {
  if (grid.empty()) throw ArgumentError("grid_search: empty grid");
  if (budget_epochs < 1) throw ArgumentError("grid_search: budget_epochs must be >= 1");
  GridResult result;
  result.trials.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    result.trials[i].index = i;
    result.trials[i].config = grid[i];
    result.trials[i].config.max_epochs = budget_epochs;
    result.trials[i].config.validate();
  }

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        result.trials[i].outcome = fn(result.trials[i].config);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::clamp(workers, 1, static_cast<int>(grid.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  for (std::size_t i = 1; i < result.trials.size(); ++i) {
    const auto& a = result.trials[i].outcome;
    const auto& b = result.trials[result.best_index].outcome;
    if (a.val_map > b.val_map || (a.val_map == b.val_map && a.val_loss < b.val_loss)) {
      result.best_index = i;
    }
  }
  result.best = result.trials[result.best_index].config;
  return result;
}

std::vector<TrainConfig> default_grid(const TrainConfig& base) {
  std::vector<TrainConfig> grid;
  for (double lr : {1e-2, 1e-3, 1e-4}) {
    for (double wd : {0.0, 5e-4}) {
      TrainConfig c = base;
      c.learning_rate = lr;
      c.weight_decay = wd;
      grid.push_back(c);
    }
  }
  return grid;
}

}  // namespace dylo
