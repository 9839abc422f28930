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


#include "dylo/train.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include "dylo/errors.hpp"
#include "dylo/preprocess.hpp"
#include "dylo/seed.hpp"
#include "dylo/targets.hpp"

namespace dylo {

std::string epoch_log_csv(const std::vector<EpochLog>& log) {
  std::string out = std::string(kEpochLogHeader) + "\n";
  char buf[256];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.lr, e.train_loss,
                  e.val_loss, e.val_map);
    out += buf;
  }
  return out;
}

Batch make_batch(const std::vector<Sample>& samples, const std::vector<std::size_t>& indices,
                 const ModelConfig& config) {
  const auto S = static_cast<std::size_t>(config.input_size);
  const auto C = static_cast<std::size_t>(config.input_channels);
  Batch b;
  b.input = Tensorf(Shape{indices.size(), C, S, S});
  std::vector<TargetMap> maps;
  const std::size_t per = C * S * S;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Sample& s = samples[indices[k]];
    preprocess_into(s.image, config.input_channels, config.input_size,
                    b.input.data().subspan(k * per, per));
    maps.push_back(assign_targets(
        letterbox_boxes(s.records, s.image.width, s.image.height, config.input_size), config));
  }
  b.targets = stack_targets(maps);
  return b;
}

double dataset_loss(const Detectorf& model, const std::vector<Sample>& samples, int batch_size,
                    const LossWeights& weights) {
  if (samples.empty()) return 0.0;
  NoGradScope<float> no_grad;
  double total = 0;
  for (std::size_t start = 0; start < samples.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(samples.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<std::size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Batch b = make_batch(samples, idx, model.config());
    const auto loss = compute_loss(model.forward(b.input), b.targets, weights);
    total += static_cast<double>(loss.total.item()) * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(samples.size());
}

namespace {

std::vector<AugOp> parse_ops(const std::vector<std::string>& names) {
  std::vector<AugOp> ops;
  for (const auto& n : names) {
    const auto op = parse_aug_op(n);
    if (!op) throw ConfigError("unknown augmentation '" + n + "'");
    ops.push_back(*op);
  }
  return ops;
}

}  // namespace

TrainResult train_loop(Detectorf& model, const TrainData& data, const TrainConfig& config,
                       const TrainOptions& options) {
  config.validate();
  options.loss.validate();
  if (data.train.empty()) throw ConfigError("training split is empty");
  if (data.val.empty()) throw ConfigError("validation split is empty");
  const std::vector<AugOp> ops = parse_ops(config.augment);
  const ModelConfig& mc = model.config();
  if (static_cast<int>(data.class_names.size()) != mc.num_classes) {
    throw ConfigError("model has " + std::to_string(mc.num_classes) + " classes but the data has " +
                      std::to_string(data.class_names.size()));
  }

  TrainResult result;
  AdamState<float> adam;
  adam.weight_decay = config.weight_decay;
  double lr = config.learning_rate;
  ValHistory history;
  std::mt19937_64 shuffle_rng(config.seed);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::optional<Detectorf> best;
  result.best_map = -1;
  model.set_requires_grad(true);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const std::uint64_t epoch_seed = derive_seed(config.seed, static_cast<std::uint64_t>(epoch));
    double loss_sum = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<Sample> batch_samples;
      for (std::size_t k = start; k < end; ++k) {
        const Sample& src = data.train[order[k]];
        if (ops.empty()) {
          batch_samples.push_back(src);
          continue;
        }
        std::mt19937_64 rng(derive_seed(epoch_seed, order[k]));
        std::vector<AugOp> chosen;
        for (AugOp op : ops) {
          if (std::uniform_real_distribution<double>(0, 1)(rng) < config.augment_prob) {
            chosen.push_back(op);
          }
        }
        Augmented a = augment(src.image, src.records, chosen, rng, options.augment);
        result.dropped_boxes += a.dropped;
        batch_samples.push_back(Sample{std::move(a.image), std::move(a.records)});
      }
      std::vector<std::size_t> idx(batch_samples.size());
      std::iota(idx.begin(), idx.end(), 0);
      const Batch b = make_batch(batch_samples, idx, mc);
      result.dropped_targets += b.targets.dropped;

      model.zero_grad();
      Tape<float> tape;
      double batch_loss = 0;
      {
        TapeScope<float> scope(tape);
        const auto loss = compute_loss(model.forward(b.input), b.targets, options.loss);
        batch_loss = static_cast<double>(loss.total.item());
        if (!std::isfinite(batch_loss)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
        }
        tape.backward(loss.total);
      }
      adam.alpha = lr;
      adam_step(model.parameters(), adam);
      loss_sum += batch_loss * static_cast<double>(idx.size());
    }

    EpochLog row;
    row.epoch = epoch;
    row.lr = lr;
    row.train_loss = loss_sum / static_cast<double>(order.size());
    row.val_loss = dataset_loss(model, data.val, config.batch_size, options.loss);
    row.val_map = evaluate(model, data.val, data.class_names, options.eval).map;
    result.log.push_back(row);
    if (options.on_epoch) options.on_epoch(row);

    if (row.val_map > result.best_map) {
      result.best_map = row.val_map;
      result.best_epoch = epoch;
      if (options.restore_best) best = model.clone();
    }
    history.push(epoch, row.val_loss, row.val_map);
    lr = step_decay(lr, history, config);
    if (early_stop(history, config.stop_patience)) {
      result.early_stopped = epoch < config.max_epochs;
      break;
    }
  }
  result.adam_steps = adam.t;
  if (options.restore_best && best) model = std::move(*best);
  model.set_requires_grad(false);
  model.zero_grad();
  return result;
}

}  // namespace dylo
