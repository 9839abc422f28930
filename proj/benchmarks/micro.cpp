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


// Microbenchmarks for the hot paths: convolution, a full forward pass, one
// training step, NMS and AP.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dylo/eval.hpp"
#include "dylo/loss.hpp"
#include "dylo/model.hpp"
#include "dylo/ops.hpp"
#include "dylo/synth.hpp"
#include "dylo/train.hpp"

namespace {

using namespace dylo;

Tensorf random_tensor(const Shape& shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> d(-1.f, 1.f);
  Tensorf t(shape);
  for (auto& v : t.data()) v = d(rng);
  return t;
}

ModelConfig small_model(int size) {
  ModelConfig mc;
  mc.input_size = size;
  mc.width = 8;
  mc.num_classes = 3;
  return mc;
}

void BM_Conv2dForward(benchmark::State& state) {
  const auto ch = static_cast<std::size_t>(state.range(0));
  const auto hw = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(1);
  const Tensorf x = random_tensor({1, ch, hw, hw}, rng);
  const Tensorf k = random_tensor({ch, ch, 3, 3}, rng);
  const Tensorf b = random_tensor({ch}, rng);
  NoGradScope<float> no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, k, b, 1, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ch * ch * hw * hw * 9));
}
BENCHMARK(BM_Conv2dForward)->Args({16, 40})->Args({32, 20})->Args({64, 10});

void BM_Conv2dBackward(benchmark::State& state) {
  const std::size_t ch = 16, hw = 40;
  std::mt19937_64 rng(2);
  Tensorf x = random_tensor({1, ch, hw, hw}, rng);
  Tensorf k = random_tensor({ch, ch, 3, 3}, rng);
  Tensorf b = random_tensor({ch}, rng);
  for (Tensorf* t : {&x, &k, &b}) t->set_requires_grad(true);
  for (auto _ : state) {
    Tape<float> tape;
    TapeScope<float> scope(tape);
    const Tensorf loss = sum(conv2d(x, k, b, 1, 1));
    tape.backward(loss);
  }
}
BENCHMARK(BM_Conv2dBackward);

void BM_DetectorForward(benchmark::State& state) {
  const Detectorf model(small_model(static_cast<int>(state.range(0))));
  std::mt19937_64 rng(3);
  const auto s = static_cast<std::size_t>(state.range(0));
  const Tensorf x = random_tensor({1, 1, s, s}, rng);
  NoGradScope<float> no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x));
}
BENCHMARK(BM_DetectorForward)->Arg(128)->Arg(160)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  ModelConfig mc = small_model(128);
  mc.num_classes = 2;
  Detectorf model(mc);
  model.set_requires_grad(true);
  std::vector<Sample> samples;
  for (int i = 0; i < 4; ++i) {
    const auto g = gen_sample(PartKind::bearing, {i % 2 ? DefectType::crack : DefectType::scratch},
                              {Severity::severe}, 128, 128, static_cast<std::uint64_t>(i));
    samples.push_back({g.image, g.records});
  }
  const Batch batch = make_batch(samples, {0, 1, 2, 3}, mc);
  for (auto _ : state) {
    model.zero_grad();
    Tape<float> tape;
    TapeScope<float> scope(tape);
    const Tensorf loss = total_loss(model.forward(batch.input), batch.targets, LossWeights{});
    tape.backward(loss);
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

std::vector<DetBox> random_boxes(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0, 160), size(4, 40), score(0, 1);
  std::vector<DetBox> out(n);
  for (auto& b : out) b = DetBox{pos(rng), pos(rng), size(rng), size(rng), 0, score(rng)};
  return out;
}

void BM_Nms(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto boxes = random_boxes(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(nms(boxes, 0.45, 0.001));
}
BENCHMARK(BM_Nms)->Arg(100)->Arg(1000);

void BM_AveragePrecision(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<RankedDet> dets(static_cast<std::size_t>(state.range(0)));
  for (auto& d : dets) d = RankedDet{u(rng), u(rng) < 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(average_precision(dets, dets.size() / 2));
}
BENCHMARK(BM_AveragePrecision)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
