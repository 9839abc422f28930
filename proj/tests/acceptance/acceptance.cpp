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


// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// all of them pass. `acceptance 3 6` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dylo/bench.hpp"
#include "dylo/checkpoint.hpp"
#include "dylo/config.hpp"
#include "dylo/dataset.hpp"
#include "dylo/errors.hpp"
#include "dylo/eval.hpp"
#include "dylo/loss.hpp"
#include "dylo/model.hpp"
#include "dylo/ops.hpp"
#include "dylo/optim.hpp"
#include "dylo/synth.hpp"
#include "dylo/targets.hpp"
#include "dylo/train.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

#ifndef DYLO_SOURCE_DIR
#error "DYLO_SOURCE_DIR must point at the source tree"
#endif

namespace {

using namespace dylo;
using testing::grad_check;
using testing::random_tensor;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string read_text(const std::filesystem::path& p) {
  const auto bytes = read_file(p);
  return std::string(bytes.begin(), bytes.end());
}

// ---- 1. finite differences

Outcome gradients() {
  constexpr int kTrials = 20;
  std::mt19937_64 rng(2024);
  std::map<std::string, double> worst;
  auto run = [&](const std::string& name, const std::function<Tensord()>& f,
                 std::vector<Tensord> leaves, int trial, double step = testing::kFdStep) {
    const auto r = grad_check(f, std::move(leaves), 32, static_cast<std::uint64_t>(trial), step);
    worst[name] = std::max(worst[name], r.max_rel_error);
  };

  for (int t = 0; t < kTrials; ++t) {
    const std::size_t s = 1 + t % 2, p = t % 3 == 0 ? 0 : 1, o = (5 + 2 * p - 3) / s + 1;
    Tensord x = random_tensor({2, 2, 5, 5}, rng), k = random_tensor({3, 2, 3, 3}, rng);
    Tensord b = random_tensor({3}, rng), w = random_tensor({2, 3, o, o}, rng);
    run("conv2d", [&] { return sum(mul(conv2d(x, k, b, s, p), w)); }, {x, k, b}, t);
  }
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t k = 2 + t % 3, s = 1 + t % 2, p = (k - 1) / 2, o = (6 + 2 * p - k) / s + 1;
    Tensord x = random_tensor({1, 2, 6, 6}, rng), w = random_tensor({1, 2, o, o}, rng);
    run("maxpool2d", [&] { return sum(mul(maxpool2d(x, k, s, p), w)); }, {x}, t);
  }
  for (int t = 0; t < kTrials; ++t) {
    Tensord a = random_tensor({1, 4, 2, 2}, rng), b = random_tensor({1, 2, 2, 2}, rng);
    Tensord w = random_tensor({1, 6, 4, 4}, rng), v = random_tensor({1, 2, 2, 2}, rng);
    Tensord u = random_tensor({1, 2, 2, 2}, rng);
    run("upsample_nearest", [&] { return sum(mul(upsample_nearest(b, 2), slice_channels(w, 0, 2))); },
        {b}, t);
    run("concat", [&] { return sum(mul(upsample_nearest(concat<double>({a, b}, 1), 2), w)); }, {a, b}, t);
    run("split_channels", [&] {
      auto parts = split_channels(a, 2);
      return add(sum(mul(parts[0], v)), sum(mul(parts[1], u)));
    }, {a}, t);
    run("slice_channels", [&] { return sum(mul(slice_channels(a, 1, 3), v)); }, {a}, t);
  }
  for (int t = 0; t < kTrials; ++t) {
    Tensord a = random_tensor({7}, rng), b = random_tensor({7}, rng, 0.5, 2.0);
    Tensord w = random_tensor({7}, rng);
    run("add", [&] { return sum(mul(add(a, b), w)); }, {a, b}, t);
    run("sub", [&] { return sum(mul(sub(a, b), w)); }, {a, b}, t);
    run("mul", [&] { return sum(mul(mul(a, b), w)); }, {a, b}, t);
    run("div", [&] { return sum(mul(div(a, b), w)); }, {a, b}, t);
    run("minimum", [&] { return sum(mul(minimum(a, b), w)); }, {a, b}, t);
    run("maximum", [&] { return sum(mul(maximum(a, scale(b, -1.0)), w)); }, {a, b}, t);
    run("add_scalar", [&] { return sum(mul(add_scalar(a, 0.3), w)); }, {a}, t);
    run("scale", [&] { return sum(mul(scale(a, 1.7), w)); }, {a}, t);
  }
  for (int t = 0; t < kTrials; ++t) {
    Tensord a = random_tensor({9}, rng, -2.0, 2.0), w = random_tensor({9}, rng);
    run("leaky_relu", [&] { return sum(mul(leaky_relu(a), w)); }, {a}, t);
    run("relu", [&] { return sum(mul(relu(a), w)); }, {a}, t);
    run("sigmoid", [&] { return sum(mul(sigmoid(a), w)); }, {a}, t);
    run("exp", [&] { return sum(mul(exp(a), w)); }, {a}, t);
    run("clamp", [&] { return sum(mul(clamp(a, -1.5, 1.5), w)); }, {a}, t);
  }
  for (int t = 0; t < kTrials; ++t) {
    Tensord z = random_tensor({6}, rng, -3.0, 3.0), tg = random_tensor({6}, rng, 0.0, 1.0);
    run("bce", [&] { return sum(bce(sigmoid(z), tg)); }, {z, tg}, t);
    run("bce_logits", [&] { return sum(bce_logits(z, tg)); }, {z, tg}, t);
    run("mean", [&] { return mean(mul(z, z)); }, {z}, t);
    run("sum", [&] { return sum(mul(z, tg)); }, {z, tg}, t);
    run("gather", [&] { return sum(mul(gather(z, {0, 3, 3, 5}), gather(tg, {1, 2, 3, 4}))); }, {z, tg}, t);
  }

  // Whole pipeline: tiny detector + total loss, every parameter tensor sampled.
  constexpr double kModelStep = 1e-6;
  ModelConfig mc;
  mc.input_size = 32;
  mc.width = 8;
  mc.num_classes = 3;
  for (int t = 0; t < kTrials; ++t) {
    mc.seed = static_cast<std::uint64_t>(t);
    Detectord model(mc);
    Tensord x = random_tensor({1, 1, 32, 32}, rng, 0.0, 1.0);
    const auto targets = assign_targets(
        {DetBox{10, 12, 8, 6, 0}, DetBox{20, 18, 14, 12, 1}, DetBox{16, 16, 28, 24, 2}}, mc);
    std::vector<Tensord> leaves{x};
    for (const auto& [name, p] : model.parameters()) leaves.push_back(p);
    run("total_loss(model)",
        [&] { return total_loss(model.forward(x), targets, LossWeights{}); }, leaves, t, kModelStep);
  }

  double max_err = 0;
  std::string worst_op;
  for (const auto& [name, e] : worst) {
    if (e >= max_err) {
      max_err = e;
      worst_op = name;
    }
  }
  return {max_err < testing::kFdRelTol,
          fmt("%zu ops x %d trials, max rel err %.2e (%s)", worst.size(), kTrials, max_err,
              worst_op.c_str())};
}

// ---- 2. Adam

Outcome adam() {
  using Params = std::vector<std::pair<std::string, Tensord>>;
  auto param = [](double theta, double grad) {
    Tensord p = Tensord::scalar(theta);
    p.set_requires_grad();
    p.ensure_grad()[0] = grad;
    return Params{{"theta", p}};
  };
  auto one = param(1.0, 0.5);
  AdamState<double> st;
  st.alpha = 0.001;
  adam_step(one, st);
  const double hand = one[0].second.item();
  const bool hand_ok = std::abs(hand - 0.999) < 1e-9;

  testing::ReferenceAdam ref{0.01, 0.9, 0.999, 1e-8};
  auto traj = param(1.0, 0.0);
  AdamState<double> st2;
  st2.alpha = 0.01;
  double theta = 1.0, max_dev = 0;
  for (int i = 0; i < 100; ++i) {
    Tensord& p = traj[0].second;
    p.grad()[0] = 2 * p.item();
    theta = ref.step(theta, 2 * theta);
    adam_step(traj, st2);
    max_dev = std::max(max_dev, std::abs(p.item() - theta));
  }
  return {hand_ok && max_dev < 1e-12,
          fmt("single step %.12f, 100-step max deviation %.1e", hand, max_dev)};
}

// ---- 3. IoU

Outcome iou_oracle() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(0, 10), size(0.5, 6);
  double max_dev = 0;
  for (int k = 0; k < 1000; ++k) {
    const DetBox a{pos(rng), pos(rng), size(rng), size(rng)};
    const DetBox b{pos(rng), pos(rng), size(rng), size(rng)};
    max_dev = std::max(max_dev, std::abs(iou(a, b) - testing::raster_iou(a, b, 100)));
  }
  const DetBox a = DetBox::from_corners(0, 0, 2, 2);
  const double exact = std::max({std::abs(iou(a, a) - 1.0),
                                 std::abs(iou(a, DetBox::from_corners(5, 5, 6, 6))),
                                 std::abs(iou(a, DetBox::from_corners(1, 0, 3, 2)) - 1.0 / 3)});
  return {max_dev < 1e-2 && exact < 1e-9,
          fmt("1000 pairs max |iou - raster| %.2e, exact cases off by %.1e", max_dev, exact)};
}

// ---- 4. AP

Outcome ap_oracle() {
  std::mt19937_64 rng(4);
  double max_dev = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 20);
    const int num_gt = 1 + static_cast<int>(rng() % 10);
    std::vector<RankedDet> dets;
    std::vector<double> scores;
    std::vector<bool> flags;
    int tps = 0;
    for (int i = 0; i < n; ++i) {
      // Coarse scores so ties show up.
      const double s = static_cast<double>(rng() % 8) / 8.0 + 0.05;
      const bool tp = tps < num_gt && rng() % 2 == 0;
      tps += tp;
      dets.push_back({s, tp});
      scores.push_back(s);
      flags.push_back(tp);
    }
    const double got = *average_precision(dets, static_cast<std::size_t>(num_gt));
    max_dev = std::max(max_dev, std::abs(got - testing::brute_force_ap(scores, flags, num_gt)));
  }
  const double example = *average_precision({{0.9, true}, {0.8, false}, {0.7, true}}, 2);
  return {max_dev < 1e-9 && std::abs(example - 0.8333) <= 1e-4,
          fmt("50 instances max dev %.1e, [TP,FP,TP]/2 GT = %.4f", max_dev, example)};
}

// ---- 5. shapes

Outcome shapes() {
  int checked = 0;
  std::string failure;
  auto expect = [&](bool ok, const std::string& what) {
    ++checked;
    if (!ok && failure.empty()) failure = what;
  };
  {
    ModelConfig mc;
    mc.input_size = 160;
    mc.num_classes = 7;
    Detectorf model(mc);
    NoGradScope<float> ng;
    const auto g = model.forward(Tensorf(Shape{1, 1, 160, 160}, 0.5f));
    const std::size_t sides[] = {20, 10, 5};
    for (std::size_t i = 0; i < 3; ++i) {
      expect(g.size() == 3 && g[i].tensor.shape() == Shape{1, 12, sides[i], sides[i]},
             "160 input grid " + std::to_string(i));
    }
  }
  std::mt19937_64 rng(5);
  for (int size : {64, 96, 128, 160}) {
    for (int classes : {1, 3, 7}) {
      for (int width : {4, 8}) {
        for (int n : {2, 4}) {
          for (Ratio r : {Ratio{1, 4}, Ratio{1, 2}, Ratio{1, 1}}) {
            ModelConfig mc;
            mc.input_size = size;
            mc.num_classes = classes;
            mc.width = width;
            mc.resc2net_n = n;
            mc.pconv_ratio = r;
            const std::string tag = fmt("S=%d C=%d w=%d n=%d r=%d/%d", size, classes, width, n,
                                        r.num, r.den);
            Detectorf model(mc);
            NoGradScope<float> ng;
            const auto s = static_cast<std::size_t>(size);
            const auto g = model.forward(Tensorf(Shape{2, 1, s, s}, 0.25f));
            for (std::size_t i = 0; i < mc.strides.size(); ++i) {
              const auto side = s / static_cast<std::size_t>(mc.strides[i]);
              expect(g[i].tensor.shape() ==
                         Shape{2, static_cast<std::size_t>(5 + classes), side, side},
                     tag + " grid");
            }
          }
        }
      }
    }
  }
  for (std::size_t c : {4u, 8u, 16u, 32u}) {
    for (std::size_t hw : {5u, 8u}) {
      const Tensorf x = Tensorf(Shape{1, c, hw, hw}, 0.1f);
      NoGradScope<float> ng;
      const Sppf<float> sppf(c, {5, 9, 13});
      expect(sppf.pooled(x).dim(1) == 4 * c, fmt("sppf C=%zu", c));
      expect(sppf(x).shape() == x.shape(), fmt("sppf projection C=%zu", c));
      for (std::size_t n : {2u, 4u}) {
        if (c % n) continue;
        expect(ResC2NetBlock<float>(c, n)(x).shape() == x.shape(), fmt("resc2net C=%zu n=%zu", c, n));
      }
      for (Ratio r : {Ratio{1, 4}, Ratio{1, 2}, Ratio{1, 1}}) {
        expect(PConv<float>(c, r)(x).shape() == x.shape(), fmt("pconv C=%zu", c));
      }
    }
  }
  return {failure.empty(), failure.empty() ? fmt("%d shape assertions", checked)
                                           : "first failure: " + failure};
}

// ---- 6. overfit

Outcome overfit() {
  const std::filesystem::path src = DYLO_SOURCE_DIR;
  const RunConfig rc = run_config_from_json(read_text(src / "configs/overfit.json"));
  const GenSpec spec = gen_spec_from_json(read_text(src / "configs/gen_overfit.json"));
  testing::TempDir dir;
  DatasetManifest m = gen_dataset(spec, dir.path());
  for (auto& e : m.entries) e.split = Split::train;

  TrainData data;
  data.train = load_samples(m, Split::train);
  data.val = data.train;
  data.class_names = m.class_names;
  ModelConfig mc = rc.model;
  mc.num_classes = static_cast<int>(m.class_names.size());
  Detectorf model(mc);
  TrainOptions opts;
  opts.loss = rc.loss;
  opts.eval = rc.eval;
  opts.augment = rc.augment;

  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult r = train_loop(model, data, rc.train, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double map = evaluate(model, data.train, data.class_names, rc.eval).map;
  const double ratio = r.log.back().train_loss / r.log.front().train_loss;
  return {map >= 0.95 && mc.input_size == 128 && mc.width == 8 && rc.train.max_epochs <= 300 &&
              data.class_names.size() == 2 && data.train.size() == 8,
          fmt("%zu images, %zu epochs in %.0f s, train mAP@0.5 %.4f (best epoch %d), final/first "
              "train loss %.4f",
              data.train.size(), r.log.size(), secs, map, r.best_epoch, ratio)};
}

// ---- 7. determinism

struct Run {
  std::string csv;
  std::vector<std::uint8_t> ckpt;
};

Run short_run() {
  testing::TempDir dir;
  GenSpec spec;
  spec.width = spec.height = 96;
  spec.seed = 5;
  spec.counts = {{PartKind::gear, DefectType::burr, 3}, {PartKind::bolt, DefectType::rust, 3}};
  spec.strategy = StrategyKind::severity_based;
  const DatasetManifest m = gen_dataset(spec, dir.path());
  TrainData data{load_samples(m, Split::train), load_samples(m, Split::test), m.class_names};
  ModelConfig mc;
  mc.input_size = 64;
  mc.width = 4;
  mc.num_classes = static_cast<int>(m.class_names.size());
  mc.seed = 9;
  TrainConfig tc;
  tc.max_epochs = 4;
  tc.batch_size = 2;
  tc.seed = 17;
  tc.augment = {"hflip", "rotate", "scale", "translate", "color_jitter", "random_crop"};
  Detectorf model(mc);
  const TrainResult r = train_loop(model, data, tc);
  return {epoch_log_csv(r.log), encode_checkpoint(model, {r.best_epoch, r.best_map, tc.seed, m.class_names})};
}

Outcome determinism() {
  const Run a = short_run();
  const Run b = short_run();
  return {a.csv == b.csv && a.ckpt == b.ckpt,
          fmt("epoch logs %s, checkpoints %s (%zu bytes)", a.csv == b.csv ? "identical" : "differ",
              a.ckpt == b.ckpt ? "identical" : "differ", a.ckpt.size())};
}

// ---- 8. split

Outcome split_fidelity() {
  struct Set {
    std::string name;
    std::vector<std::tuple<PartKind, std::optional<DefectType>, int>> strata;
  };
  // Dataset sizes from the source corpus; per-type counts spread evenly.
  const std::vector<Set> sets = {
      {"1000 gears",
       {{PartKind::gear, DefectType::broken_tooth, 334}, {PartKind::gear, DefectType::burr, 333},
        {PartKind::gear, DefectType::wear, 333}}},
      {"1200 bearings",
       {{PartKind::bearing, DefectType::scratch, 400}, {PartKind::bearing, DefectType::crack, 400},
        {PartKind::bearing, DefectType::wear, 400}}},
      {"800 bolts",
       {{PartKind::bolt, DefectType::deformation, 267}, {PartKind::bolt, DefectType::crack, 267},
        {PartKind::bolt, DefectType::rust, 266}}},
      {"700 mixed",
       {{PartKind::bearing, DefectType::scratch, 78}, {PartKind::bearing, DefectType::crack, 78},
        {PartKind::bearing, DefectType::wear, 78}, {PartKind::gear, DefectType::broken_tooth, 78},
        {PartKind::gear, DefectType::burr, 78}, {PartKind::gear, DefectType::wear, 77},
        {PartKind::bolt, DefectType::deformation, 77}, {PartKind::bolt, DefectType::crack, 77},
        {PartKind::bolt, DefectType::rust, 77}, {PartKind::bolt, std::nullopt, 2}}},
  };
  bool ok = true;
  std::string detail;
  double worst = 0;
  for (const auto& s : sets) {
    DatasetManifest m;
    m.strategy = LabelStrategy(StrategyKind::type_based, {kAllDefects.begin(), kAllDefects.end()});
    m.class_names = m.strategy.class_names();
    int id = 0;
    for (const auto& [part, dom, n] : s.strata) {
      for (int i = 0; i < n; ++i, ++id) {
        m.entries.push_back({fmt("i%d.ppm", id), fmt("l%d.txt", id), part, dom, Split::test});
      }
    }
    const auto out = split_dataset(m, 0.8, 42);
    const std::size_t n = m.entries.size(), tr = out.count(Split::train);
    const auto want = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
    ok = ok && tr == want && out.count(Split::test) == n - want;
    std::map<std::pair<int, int>, std::pair<int, int>> per;
    for (const auto& e : out.entries) {
      auto& c = per[{static_cast<int>(e.part), e.dominant ? static_cast<int>(*e.dominant) : -1}];
      c.first += e.split == Split::train;
      ++c.second;
    }
    for (const auto& [k, c] : per) worst = std::max(worst, std::abs(c.first - 0.8 * c.second));
    detail += fmt("%s -> %zu/%zu; ", s.name.c_str(), tr, out.count(Split::test));
  }
  ok = ok && worst <= 1.0;
  return {ok, detail + fmt("max per-stratum deviation %.2f", worst)};
}

// ---- 9. bench

Outcome bench() {
  const BenchRow r25 = summarize_timings("simple", 160, 0, std::vector<double>(10, 25.0));
  const BenchRow r50 = summarize_timings("high_res", 160, 0, std::vector<double>(10, 50.0));
  bool ok = r25.fps == 40.0 && r50.fps == 20.0;
  ModelConfig mc;
  mc.input_size = 160;
  mc.width = 8;
  const Detectorf model(mc);
  const BenchRow simple = bench_latency(model, Scenario::simple, 10, 3, 1);
  const BenchRow high = bench_latency(model, Scenario::high_res, 10, 3, 1);
  for (const BenchRow& r : {simple, high}) {
    ok = ok && r.samples_ms.size() == 10 && r.p50_ms <= r.p95_ms &&
         std::abs(r.fps * r.avg_ms - 1000.0) <= 0.05 * r.avg_ms;
  }
  ok = ok && high.avg_ms > simple.avg_ms;
  return {ok, fmt("25 ms -> %.1f fps, 50 ms -> %.1f fps; simple %.2f ms, high_res %.2f ms",
                  r25.fps, r50.fps, simple.avg_ms, high.avg_ms)};
}

// ---- 10. checkpoint

Outcome checkpoint() {
  GenSpec spec;
  spec.width = spec.height = 96;
  spec.seed = 8;
  spec.counts = {{PartKind::bearing, DefectType::scratch, 3}, {PartKind::bearing, DefectType::wear, 3}};
  testing::TempDir dir;
  const DatasetManifest m = gen_dataset(spec, dir.path() / "data");
  TrainData data{load_samples(m, Split::train), load_samples(m, Split::train), m.class_names};
  ModelConfig mc;
  mc.input_size = 64;
  mc.width = 4;
  mc.num_classes = static_cast<int>(m.class_names.size());
  TrainConfig tc;
  tc.max_epochs = 5;
  tc.batch_size = 2;
  tc.learning_rate = 5e-3;
  Detectorf model(mc);
  const TrainResult r = train_loop(model, data, tc);
  const std::string before = evaluate(model, data.train, m.class_names).to_json();

  const auto path = dir.path() / "m.dylo";
  save_checkpoint(model, {r.best_epoch, r.best_map, tc.seed, m.class_names}, path);
  const LoadedCheckpoint back = load_checkpoint(path);
  const std::string after = evaluate(back.model, data.train, m.class_names).to_json();
  bool same_weights = true;
  for (std::size_t i = 0; i < model.parameters().size(); ++i) {
    const auto a = model.parameters()[i].second.data();
    const auto b = back.model.parameters()[i].second.data();
    same_weights = same_weights && std::equal(a.begin(), a.end(), b.begin(), b.end(),
                                              [](float x, float y) {
                                                return std::memcmp(&x, &y, sizeof x) == 0;
                                              });
  }

  const std::vector<std::uint8_t> bytes = read_file(path);
  std::size_t rejected = 0, tried = 0;
  auto rejects = [&](const std::vector<std::uint8_t>& bad) {
    ++tried;
    try {
      (void)decode_checkpoint(bad);
    } catch (const CheckpointError&) {
      ++rejected;
    }
  };
  for (std::size_t len = 0; len < bytes.size(); len += 1 + len / 64) {
    rejects({bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(len)});
  }
  std::mt19937_64 rng(10);
  for (int k = 0; k < 200; ++k) {
    auto bad = bytes;
    bad[rng() % bad.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
    rejects(bad);
  }
  auto magic = bytes;
  magic[0] = 'X';
  rejects(magic);
  auto version = bytes;
  version[4] ^= 0x7f;
  rejects(version);

  // A failed load must leave an existing file alone.
  write_file(dir.path() / "bad.dylo", {bytes.begin(), bytes.begin() + 100});
  bool load_failed = false;
  try {
    (void)load_checkpoint(dir.path() / "bad.dylo");
  } catch (const CheckpointError&) {
    load_failed = true;
  }

  const bool ok = before == after && same_weights && rejected == tried && load_failed;
  return {ok, fmt("metrics %s, weights %s, %zu/%zu corrupted inputs rejected",
                  before == after ? "identical" : "differ",
                  same_weights ? "bitwise equal" : "differ", rejected, tried)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradients},
      {"adam oracle", adam},
      {"iou oracle", iou_oracle},
      {"ap oracle", ap_oracle},
      {"shape contract", shapes},
      {"overfit sanity", overfit},
      {"pipeline determinism", determinism},
      {"split fidelity", split_fidelity},
      {"benchmark arithmetic", bench},
      {"checkpoint integrity", checkpoint},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %2d %-22s %s  %s  [%.1f s]\n", id, criteria[i].first.c_str(),
                o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
