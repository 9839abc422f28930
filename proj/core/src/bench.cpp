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


#include "dylo/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "dylo/errors.hpp"
#include "dylo/preprocess.hpp"
#include "dylo/seed.hpp"
#include "dylo/synth.hpp"

namespace dylo {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::simple:
      return "simple";
    case Scenario::complex:
      return "complex";
    case Scenario::multi_target:
      return "multi_target";
    case Scenario::high_res:
      return "high_res";
  }
  return "";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
  for (auto s : {Scenario::simple, Scenario::complex, Scenario::multi_target, Scenario::high_res}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

BenchRow summarize_timings(std::string scenario, int input_size, int warmup,
                           std::vector<double> samples_ms) {
  if (samples_ms.empty()) throw ArgumentError("summarize_timings: no samples");
  BenchRow row;
  row.scenario = std::move(scenario);
  row.input_size = input_size;
  row.image_count = static_cast<int>(samples_ms.size());
  row.warmup = warmup;
  row.avg_ms = std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) /
               static_cast<double>(samples_ms.size());
  row.fps = fps_from_ms(row.avg_ms);
  std::vector<double> sorted = samples_ms;
  std::sort(sorted.begin(), sorted.end());
  auto rank = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    return sorted[std::max<std::size_t>(k, 1) - 1];
  };
  row.p50_ms = rank(0.50);
  row.p95_ms = rank(0.95);
  row.samples_ms = std::move(samples_ms);
  return row;
}

std::vector<Image> scenario_images(Scenario scenario, int count, std::uint64_t seed) {
  std::vector<Image> out;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    std::mt19937_64 rng(derive_seed(s, 7));
    const auto part = kAllParts[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 2)(rng))];
    const auto allowed = defects_for(part);
    auto pick = [&] { return allowed[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 2)(rng))]; };
    std::vector<DefectType> defects{pick()};
    int w = 320, h = 320;
    bool textured = false;
    switch (scenario) {
      case Scenario::simple:
        break;
      case Scenario::complex:
        textured = true;
        break;
      case Scenario::multi_target: {
        const int n = std::uniform_int_distribution<int>(5, 10)(rng);
        while (static_cast<int>(defects.size()) < n) defects.push_back(pick());
        break;
      }
      case Scenario::high_res:
        w = 1920;
        h = 1080;
        break;
    }
    const std::vector<Severity> sev(defects.size(), Severity::moderate);
    out.push_back(gen_sample(part, defects, sev, w, h, s, textured).image);
  }
  return out;
}

BenchRow bench_latency(const Detectorf& model, Scenario scenario, int n_images, int warmup,
                       std::uint64_t seed, const EvalConfig& config) {
  if (n_images < 1) throw ArgumentError("bench: n_images must be >= 1");
  if (warmup < 0) throw ArgumentError("bench: warmup must be >= 0");
  // A small pool of distinct inputs, cycled; generation is not timed.
  const auto images = scenario_images(scenario, std::min(n_images, 4), seed);
  const ModelConfig& mc = model.config();
  auto run = [&](const Image& img) {
    const Tensorf input = preprocess(img, mc);
    return detect(model, input, config, config.conf_thresh).size();
  };
  for (int i = 0; i < warmup; ++i) (void)run(images[static_cast<std::size_t>(i) % images.size()]);
  std::vector<double> ms;
  ms.reserve(static_cast<std::size_t>(n_images));
  for (int i = 0; i < n_images; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    (void)run(images[static_cast<std::size_t>(i) % images.size()]);
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return summarize_timings(std::string(to_string(scenario)), mc.input_size, warmup, std::move(ms));
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-14s %6s %7s %7s %10s %10s %10s %8s\n", "Scenario", "Input",
                "Images", "Warmup", "Avg (ms)", "P50 (ms)", "P95 (ms)", "FPS");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-14s %6d %7d %7d %10.3f %10.3f %10.3f %8.1f\n",
                  r.scenario.c_str(), r.input_size, r.image_count, r.warmup, r.avg_ms, r.p50_ms,
                  r.p95_ms, r.fps);
    out += buf;
  }
  return out;
}

std::string bench_json(const std::vector<BenchRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"scenario", r.scenario},
                   {"input_size", r.input_size},
                   {"image_count", r.image_count},
                   {"warmup", r.warmup},
                   {"avg_ms", r.avg_ms},
                   {"p50_ms", r.p50_ms},
                   {"p95_ms", r.p95_ms},
                   {"fps", std::round(r.fps * 10) / 10}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace dylo
