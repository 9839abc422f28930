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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dylo/eval.hpp"
#include "dylo/image.hpp"
#include "dylo/model.hpp"

namespace dylo {

enum class Scenario { simple, complex, multi_target, high_res };

std::string_view to_string(Scenario scenario);
std::optional<Scenario> parse_scenario(std::string_view name);

struct BenchRow {
  std::string scenario;
  int input_size = 0;
  int image_count = 0;
  int warmup = 0;
  double avg_ms = 0;
  double p50_ms = 0;
  double p95_ms = 0;
  double fps = 0;
  std::vector<double> samples_ms;
};

inline double fps_from_ms(double avg_ms) { return 1000.0 / avg_ms; }

// Row from raw per-image timings; percentiles use the nearest-rank rule.
BenchRow summarize_timings(std::string scenario, int input_size, int warmup,
                           std::vector<double> samples_ms);

// simple: one part, one defect at 320x320; complex: the same on a textured
// background; multi_target: 5-10 defects; high_res: one defect at 1920x1080.
std::vector<Image> scenario_images(Scenario scenario, int count, std::uint64_t seed);

// Times preprocess + forward + decode + NMS per image on one thread, after
// `warmup` untimed runs. ArgumentError when n_images < 1.
BenchRow bench_latency(const Detectorf& model, Scenario scenario, int n_images, int warmup,
                       std::uint64_t seed = 0, const EvalConfig& config = {});

std::string bench_table(const std::vector<BenchRow>& rows);
std::string bench_json(const std::vector<BenchRow>& rows);

}  // namespace dylo
