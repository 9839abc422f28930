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

#include "dylo/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dylo/errors.hpp"

namespace dylo {

namespace {

constexpr double kOffsetEps = 1e-9;
// Reference input side for the size bands (64 px / 128 px at 160 px input).
constexpr double kBandReferenceInput = 160.0;
constexpr double kBandPerStride = 8.0;

double logit(double p) { return std::log(p / (1.0 - p)); }

std::size_t cell_of(double v, int stride, std::size_t side) {
  const double c = std::floor(v / stride);
  if (c < 0) return 0;
  return std::min(static_cast<std::size_t>(c), side - 1);
}

}  // namespace

std::size_t TargetLevel::positives() const {
  return static_cast<std::size_t>(std::count(objectness.begin(), objectness.end(), 1));
}

std::size_t TargetMap::positives() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.positives();
  return n;
}

RawBox encode_box(const DetBox& box, int stride, std::size_t row, std::size_t col) {
  const double ox = std::clamp(box.cx / stride - static_cast<double>(col), kOffsetEps, 1 - kOffsetEps);
  const double oy = std::clamp(box.cy / stride - static_cast<double>(row), kOffsetEps, 1 - kOffsetEps);
  return {logit(ox), logit(oy), std::log(box.w / stride), std::log(box.h / stride)};
}

double size_band_upper(const ModelConfig& config, std::size_t level) {
  return kBandPerStride * config.strides.at(level) * config.input_size / kBandReferenceInput;
}

std::size_t scale_for_box(const DetBox& box, const ModelConfig& config) {
  const double side = std::max(box.w, box.h);
  const std::size_t last = config.strides.size() - 1;
  for (std::size_t l = 0; l < last; ++l) {
    if (side <= size_band_upper(config, l)) return l;
  }
  return last;
}

TargetMap assign_targets(const std::vector<DetBox>& gts, const ModelConfig& config) {
  TargetMap map;
  map.num_classes = config.num_classes;
  for (int s : config.strides) {
    TargetLevel level;
    level.stride = s;
    level.side = static_cast<std::size_t>(config.input_size / s);
    level.batch = 1;
    level.objectness.assign(level.cells(), 0);
    level.raw.assign(level.cells(), RawBox{0, 0, 0, 0});
    level.boxes.assign(level.cells(), DetBox{});
    level.class_id.assign(level.cells(), -1);
    map.levels.push_back(std::move(level));
  }

  for (const auto& g : gts) {
    if (!(g.w > 0) || !(g.h > 0)) throw AnnotationError("ground-truth box with zero area");
    if (g.class_id < 0 || g.class_id >= config.num_classes) {
      throw AnnotationError("ground-truth class " + std::to_string(g.class_id) + " out of range");
    }
  }

  // Larger area first; stable so equal areas keep input order.
  std::vector<std::size_t> order(gts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gts[a].area() > gts[b].area(); });

  for (std::size_t k : order) {
    const DetBox& g = gts[k];
    TargetLevel& level = map.levels[scale_for_box(g, config)];
    const std::size_t row = cell_of(g.cy, level.stride, level.side);
    const std::size_t col = cell_of(g.cx, level.stride, level.side);
    std::size_t r = row, c = col;
    if (level.positive(level.index(0, r, c))) {
      // Nearest free 8-neighbour by distance from the box center to the cell center.
      double best = -1;
      bool found = false;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const long rr = static_cast<long>(row) + dr, cc = static_cast<long>(col) + dc;
          if (rr < 0 || cc < 0 || rr >= static_cast<long>(level.side) ||
              cc >= static_cast<long>(level.side)) {
            continue;
          }
          if (level.positive(level.index(0, rr, cc))) continue;
          const double ccx = (cc + 0.5) * level.stride, ccy = (rr + 0.5) * level.stride;
          const double d = (ccx - g.cx) * (ccx - g.cx) + (ccy - g.cy) * (ccy - g.cy);
          if (!found || d < best) {
            best = d;
            r = static_cast<std::size_t>(rr);
            c = static_cast<std::size_t>(cc);
            found = true;
          }
        }
      }
      if (!found) {
        ++map.dropped;
        map.warnings.push_back("dropped box at (" + std::to_string(g.cx) + ", " +
                               std::to_string(g.cy) + "): no free cell at stride " +
                               std::to_string(level.stride));
        continue;
      }
    }
    const std::size_t cell = level.index(0, r, c);
    level.objectness[cell] = 1;
    level.raw[cell] = encode_box(g, level.stride, r, c);
    level.boxes[cell] = g;
    level.class_id[cell] = g.class_id;
  }
  return map;
}

TargetMap stack_targets(const std::vector<TargetMap>& maps) {
  if (maps.empty()) throw ArgumentError("stack_targets: no maps");
  TargetMap out;
  out.num_classes = maps.front().num_classes;
  out.levels = maps.front().levels;
  for (auto& l : out.levels) {
    l.batch = 0;
    l.objectness.clear();
    l.raw.clear();
    l.boxes.clear();
    l.class_id.clear();
  }
  for (const auto& m : maps) {
    if (m.levels.size() != out.levels.size() || m.num_classes != out.num_classes) {
      throw DimensionError("stack_targets: maps disagree on geometry");
    }
    for (std::size_t i = 0; i < m.levels.size(); ++i) {
      const auto& src = m.levels[i];
      auto& dst = out.levels[i];
      if (src.side != dst.side || src.stride != dst.stride) {
        throw DimensionError("stack_targets: maps disagree on geometry");
      }
      dst.batch += src.batch;
      dst.objectness.insert(dst.objectness.end(), src.objectness.begin(), src.objectness.end());
      dst.raw.insert(dst.raw.end(), src.raw.begin(), src.raw.end());
      dst.boxes.insert(dst.boxes.end(), src.boxes.begin(), src.boxes.end());
      dst.class_id.insert(dst.class_id.end(), src.class_id.begin(), src.class_id.end());
    }
    out.dropped += m.dropped;
    out.warnings.insert(out.warnings.end(), m.warnings.begin(), m.warnings.end());
  }
  return out;
}

}  // namespace dylo
