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

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dylo/box.hpp"
#include "dylo/model.hpp"

namespace dylo {

using RawBox = std::array<double, 4>;  // tx, ty, tw, th

/// Ground truth for one stride, laid out [N, S, S] row-major.
struct TargetLevel {
  int stride = 0;
  std::size_t side = 0;
  std::size_t batch = 0;
  std::vector<std::uint8_t> objectness;
  std::vector<RawBox> raw;      // encoded regression target, positives only
  std::vector<DetBox> boxes;    // ground-truth geometry, positives only
  std::vector<int> class_id;    // -1 on negative cells

  std::size_t cells() const { return batch * side * side; }
  std::size_t index(std::size_t n, std::size_t row, std::size_t col) const {
    return (n * side + row) * side + col;
  }
  bool positive(std::size_t cell) const { return objectness[cell] != 0; }
  std::size_t positives() const;
};

struct TargetMap {
  std::vector<TargetLevel> levels;
  int num_classes = 0;
  std::size_t dropped = 0;
  std::vector<std::string> warnings;

  std::size_t positives() const;
  std::size_t batch() const { return levels.empty() ? 0 : levels.front().batch; }
};

// Encoding inverse to decode_cell(): logit of the in-cell offset and
// log(size / stride). Offsets are clamped just inside (0, 1).
RawBox encode_box(const DetBox& box, int stride, std::size_t row, std::size_t col);

// Largest box side that stride level `level` is responsible for; the last
// level takes everything above the previous band.
double size_band_upper(const ModelConfig& config, std::size_t level);
std::size_t scale_for_box(const DetBox& box, const ModelConfig& config);

/// Assigns each ground-truth box (pixels, network input frame) to one scale
/// and one cell. Larger boxes claim cells first; a loser moves to the nearest
/// free neighbouring cell or is dropped with a warning.
TargetMap assign_targets(const std::vector<DetBox>& gts, const ModelConfig& config);

// Concatenates single-image maps along the batch axis.
TargetMap stack_targets(const std::vector<TargetMap>& maps);

}  // namespace dylo
