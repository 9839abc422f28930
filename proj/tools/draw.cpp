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


#include "draw.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dylo::tools {

namespace {

constexpr std::array<std::array<std::uint8_t, 3>, 9> kPalette{{
    {230, 25, 75}, {60, 180, 75}, {255, 225, 25}, {0, 130, 200}, {245, 130, 48},
    {145, 30, 180}, {70, 240, 240}, {240, 50, 230}, {128, 128, 0},
}};

Image to_rgb(const Image& src) {
  if (src.channels == 3) return src;
  Image out(src.width, src.height, 3);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      const std::uint8_t v = src.at(x, y);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = v;
    }
  }
  return out;
}

}  // namespace

Image draw_boxes(const Image& image, const std::vector<DetBox>& boxes, int thickness) {
  Image out = to_rgb(image);
  if (out.empty()) return out;
  for (const auto& b : boxes) {
    const auto& col = kPalette[static_cast<std::size_t>(std::max(b.class_id, 0)) % kPalette.size()];
    const int x1 = std::clamp(static_cast<int>(std::floor(b.x1())), 0, out.width - 1);
    const int y1 = std::clamp(static_cast<int>(std::floor(b.y1())), 0, out.height - 1);
    const int x2 = std::clamp(static_cast<int>(std::ceil(b.x2())) - 1, 0, out.width - 1);
    const int y2 = std::clamp(static_cast<int>(std::ceil(b.y2())) - 1, 0, out.height - 1);
    auto put = [&](int x, int y) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = col[static_cast<std::size_t>(c)];
    };
    for (int t = 0; t < thickness; ++t) {
      for (int x = x1; x <= x2; ++x) {
        put(x, std::min(y1 + t, y2));
        put(x, std::max(y2 - t, y1));
      }
      for (int y = y1; y <= y2; ++y) {
        put(std::min(x1 + t, x2), y);
        put(std::max(x2 - t, x1), y);
      }
    }
  }
  return out;
}

}  // namespace dylo::tools
