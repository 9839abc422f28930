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


#include "dylo/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "dylo/errors.hpp"

namespace dylo {

Letterbox Letterbox::fit(int src_w, int src_h, int size) {
  if (src_w <= 0 || src_h <= 0 || size <= 0) throw ArgumentError("Letterbox: sizes must be > 0");
  Letterbox lb;
  lb.src_w = src_w;
  lb.src_h = src_h;
  lb.size = size;
  if (src_w >= src_h) {
    lb.content_w = size;
    lb.content_h = std::max(1, static_cast<int>(std::lround(static_cast<double>(size) * src_h / src_w)));
  } else {
    lb.content_h = size;
    lb.content_w = std::max(1, static_cast<int>(std::lround(static_cast<double>(size) * src_w / src_h)));
  }
  lb.pad_x = (size - lb.content_w) / 2;
  lb.pad_y = (size - lb.content_h) / 2;
  return lb;
}

DetBox Letterbox::map_record(const AnnotationRecord& r) const {
  return DetBox::from_corners(r.x1() * content_w + pad_x, r.y1() * content_h + pad_y,
                              r.x2() * content_w + pad_x, r.y2() * content_h + pad_y, r.class_id,
                              1.0);
}

DetBox Letterbox::unmap_box(const DetBox& b) const {
  const double x1 = std::clamp(unmap_x(b.x1()), 0.0, static_cast<double>(src_w));
  const double y1 = std::clamp(unmap_y(b.y1()), 0.0, static_cast<double>(src_h));
  const double x2 = std::clamp(unmap_x(b.x2()), 0.0, static_cast<double>(src_w));
  const double y2 = std::clamp(unmap_y(b.y2()), 0.0, static_cast<double>(src_h));
  return DetBox::from_corners(x1, y1, x2, y2, b.class_id, b.score);
}

void preprocess_into(const Image& image, int channels, int size, std::span<float> out) {
  if (image.empty()) throw DataError("preprocess: empty image");
  if (channels != 1 && channels != 3) throw ArgumentError("preprocess: channels must be 1 or 3");
  const std::size_t plane = static_cast<std::size_t>(size) * size;
  if (out.size() != plane * channels) throw DimensionError("preprocess: output buffer size");
  const Letterbox lb = Letterbox::fit(image.width, image.height, size);

  // Convert the whole source first, then sample it.
  const std::size_t npix = static_cast<std::size_t>(image.width) * image.height;
  const int planes = channels == 1 ? 1 : 3;
  std::vector<float> src(npix * planes);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * image.width + x;
      if (channels == 1 || image.channels == 1) {
        const float v = static_cast<float>(image.luma(x, y) / 255.0);
        for (int c = 0; c < planes; ++c) src[c * npix + p] = v;
      } else {
        for (int c = 0; c < 3; ++c) src[c * npix + p] = image.at(x, y, c) / 255.0f;
      }
    }
  }

  std::fill(out.begin(), out.end(), kLetterboxPad);
  std::vector<int> col(lb.content_w), row(lb.content_h);
  for (int dx = 0; dx < lb.content_w; ++dx) {
    col[dx] = std::min(image.width - 1, static_cast<int>((2LL * dx + 1) * image.width / (2LL * lb.content_w)));
  }
  for (int dy = 0; dy < lb.content_h; ++dy) {
    row[dy] = std::min(image.height - 1, static_cast<int>((2LL * dy + 1) * image.height / (2LL * lb.content_h)));
  }
  for (int c = 0; c < planes; ++c) {
    for (int dy = 0; dy < lb.content_h; ++dy) {
      const float* srow = src.data() + c * npix + static_cast<std::size_t>(row[dy]) * image.width;
      float* drow = out.data() + c * plane + static_cast<std::size_t>(dy + lb.pad_y) * size + lb.pad_x;
      for (int dx = 0; dx < lb.content_w; ++dx) drow[dx] = srow[col[dx]];
    }
  }
}

Tensorf preprocess(const Image& image, const ModelConfig& config) {
  Tensorf t(Shape{1, static_cast<std::size_t>(config.input_channels),
                  static_cast<std::size_t>(config.input_size),
                  static_cast<std::size_t>(config.input_size)});
  preprocess_into(image, config.input_channels, config.input_size, t.data());
  return t;
}

std::vector<DetBox> letterbox_boxes(const std::vector<AnnotationRecord>& records, int src_w,
                                    int src_h, int size) {
  const Letterbox lb = Letterbox::fit(src_w, src_h, size);
  std::vector<DetBox> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(lb.map_record(r));
  return out;
}

}  // namespace dylo
