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

#include <span>
#include <vector>

#include "dylo/annotation.hpp"
#include "dylo/box.hpp"
#include "dylo/image.hpp"
#include "dylo/model.hpp"
#include "dylo/tensor.hpp"

namespace dylo {

inline constexpr float kLetterboxPad = 0.5f;

/// Aspect-preserving fit of a source image into a size x size square with the
/// content centered; the smaller padding goes on the top/left.
struct Letterbox {
  int src_w = 0;
  int src_h = 0;
  int size = 0;
  int content_w = 0;
  int content_h = 0;
  int pad_x = 0;
  int pad_y = 0;

  static Letterbox fit(int src_w, int src_h, int size);

  // Source pixel coordinates to network input coordinates and back.
  double map_x(double x) const { return x * content_w / src_w + pad_x; }
  double map_y(double y) const { return y * content_h / src_h + pad_y; }
  double unmap_x(double x) const { return (x - pad_x) * src_w / content_w; }
  double unmap_y(double y) const { return (y - pad_y) * src_h / content_h; }

  // Normalized record to a pixel box in the network input frame.
  DetBox map_record(const AnnotationRecord& record) const;
  // Network-frame box back to source pixels, clipped to the image.
  DetBox unmap_box(const DetBox& box) const;
};

// Writes channels x size x size floats in [0, 1] into `out`. Gray models use
// luminance; RGB models replicate a gray source.
void preprocess_into(const Image& image, int channels, int size, std::span<float> out);

// [1, input_channels, S, S] tensor for one image.
Tensorf preprocess(const Image& image, const ModelConfig& config);

// Ground-truth boxes of one image in the network input frame.
std::vector<DetBox> letterbox_boxes(const std::vector<AnnotationRecord>& records, int src_w,
                                    int src_h, int size);

}  // namespace dylo
