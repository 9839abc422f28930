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

#include <cstddef>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "dylo/annotation.hpp"
#include "dylo/image.hpp"

namespace dylo {

enum class AugOp { hflip, rotate, scale, translate, color_jitter, random_crop };

std::string_view to_string(AugOp op);
std::optional<AugOp> parse_aug_op(std::string_view name);

struct AugmentParams {
  double max_rotate_deg = 15.0;
  double min_scale = 0.8;
  double max_scale = 1.2;
  double max_translate = 0.1;   // fraction of width / height
  double max_brightness = 0.2;  // fraction of full range
  double max_contrast = 0.2;    // gain drawn from [1 - c, 1 + c]
  double min_crop = 0.7;        // crop side fraction
};

inline constexpr double kMinBoxPixels = 2.0;
inline constexpr std::uint8_t kFillValue = 128;

struct Augmented {
  Image image;
  std::vector<AnnotationRecord> records;
  std::size_t dropped = 0;  // boxes lost to degeneracy or cropping
};

// Deterministic building blocks. Boxes come out as the axis-aligned hull of the
// transformed corners, clipped to the image; those narrower or shorter than
// kMinBoxPixels are dropped.
Augmented hflip(const Image& image, const std::vector<AnnotationRecord>& records);
Augmented rotate(const Image& image, const std::vector<AnnotationRecord>& records, double degrees);
Augmented scale_about_center(const Image& image, const std::vector<AnnotationRecord>& records,
                             double factor);
Augmented translate(const Image& image, const std::vector<AnnotationRecord>& records, double dx,
                    double dy);
// Pixel value v -> (v - 128) * contrast + 128 + brightness * 255, per channel.
Image color_jitter(const Image& image, double brightness, double contrast);
// Keeps boxes whose centers fall inside the crop rectangle (pixels).
Augmented crop(const Image& image, const std::vector<AnnotationRecord>& records, int x0, int y0,
               int width, int height);

// Applies every op in `ops`, in order, with parameters drawn from `rng`.
Augmented augment(const Image& image, const std::vector<AnnotationRecord>& records,
                  const std::vector<AugOp>& ops, std::mt19937_64& rng,
                  const AugmentParams& params = {});

}  // namespace dylo
