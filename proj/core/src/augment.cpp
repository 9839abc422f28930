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


#include "dylo/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "dylo/errors.hpp"

namespace dylo {

std::string_view to_string(AugOp op) {
  switch (op) {
    case AugOp::hflip:
      return "hflip";
    case AugOp::rotate:
      return "rotate";
    case AugOp::scale:
      return "scale";
    case AugOp::translate:
      return "translate";
    case AugOp::color_jitter:
      return "color_jitter";
    case AugOp::random_crop:
      return "random_crop";
  }
  return "";
}

std::optional<AugOp> parse_aug_op(std::string_view name) {
  for (auto op : {AugOp::hflip, AugOp::rotate, AugOp::scale, AugOp::translate,
                  AugOp::color_jitter, AugOp::random_crop}) {
    if (to_string(op) == name) return op;
  }
  return std::nullopt;
}

namespace {

// 2x3 affine map in pixel-edge coordinates: (x, y) -> (a x + b y + c, d x + e y + f).
struct Affine {
  double a = 1, b = 0, c = 0, d = 0, e = 1, f = 0;

  std::array<double, 2> apply(double x, double y) const {
    return {a * x + b * y + c, d * x + e * y + f};
  }
  Affine inverse() const {
    const double det = a * e - b * d;
    Affine inv;
    inv.a = e / det;
    inv.b = -b / det;
    inv.d = -d / det;
    inv.e = a / det;
    inv.c = -(inv.a * c + inv.b * f);
    inv.f = -(inv.d * c + inv.e * f);
    return inv;
  }
};

// Affine about the image center: translate(-center), linear part, translate back + shift.
Affine about_center(const Image& img, double a, double b, double d, double e, double sx,
                    double sy) {
  const double cx = img.width / 2.0, cy = img.height / 2.0;
  Affine m{a, b, 0, d, e, 0};
  m.c = cx - (a * cx + b * cy) + sx;
  m.f = cy - (d * cx + e * cy) + sy;
  return m;
}

Image warp(const Image& src, const Affine& fwd) {
  const Affine inv = fwd.inverse();
  Image out(src.width, src.height, src.channels, kFillValue);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      // Sample at pixel centers; lround on the source keeps an identity map exact.
      const auto [u, v] = inv.apply(x + 0.5, y + 0.5);
      const auto sx = static_cast<int>(std::lround(u - 0.5));
      const auto sy = static_cast<int>(std::lround(v - 0.5));
      if (!src.contains(sx, sy)) continue;
      for (int c = 0; c < src.channels; ++c) out.at(x, y, c) = src.at(sx, sy, c);
    }
  }
  return out;
}

// Box hull after the map, clipped, with degenerate results counted.
std::vector<AnnotationRecord> warp_records(const std::vector<AnnotationRecord>& records,
                                           const Affine& fwd, int w, int h,
                                           std::size_t& dropped) {
  std::vector<AnnotationRecord> out;
  for (const auto& r : records) {
    const double xs[2] = {r.x1() * w, r.x2() * w};
    const double ys[2] = {r.y1() * h, r.y2() * h};
    double x1 = 1e300, y1 = 1e300, x2 = -1e300, y2 = -1e300;
    for (double x : xs) {
      for (double y : ys) {
        const auto [u, v] = fwd.apply(x, y);
        x1 = std::min(x1, u);
        y1 = std::min(y1, v);
        x2 = std::max(x2, u);
        y2 = std::max(y2, v);
      }
    }
    x1 = std::clamp(x1, 0.0, static_cast<double>(w));
    x2 = std::clamp(x2, 0.0, static_cast<double>(w));
    y1 = std::clamp(y1, 0.0, static_cast<double>(h));
    y2 = std::clamp(y2, 0.0, static_cast<double>(h));
    if (x2 - x1 < kMinBoxPixels || y2 - y1 < kMinBoxPixels) {
      ++dropped;
      continue;
    }
    out.push_back(AnnotationRecord::from_corners(r.class_id, x1 / w, y1 / h, x2 / w, y2 / h,
                                                 r.severity));
  }
  return out;
}

Augmented apply_affine(const Image& image, const std::vector<AnnotationRecord>& records,
                       const Affine& fwd) {
  Augmented out;
  out.image = warp(image, fwd);
  out.records = warp_records(records, fwd, image.width, image.height, out.dropped);
  return out;
}

}  // namespace

Augmented hflip(const Image& image, const std::vector<AnnotationRecord>& records) {
  Augmented out;
  out.image = image;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        out.image.at(x, y, c) = image.at(image.width - 1 - x, y, c);
      }
    }
  }
  for (auto r : records) {
    r.cx = 1.0 - r.cx;
    out.records.push_back(r);
  }
  return out;
}

Augmented rotate(const Image& image, const std::vector<AnnotationRecord>& records,
                 double degrees) {
  if (degrees == 0.0) return Augmented{image, records, 0};
  const double t = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(t), s = std::sin(t);
  return apply_affine(image, records, about_center(image, c, -s, s, c, 0, 0));
}

Augmented scale_about_center(const Image& image, const std::vector<AnnotationRecord>& records,
                             double factor) {
  if (!(factor > 0)) throw ArgumentError("scale factor must be > 0");
  return apply_affine(image, records, about_center(image, factor, 0, 0, factor, 0, 0));
}

Augmented translate(const Image& image, const std::vector<AnnotationRecord>& records, double dx,
                    double dy) {
  return apply_affine(image, records, about_center(image, 1, 0, 0, 1, dx, dy));
}

Image color_jitter(const Image& image, double brightness, double contrast) {
  Image out = image;
  const double shift = brightness * 255.0;
  for (auto& p : out.pixels) {
    const double v = (p - 128.0) * contrast + 128.0 + shift;
    p = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return out;
}

Augmented crop(const Image& image, const std::vector<AnnotationRecord>& records, int x0, int y0,
               int width, int height) {
  if (width <= 0 || height <= 0 || x0 < 0 || y0 < 0 || x0 + width > image.width ||
      y0 + height > image.height) {
    throw ArgumentError("crop rectangle outside the image");
  }
  Augmented out;
  out.image = Image(width, height, image.channels);
  for (int y = 0; y < height; ++y) {
    const auto* s = image.pixels.data() + image.offset(x0, y0 + y);
    std::copy(s, s + static_cast<std::size_t>(width) * image.channels,
              out.image.pixels.data() + out.image.offset(0, y));
  }
  for (const auto& r : records) {
    const double cx = r.cx * image.width, cy = r.cy * image.height;
    if (cx < x0 || cx >= x0 + width || cy < y0 || cy >= y0 + height) {
      ++out.dropped;
      continue;
    }
    const double x1 = std::clamp(r.x1() * image.width - x0, 0.0, static_cast<double>(width));
    const double x2 = std::clamp(r.x2() * image.width - x0, 0.0, static_cast<double>(width));
    const double y1 = std::clamp(r.y1() * image.height - y0, 0.0, static_cast<double>(height));
    const double y2 = std::clamp(r.y2() * image.height - y0, 0.0, static_cast<double>(height));
    if (x2 - x1 < kMinBoxPixels || y2 - y1 < kMinBoxPixels) {
      ++out.dropped;
      continue;
    }
    out.records.push_back(AnnotationRecord::from_corners(r.class_id, x1 / width, y1 / height,
                                                         x2 / width, y2 / height, r.severity));
  }
  return out;
}

Augmented augment(const Image& image, const std::vector<AnnotationRecord>& records,
                  const std::vector<AugOp>& ops, std::mt19937_64& rng,
                  const AugmentParams& params) {
  Augmented cur{image, records, 0};
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  for (AugOp op : ops) {
    Augmented next;
    switch (op) {
      case AugOp::hflip:
        next = hflip(cur.image, cur.records);
        break;
      case AugOp::rotate:
        next = rotate(cur.image, cur.records, uniform(-params.max_rotate_deg, params.max_rotate_deg));
        break;
      case AugOp::scale:
        next = scale_about_center(cur.image, cur.records, uniform(params.min_scale, params.max_scale));
        break;
      case AugOp::translate: {
        const double dx = uniform(-params.max_translate, params.max_translate) * cur.image.width;
        const double dy = uniform(-params.max_translate, params.max_translate) * cur.image.height;
        next = translate(cur.image, cur.records, dx, dy);
        break;
      }
      case AugOp::color_jitter: {
        const double b = uniform(-params.max_brightness, params.max_brightness);
        const double c = uniform(1.0 - params.max_contrast, 1.0 + params.max_contrast);
        next = Augmented{color_jitter(cur.image, b, c), cur.records, 0};
        break;
      }
      case AugOp::random_crop: {
        const double f = uniform(params.min_crop, 1.0);
        const int w = std::max(1, static_cast<int>(std::lround(f * cur.image.width)));
        const int h = std::max(1, static_cast<int>(std::lround(f * cur.image.height)));
        const int x0 = std::uniform_int_distribution<int>(0, cur.image.width - w)(rng);
        const int y0 = std::uniform_int_distribution<int>(0, cur.image.height - h)(rng);
        next = crop(cur.image, cur.records, x0, y0, w, h);
        break;
      }
    }
    next.dropped += cur.dropped;
    cur = std::move(next);
  }
  return cur;
}

}  // namespace dylo
