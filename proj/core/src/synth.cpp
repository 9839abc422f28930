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


#include "dylo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "dylo/errors.hpp"

namespace dylo {

namespace {

constexpr double kPi = std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

void set_gray(Image& img, int x, int y, std::uint8_t v) {
  for (int c = 0; c < img.channels; ++c) img.at(x, y, c) = v;
}

// Cheap position hash for fill noise that must not consume the rng.
int hash_noise(int x, int y, int amplitude) {
  const auto h = static_cast<std::uint32_t>(x) * 73856093u ^ static_cast<std::uint32_t>(y) * 19349663u;
  return static_cast<int>(h % static_cast<std::uint32_t>(2 * amplitude + 1)) - amplitude;
}

double severity_factor(Severity s) {
  switch (s) {
    case Severity::minor:
      return 0.5;
    case Severity::moderate:
      return 0.75;
    case Severity::severe:
      return 1.0;
  }
  return 1.0;
}

struct Point {
  double x = 0;
  double y = 0;
};

// Angular half-width of a gear tooth at radius d.
double tooth_half_width(const PartRender& p, double d) {
  const double pitch = 2 * kPi / kGearTeeth;
  const double t = (d - p.r_root) / (p.r_tip - p.r_root);
  return pitch * (0.28 + (0.17 - 0.28) * t);
}

// Angular distance from the center of tooth k.
double tooth_offset(const PartRender& p, double x, double y, int* tooth) {
  const double pitch = 2 * kPi / kGearTeeth;
  double a = std::atan2(y - p.cy, x - p.cx) - p.tooth_phase;
  a = std::fmod(a, 2 * kPi);
  if (a < 0) a += 2 * kPi;
  int k = static_cast<int>(std::lround(a / pitch));
  const double off = std::abs(a - k * pitch);
  if (tooth) *tooth = k % kGearTeeth;
  return off;
}

Point point_on_part(const PartRender& p, std::mt19937_64& rng) {
  for (int tries = 0; tries < 100000; ++tries) {
    const double x = uniform(rng, 0, p.image.width);
    const double y = uniform(rng, 0, p.image.height);
    if (p.on_part(static_cast<int>(x), static_cast<int>(y))) return {x, y};
  }
  throw DataError("generator: part mask is empty");
}

/// Pixel set collected before any pixel is modified, so each pixel changes once.
class Stamp {
 public:
  explicit Stamp(const Image& img) : w_(img.width), h_(img.height), on_(img.width * img.height, 0) {}

  void disk(double x, double y, double r) {
    const int x0 = static_cast<int>(std::floor(x - r)), x1 = static_cast<int>(std::floor(x + r));
    const int y0 = static_cast<int>(std::floor(y - r)), y1 = static_cast<int>(std::floor(y + r));
    for (int yy = y0; yy <= y1; ++yy) {
      for (int xx = x0; xx <= x1; ++xx) {
        const double dx = xx + 0.5 - x, dy = yy + 0.5 - y;
        if (dx * dx + dy * dy <= std::max(r * r, 0.5)) add(xx, yy);
      }
    }
  }

  void line(Point a, Point b, double r) {
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 4)));
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      disk(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), r);
    }
  }

  void polyline(const std::vector<Point>& pts, double r) {
    for (std::size_t i = 1; i < pts.size(); ++i) line(pts[i - 1], pts[i], r);
  }

  void add(int x, int y) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    on_[static_cast<std::size_t>(y) * w_ + x] = 1;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        if (on_[static_cast<std::size_t>(y) * w_ + x]) fn(x, y);
      }
    }
  }

 private:
  int w_;
  int h_;
  std::vector<std::uint8_t> on_;
};

std::vector<Point> random_path(Point start, int segments, double turn, double seg_len,
                               std::mt19937_64& rng) {
  std::vector<Point> pts{start};
  double theta = uniform(rng, 0, 2 * kPi);
  for (int k = 0; k < segments; ++k) {
    theta += uniform(rng, -turn, turn);
    const double len = uniform(rng, 0.6, 1.0) * seg_len;
    pts.push_back({pts.back().x + len * std::cos(theta), pts.back().y + len * std::sin(theta)});
  }
  return pts;
}

void scale_about(std::vector<Point>& pts, Point origin, double f) {
  for (auto& p : pts) {
    p.x = origin.x + f * (p.x - origin.x);
    p.y = origin.y + f * (p.y - origin.y);
  }
}

void draw_scratch(PartRender& p, double f, std::mt19937_64& rng) {
  const Point start = point_on_part(p, rng);
  auto pts = random_path(start, 4, 0.35, 0.07 * p.scale, rng);
  scale_about(pts, start, f);
  Stamp s(p.image);
  s.polyline(pts, f >= 0.75 ? 1.0 : 0.5);
  const double boost = 60 + 40 * f;
  s.for_each([&](int x, int y) { set_gray(p.image, x, y, clamp_u8(p.image.luma(x, y) + boost)); });
}

void draw_crack(PartRender& p, double f, std::mt19937_64& rng) {
  const Point start = point_on_part(p, rng);
  auto main = random_path(start, 6, 0.7, 0.05 * p.scale, rng);
  std::vector<std::vector<Point>> paths{main};
  for (int b = 0; b < 2; ++b) {
    const auto& root = main[static_cast<std::size_t>(uniform_int(rng, 1, 5))];
    paths.push_back(random_path(root, 2, 0.9, 0.025 * p.scale, rng));
  }
  Stamp s(p.image);
  for (auto& path : paths) {
    scale_about(path, start, f);
    s.polyline(path, f >= 0.75 ? 1.0 : 0.5);
  }
  s.for_each([&](int x, int y) { set_gray(p.image, x, y, clamp_u8(p.image.luma(x, y) * 0.3)); });
}

// Star-shaped blob: ellipse whose radius is modulated by two harmonics.
struct Blob {
  Point c;
  double a = 1, b = 1, rot = 0, h2 = 0, h3 = 0, p2 = 0, p3 = 0;

  static Blob draw(Point c, double a, std::mt19937_64& rng) {
    Blob bl;
    bl.c = c;
    bl.a = a;
    bl.b = a * uniform(rng, 0.5, 0.9);
    bl.rot = uniform(rng, 0, kPi);
    bl.h2 = uniform(rng, -0.15, 0.15);
    bl.h3 = uniform(rng, -0.15, 0.15);
    bl.p2 = uniform(rng, 0, 2 * kPi);
    bl.p3 = uniform(rng, 0, 2 * kPi);
    return bl;
  }

  // Normalized radius; inside when <= 1.
  double rho(double x, double y) const {
    const double dx = x - c.x, dy = y - c.y;
    const double u = dx * std::cos(rot) + dy * std::sin(rot);
    const double v = -dx * std::sin(rot) + dy * std::cos(rot);
    const double phi = std::atan2(v, u);
    const double edge = 1 + h2 * std::sin(2 * phi + p2) + h3 * std::sin(3 * phi + p3);
    return std::hypot(u / a, v / b) / edge;
  }

  double extent() const { return 1.35 * std::max(a, b); }
};

void draw_wear(PartRender& p, double f, std::mt19937_64& rng) {
  const Point c = point_on_part(p, rng);
  const Blob bl = Blob::draw(c, uniform(rng, 0.06, 0.10) * p.scale * f, rng);
  const double e = bl.extent();
  for (int y = static_cast<int>(c.y - e); y <= static_cast<int>(c.y + e); ++y) {
    for (int x = static_cast<int>(c.x - e); x <= static_cast<int>(c.x + e); ++x) {
      if (!p.image.contains(x, y)) continue;
      const double r = bl.rho(x + 0.5, y + 0.5);
      if (r > 1) continue;
      const double delta = std::max(6.0, (18 + 14 * f) * (1 - 0.5 * r * r));
      set_gray(p.image, x, y, clamp_u8(p.image.luma(x, y) - delta));
    }
  }
}

void draw_broken_tooth(PartRender& p, double f, std::mt19937_64& rng) {
  const int k = uniform_int(rng, 0, kGearTeeth - 1);
  const double frac = 0.4 + 0.6 * (f - 0.5) / 0.5;
  const double r_cut = p.r_tip - frac * (p.r_tip - p.r_root) - 0.5;
  for (int y = 0; y < p.image.height; ++y) {
    for (int x = 0; x < p.image.width; ++x) {
      if (!p.on_part(x, y)) continue;
      const double d = std::hypot(x + 0.5 - p.cx, y + 0.5 - p.cy);
      if (d <= r_cut || d > p.r_tip + 1) continue;
      int tooth = 0;
      const double off = tooth_offset(p, x + 0.5, y + 0.5, &tooth);
      if (tooth != k || off > tooth_half_width(p, std::max(d, p.r_root)) + 1.0 / d) continue;
      set_gray(p.image, x, y, clamp_u8(p.background_level + hash_noise(x, y, 5)));
      p.mask[static_cast<std::size_t>(y) * p.image.width + x] = 0;
    }
  }
}

bool in_triangle(Point a, Point b, Point c, double x, double y) {
  auto cross = [](Point o, Point u, double px, double py) {
    return (u.x - o.x) * (py - o.y) - (u.y - o.y) * (px - o.x);
  };
  const double d1 = cross(a, b, x, y), d2 = cross(b, c, x, y), d3 = cross(c, a, x, y);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0, pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

void draw_burr(PartRender& p, double f, std::mt19937_64& rng) {
  const double phi = uniform(rng, 0, 2 * kPi);
  const double ux = std::cos(phi), uy = std::sin(phi);
  double rb = 0.5 * p.scale;
  while (rb > 0 && !p.on_part(static_cast<int>(p.cx + rb * ux), static_cast<int>(p.cy + rb * uy))) {
    rb -= 0.5;
  }
  const double hb = uniform(rng, 0.03, 0.05) * p.scale * f;
  const double wb = hb * uniform(rng, 0.6, 1.0);
  const Point base{p.cx + (rb - 1) * ux, p.cy + (rb - 1) * uy};
  const Point a{base.x - wb * uy, base.y + wb * ux};
  const Point b{base.x + wb * uy, base.y - wb * ux};
  const Point apex{base.x + (hb + 1) * ux, base.y + (hb + 1) * uy};
  const double e = hb + wb + 2;
  for (int y = static_cast<int>(base.y - e); y <= static_cast<int>(base.y + e); ++y) {
    for (int x = static_cast<int>(base.x - e); x <= static_cast<int>(base.x + e); ++x) {
      if (!p.image.contains(x, y) || p.on_part(x, y)) continue;
      if (!in_triangle(a, b, apex, x + 0.5, y + 0.5)) continue;
      set_gray(p.image, x, y, clamp_u8(p.part_level + hash_noise(x, y, 5)));
      p.mask[static_cast<std::size_t>(y) * p.image.width + x] = 1;
    }
  }
}

void draw_deformation(PartRender& p, double f, std::mt19937_64& rng) {
  const double side = uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0;
  const double dir = uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0;  // bulge out or dent in
  const double shaft_len = p.shaft_y1 - p.shaft_y0;
  const double len = uniform(rng, 0.12, 0.2) * p.scale * f;
  const double y0 = uniform(rng, p.shaft_y0 + 0.1 * shaft_len, p.shaft_y1 - 0.1 * shaft_len - len);
  const double amp = uniform(rng, 0.025, 0.04) * p.scale * f * dir * side;
  const double edge = side < 0 ? p.shaft_x0 : p.shaft_x1;
  const Image before = p.image;
  const std::vector<std::uint8_t> mask_before = p.mask;
  const int xa = static_cast<int>(std::floor(edge - std::abs(amp) - 3));
  const int xb = static_cast<int>(std::ceil(edge + std::abs(amp) + 3));
  for (int y = static_cast<int>(std::floor(y0)); y < static_cast<int>(std::ceil(y0 + len)); ++y) {
    const double d = amp * std::sin(kPi * (y + 0.5 - y0) / len);
    for (int x = xa; x <= xb; ++x) {
      if (!p.image.contains(x, y)) continue;
      const int sx = std::clamp(static_cast<int>(std::lround(x - d)), 0, p.image.width - 1);
      for (int c = 0; c < p.image.channels; ++c) p.image.at(x, y, c) = before.at(sx, y, c);
      p.mask[static_cast<std::size_t>(y) * p.image.width + x] =
          mask_before[static_cast<std::size_t>(y) * p.image.width + sx];
    }
  }
}

void draw_rust(PartRender& p, double f, std::mt19937_64& rng) {
  const Point c = point_on_part(p, rng);
  const Blob bl = Blob::draw(c, uniform(rng, 0.05, 0.08) * p.scale * f, rng);
  const double e = bl.extent();
  for (int y = static_cast<int>(c.y - e); y <= static_cast<int>(c.y + e); ++y) {
    for (int x = static_cast<int>(c.x - e); x <= static_cast<int>(c.x + e); ++x) {
      if (!p.image.contains(x, y) || bl.rho(x + 0.5, y + 0.5) > 1) continue;
      if (uniform(rng, 0, 1) > 0.6) continue;
      std::array<std::uint8_t, 3> rgb;
      if (uniform(rng, 0, 1) < 0.5) {
        rgb = {clamp_u8(80 + uniform(rng, 0, 25)), clamp_u8(28 + uniform(rng, 0, 12)),
               clamp_u8(20 + uniform(rng, 0, 10))};
      } else {
        const auto g = clamp_u8(55 + uniform(rng, 0, 15));
        rgb = {g, g, g};
      }
      bool same = true;
      for (int ch = 0; ch < 3; ++ch) same = same && p.image.at(x, y, ch) == rgb[ch];
      if (same) {
        for (auto& v : rgb) v = static_cast<std::uint8_t>(v >= 12 ? v - 12 : v + 12);
      }
      for (int ch = 0; ch < 3; ++ch) p.image.at(x, y, ch) = rgb[ch];
    }
  }
}

}  // namespace

PartRender gen_part(PartKind kind, int width, int height, std::mt19937_64& rng, bool textured) {
  if (width < kMinPartSize || height < kMinPartSize) {
    throw ArgumentError("gen_part: size must be at least " + std::to_string(kMinPartSize));
  }
  PartRender p;
  p.kind = kind;
  p.image = Image(width, height, 3);
  p.mask.assign(static_cast<std::size_t>(width) * height, 0);
  const double m = std::min(width, height);
  p.scale = m;
  p.cx = width / 2.0 + uniform(rng, -0.03, 0.03) * m;
  p.cy = height / 2.0 + uniform(rng, -0.03, 0.03) * m;
  p.background_level = uniform_int(rng, 35, 55);
  p.part_level = uniform_int(rng, 140, 170);
  const double tex_a = textured ? 18.0 : 0.0;
  const double ph1 = uniform(rng, 0, 2 * kPi), ph2 = uniform(rng, 0, 2 * kPi);

  const double R = 0.42 * m * uniform(rng, 0.92, 1.0);
  p.r_root = 0.30 * m;
  p.r_tip = 0.40 * m;
  p.tooth_phase = uniform(rng, 0, 2 * kPi / kGearTeeth);
  const double head_r = 0.17 * m;
  const Point head{p.cx, p.cy - 0.22 * m};
  p.shaft_x0 = p.cx - 0.08 * m;
  p.shaft_x1 = p.cx + 0.08 * m;
  p.shaft_y0 = head.y;
  p.shaft_y1 = std::min(p.cy + 0.40 * m, height - 2.0);

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const double d = std::hypot(px - p.cx, py - p.cy);
      int level = -1;
      switch (kind) {
        case PartKind::bearing:
          if (d >= 0.28 * R && d < 0.5 * R) level = p.part_level;
          if (d >= 0.5 * R && d < 0.7 * R) level = p.part_level - 45;
          if (d >= 0.7 * R && d < R) level = p.part_level;
          break;
        case PartKind::gear:
          if (d >= 0.07 * m && d <= p.r_root) level = p.part_level;
          if (d > p.r_root && d <= p.r_tip &&
              tooth_offset(p, px, py, nullptr) <= tooth_half_width(p, d)) {
            level = p.part_level;
          }
          break;
        case PartKind::bolt: {
          bool in_hex = true;
          for (int k = 0; k < 3; ++k) {
            const double a = kPi / 6 + k * kPi / 3;
            if (std::abs((px - head.x) * std::cos(a) + (py - head.y) * std::sin(a)) >
                head_r * std::cos(kPi / 6)) {
              in_hex = false;
            }
          }
          const bool in_shaft = px >= p.shaft_x0 && px < p.shaft_x1 && py >= p.shaft_y0 &&
                                py < p.shaft_y1;
          if (in_hex) level = p.part_level + 10;
          else if (in_shaft) level = p.part_level;
          break;
        }
      }
      double v;
      if (level >= 0) {
        p.mask[static_cast<std::size_t>(y) * width + x] = 1;
        v = level + uniform_int(rng, -6, 6);
      } else {
        v = p.background_level + uniform_int(rng, -6, 6) +
            tex_a * std::sin(px * 0.11 + ph1) * std::cos(py * 0.07 + ph2);
      }
      set_gray(p.image, x, y, clamp_u8(v));
    }
  }
  return p;
}

std::array<int, 4> changed_bounds(const Image& before, const Image& after) {
  if (before.width != after.width || before.height != after.height ||
      before.channels != after.channels) {
    throw DimensionError("changed_bounds: image geometry differs");
  }
  int x1 = after.width, y1 = after.height, x2 = -1, y2 = -1;
  for (int y = 0; y < after.height; ++y) {
    for (int x = 0; x < after.width; ++x) {
      for (int c = 0; c < after.channels; ++c) {
        if (before.at(x, y, c) != after.at(x, y, c)) {
          x1 = std::min(x1, x);
          y1 = std::min(y1, y);
          x2 = std::max(x2, x);
          y2 = std::max(y2, y);
          break;
        }
      }
    }
  }
  if (x2 < 0) return {0, 0, 0, 0};
  return {x1, y1, x2 + 1, y2 + 1};
}

AnnotationRecord gen_defect(PartRender& part, DefectType type, Severity severity,
                            std::mt19937_64& rng) {
  if (!compatible(part.kind, type)) {
    throw DataError("generator: " + std::string(to_string(part.kind)) + " cannot carry " +
                    std::string(to_string(type)));
  }
  const double f = severity_factor(severity);
  for (int attempt = 0; attempt < 16; ++attempt) {
    const Image before = part.image;
    const auto mask_before = part.mask;
    switch (type) {
      case DefectType::scratch:
        draw_scratch(part, f, rng);
        break;
      case DefectType::crack:
        draw_crack(part, f, rng);
        break;
      case DefectType::wear:
        draw_wear(part, f, rng);
        break;
      case DefectType::broken_tooth:
        draw_broken_tooth(part, f, rng);
        break;
      case DefectType::burr:
        draw_burr(part, f, rng);
        break;
      case DefectType::deformation:
        draw_deformation(part, f, rng);
        break;
      case DefectType::rust:
        draw_rust(part, f, rng);
        break;
    }
    const auto [x1, y1, x2, y2] = changed_bounds(before, part.image);
    if (x2 > x1 && y2 > y1) {
      const double W = part.image.width, H = part.image.height;
      return AnnotationRecord::from_corners(static_cast<int>(type), x1 / W, y1 / H, x2 / W,
                                            y2 / H, severity);
    }
    part.image = before;
    part.mask = mask_before;
  }
  throw DataError("generator: defect " + std::string(to_string(type)) + " changed no pixels");
}

GenSample gen_sample(PartKind part, const std::vector<DefectType>& defects,
                     const std::vector<Severity>& severities, int width, int height,
                     std::uint64_t seed, bool textured) {
  if (defects.size() != severities.size()) {
    throw ArgumentError("gen_sample: one severity per defect required");
  }
  std::mt19937_64 rng(seed);
  PartRender pr = gen_part(part, width, height, rng, textured);
  GenSample s;
  s.part = part;
  s.defects = defects;
  s.seed = seed;
  for (std::size_t i = 0; i < defects.size(); ++i) {
    // Retry placement a few times so boxes of one image do not overlap.
    AnnotationRecord rec;
    for (int attempt = 0; attempt < 12; ++attempt) {
      const Image img_before = pr.image;
      const auto mask_before = pr.mask;
      rec = gen_defect(pr, defects[i], severities[i], rng);
      const DetBox nb = rec.to_pixels(width, height);
      const bool overlaps = std::any_of(s.records.begin(), s.records.end(), [&](const auto& r) {
        return intersection_area(r.to_pixels(width, height), nb) > 0;
      });
      if (!overlaps || attempt == 11) break;
      pr.image = img_before;
      pr.mask = mask_before;
    }
    s.records.push_back(rec);
  }
  s.image = std::move(pr.image);
  return s;
}

void GenSpec::validate() const {
  if (width < kMinPartSize || height < kMinPartSize) {
    throw DataError("gen spec: width and height must be >= " + std::to_string(kMinPartSize));
  }
  double mix = 0;
  for (double v : severity_mix) {
    if (!(v >= 0)) throw DataError("gen spec: severity mix entries must be >= 0");
    mix += v;
  }
  if (std::abs(mix - 1.0) > 1e-6) throw DataError("gen spec: severity mix must sum to 1");
  for (const auto& c : counts) {
    if (c.count < 0) throw DataError("gen spec: counts must be >= 0");
    if (!compatible(c.part, c.defect)) {
      throw DataError("gen spec: " + std::string(to_string(c.part)) + " cannot carry " +
                      std::string(to_string(c.defect)));
    }
  }
  if (total() <= 0) throw DataError("gen spec: no images requested");
  if (!(defect_free_fraction >= 0 && defect_free_fraction < 1)) {
    throw DataError("gen spec: defect_free_fraction must lie in [0, 1)");
  }
  if (max_defects < 1) throw DataError("gen spec: max_defects must be >= 1");
  if (!(split_ratio > 0 && split_ratio < 1)) throw DataError("gen spec: split_ratio must lie in (0, 1)");
}

int GenSpec::total() const {
  int n = 0;
  for (const auto& c : counts) n += c.count;
  return n;
}

namespace {

using nlohmann::json;

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw DataError("gen spec: bad value for '" + key + "'");
  }
}

}  // namespace

GenSpec gen_spec_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("gen spec: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("gen spec: expected an object");
  GenSpec s;
  for (const auto& [key, v] : doc.items()) {
    if (key == "width") {
      s.width = get_as<int>(v, key);
    } else if (key == "height") {
      s.height = get_as<int>(v, key);
    } else if (key == "seed") {
      s.seed = get_as<std::uint64_t>(v, key);
    } else if (key == "defect_free_fraction") {
      s.defect_free_fraction = get_as<double>(v, key);
    } else if (key == "max_defects") {
      s.max_defects = get_as<int>(v, key);
    } else if (key == "textured") {
      s.textured = get_as<bool>(v, key);
    } else if (key == "split_ratio") {
      s.split_ratio = get_as<double>(v, key);
    } else if (key == "strategy") {
      const auto k = parse_strategy(get_as<std::string>(v, key));
      if (!k) throw DataError("gen spec: unknown strategy");
      s.strategy = *k;
    } else if (key == "severity_mix") {
      if (!v.is_object()) throw DataError("gen spec: severity_mix must be an object");
      s.severity_mix = {0, 0, 0};
      for (const auto& [sk, sv] : v.items()) {
        const auto sev = parse_severity(sk);
        if (!sev) throw DataError("gen spec: unknown severity '" + sk + "'");
        s.severity_mix[static_cast<std::size_t>(*sev)] = get_as<double>(sv, sk);
      }
    } else if (key == "counts") {
      if (!v.is_array()) throw DataError("gen spec: counts must be an array");
      for (const auto& c : v) {
        if (!c.is_object()) throw DataError("gen spec: count entries must be objects");
        GenCount gc;
        bool has_part = false, has_defect = false, has_count = false;
        for (const auto& [ck, cv] : c.items()) {
          if (ck == "part") {
            const auto p = parse_part(get_as<std::string>(cv, ck));
            if (!p) throw DataError("gen spec: unknown part kind");
            gc.part = *p;
            has_part = true;
          } else if (ck == "defect") {
            const auto d = parse_defect(get_as<std::string>(cv, ck));
            if (!d) throw DataError("gen spec: unknown defect type");
            gc.defect = *d;
            has_defect = true;
          } else if (ck == "count") {
            gc.count = get_as<int>(cv, ck);
            has_count = true;
          } else {
            throw DataError("gen spec: unknown key '" + ck + "' in counts");
          }
        }
        if (!has_part || !has_defect || !has_count) {
          throw DataError("gen spec: count entries need part, defect and count");
        }
        s.counts.push_back(gc);
      }
    } else {
      throw DataError("gen spec: unknown key '" + key + "'");
    }
  }
  s.validate();
  return s;
}

std::string gen_spec_to_json(const GenSpec& s) {
  json counts = json::array();
  for (const auto& c : s.counts) {
    counts.push_back({{"part", std::string(to_string(c.part))},
                      {"defect", std::string(to_string(c.defect))},
                      {"count", c.count}});
  }
  json doc = {{"width", s.width},
              {"height", s.height},
              {"seed", s.seed},
              {"defect_free_fraction", s.defect_free_fraction},
              {"max_defects", s.max_defects},
              {"textured", s.textured},
              {"split_ratio", s.split_ratio},
              {"strategy", std::string(to_string(s.strategy))},
              {"severity_mix",
               {{"minor", s.severity_mix[0]},
                {"moderate", s.severity_mix[1]},
                {"severe", s.severity_mix[2]}}},
              {"counts", counts}};
  return doc.dump(2) + "\n";
}

DatasetManifest gen_dataset(const GenSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  std::filesystem::create_directories(out_dir / "labels", ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<GenCount> items;
  for (const auto& c : spec.counts) {
    for (int k = 0; k < c.count; ++k) items.push_back(c);
  }
  const std::size_t total = items.size();
  const auto n_free =
      static_cast<std::size_t>(std::llround(spec.defect_free_fraction * static_cast<double>(total)));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 pick(derive_seed(spec.seed, ~0ULL));
  std::shuffle(order.begin(), order.end(), pick);
  std::vector<bool> defect_free(total, false);
  for (std::size_t k = 0; k < n_free; ++k) defect_free[order[k]] = true;

  std::set<DefectType> used;
  for (const auto& c : spec.counts) {
    if (c.count == 0) continue;
    if (spec.max_defects > 1) {
      for (DefectType t : defects_for(c.part)) used.insert(t);
    } else {
      used.insert(c.defect);
    }
  }

  DatasetManifest m;
  m.root = out_dir;
  m.strategy = LabelStrategy(spec.strategy, std::vector<DefectType>(used.begin(), used.end()));
  m.class_names = m.strategy.class_names();
  std::discrete_distribution<int> sev_dist(spec.severity_mix.begin(), spec.severity_mix.end());

  for (std::size_t i = 0; i < total; ++i) {
    const std::uint64_t seed_i = derive_seed(spec.seed, i);
    std::mt19937_64 draw(derive_seed(seed_i, 1));
    std::vector<DefectType> defects;
    std::vector<Severity> sevs;
    if (!defect_free[i]) {
      const int n = std::uniform_int_distribution<int>(1, spec.max_defects)(draw);
      const auto allowed = defects_for(items[i].part);
      for (int k = 0; k < n; ++k) {
        defects.push_back(k == 0 ? items[i].defect
                                 : allowed[static_cast<std::size_t>(
                                       std::uniform_int_distribution<int>(0, 2)(draw))]);
        sevs.push_back(static_cast<Severity>(sev_dist(draw)));
      }
    }
    const GenSample s =
        gen_sample(items[i].part, defects, sevs, spec.width, spec.height, seed_i, spec.textured);
    char stem[32];
    std::snprintf(stem, sizeof stem, "%05zu", i);
    ManifestEntry e;
    e.image = std::filesystem::path("images") / (std::string(stem) + ".ppm");
    e.annotation = std::filesystem::path("labels") / (std::string(stem) + ".txt");
    e.part = items[i].part;
    e.dominant = dominant_type(s.records);
    write_pnm(out_dir / e.image, s.image);
    write_text(out_dir / e.annotation, format_annotations(s.records));
    m.entries.push_back(e);
  }
  m = split_dataset(m, spec.split_ratio, spec.seed);
  save_manifest(m, out_dir / "manifest.json");
  return m;
}

}  // namespace dylo
