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
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dylo/annotation.hpp"
#include "dylo/dataset.hpp"
#include "dylo/image.hpp"
#include "dylo/seed.hpp"
#include "dylo/taxonomy.hpp"

namespace dylo {

inline constexpr int kMinPartSize = 64;
inline constexpr int kGearTeeth = 12;

/// A rendered part plus the geometry the defect renderers need.
struct PartRender {
  Image image;  // RGB
  PartKind kind = PartKind::bearing;
  std::vector<std::uint8_t> mask;  // 1 on part material
  double cx = 0;
  double cy = 0;
  double scale = 0;  // min(width, height)
  int background_level = 0;
  int part_level = 0;
  // Gear: root and tip radius, tooth phase (radians).
  double r_root = 0;
  double r_tip = 0;
  double tooth_phase = 0;
  // Bolt shaft, pixel columns [shaft_x0, shaft_x1) and rows [shaft_y0, shaft_y1).
  double shaft_x0 = 0;
  double shaft_x1 = 0;
  double shaft_y0 = 0;
  double shaft_y1 = 0;

  bool on_part(int x, int y) const {
    return image.contains(x, y) && mask[static_cast<std::size_t>(y) * image.width + x] != 0;
  }
};

// bearing: concentric annuli around a background bore; gear: disk with
// kGearTeeth trapezoidal teeth; bolt: hexagon head over a shaft. `textured`
// adds a low-frequency background pattern.
PartRender gen_part(PartKind kind, int width, int height, std::mt19937_64& rng,
                    bool textured = false);

// Draws one defect and returns its box: the tight bound of changed pixels,
// normalized, with class_id = DefectType index. Geometry draws do not depend
// on severity, which only scales extent and contrast. DataError when the
// type does not belong to the part.
AnnotationRecord gen_defect(PartRender& part, DefectType type, Severity severity,
                            std::mt19937_64& rng);

// Tight box of pixels that differ between two equally sized images, in pixel
// corners [x1, x2) x [y1, y2); all zero when nothing differs.
std::array<int, 4> changed_bounds(const Image& before, const Image& after);

struct GenCount {
  PartKind part = PartKind::bearing;
  DefectType defect = DefectType::scratch;
  int count = 0;
};

struct GenSpec {
  std::vector<GenCount> counts;
  int width = 320;
  int height = 320;
  std::array<double, 3> severity_mix{1.0 / 3, 1.0 / 3, 1.0 / 3};  // minor, moderate, severe
  std::uint64_t seed = 0;
  double defect_free_fraction = 0.0;
  int max_defects = 1;  // extra defects draw from the part's own types
  bool textured = false;
  StrategyKind strategy = StrategyKind::type_based;
  double split_ratio = 0.8;

  void validate() const;
  int total() const;
};

// JSON with keys matching the struct fields; unknown keys are errors.
GenSpec gen_spec_from_json(const std::string& text);
std::string gen_spec_to_json(const GenSpec& spec);

struct GenSample {
  Image image;
  std::vector<AnnotationRecord> records;
  PartKind part = PartKind::bearing;
  std::vector<DefectType> defects;
  std::uint64_t seed = 0;
};

// One image with `defects.size()` defects at the given severities.
GenSample gen_sample(PartKind part, const std::vector<DefectType>& defects,
                     const std::vector<Severity>& severities, int width, int height,
                     std::uint64_t seed, bool textured = false);

// Writes images/NNNNN.ppm, labels/NNNNN.txt and manifest.json under `out_dir`.
DatasetManifest gen_dataset(const GenSpec& spec, const std::filesystem::path& out_dir);

}  // namespace dylo
