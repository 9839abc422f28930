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


#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

#include "dylo/errors.hpp"
#include "dylo/synth.hpp"
#include "support/tempdir.hpp"

namespace dylo {
namespace {

namespace fs = std::filesystem;

// Changed-pixel bound recomputed here, separately from changed_bounds().
struct Diff {
  int x1 = 1 << 30, y1 = 1 << 30, x2 = -1, y2 = -1;
  std::set<std::pair<int, int>> pixels;
};

Diff diff(const Image& a, const Image& b) {
  Diff d;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      bool changed = false;
      for (int c = 0; c < a.channels; ++c) changed |= a.at(x, y, c) != b.at(x, y, c);
      if (!changed) continue;
      d.pixels.insert({x, y});
      d.x1 = std::min(d.x1, x);
      d.y1 = std::min(d.y1, y);
      d.x2 = std::max(d.x2, x + 1);
      d.y2 = std::max(d.y2, y + 1);
    }
  return d;
}

struct Drawn {
  Image before, after;
  AnnotationRecord record;
};

Drawn draw(PartKind kind, DefectType type, Severity sev, std::uint64_t part_seed,
           std::uint64_t defect_seed, int size = 128) {
  std::mt19937_64 prng(part_seed);
  PartRender part = gen_part(kind, size, size, prng);
  Drawn d;
  d.before = part.image;
  std::mt19937_64 drng(defect_seed);
  d.record = gen_defect(part, type, sev, drng);
  d.after = part.image;
  return d;
}

TEST(GenPart, DeterministicAndSized) {
  for (auto kind : kAllParts) {
    std::mt19937_64 a(5), b(5);
    auto pa = gen_part(kind, 96, 80, a), pb = gen_part(kind, 96, 80, b);
    EXPECT_EQ(pa.image, pb.image);
    EXPECT_EQ(pa.image.width, 96);
    EXPECT_EQ(pa.image.channels, 3);
  }
  std::mt19937_64 r(1);
  EXPECT_THROW(gen_part(PartKind::gear, 63, 100, r), ArgumentError);
}

TEST(GenPart, BearingCenterIsBackground) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 r(seed);
    auto p = gen_part(PartKind::bearing, 128, 128, r);
    EXPECT_FALSE(p.on_part(static_cast<int>(p.cx), static_cast<int>(p.cy)));
    EXPECT_TRUE(p.on_part(static_cast<int>(p.cx + 0.6 * p.r_tip), static_cast<int>(p.cy)) ||
                p.r_tip == 0);
  }
}

TEST(GenPart, GearMaskHasTwelveFoldLayout) {
  std::mt19937_64 r(3);
  auto p = gen_part(PartKind::gear, 256, 256, r);
  ASSERT_GT(p.r_tip, p.r_root);
  // Walk a circle between root and tip radius and count material runs.
  const double rad = (p.r_root + p.r_tip) / 2;
  const int steps = 3600;
  int runs = 0;
  bool prev = false, first = false;
  for (int i = 0; i < steps; ++i) {
    const double t = 2 * std::numbers::pi * i / steps;
    const bool on = p.on_part(static_cast<int>(std::lround(p.cx + rad * std::cos(t))),
                              static_cast<int>(std::lround(p.cy + rad * std::sin(t))));
    if (i == 0) first = on;
    if (on && !prev) ++runs;
    prev = on;
  }
  if (first && prev) --runs;  // run wrapping through angle 0
  EXPECT_EQ(runs, kGearTeeth);
}

TEST(GenDefect, IncompatiblePairIsRejected) {
  std::mt19937_64 r(1);
  auto p = gen_part(PartKind::bearing, 128, 128, r);
  EXPECT_THROW(gen_defect(p, DefectType::rust, Severity::minor, r), DataError);
}

TEST(GenDefectProperty, BoxIsTightBoundOfChangedPixels) {
  int checked = 0;
  for (auto kind : kAllParts)
    for (auto type : defects_for(kind))
      for (auto sev : {Severity::minor, Severity::moderate, Severity::severe})
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
          auto d = draw(kind, type, sev, seed, 100 + seed);
          const Diff df = diff(d.before, d.after);
          ASSERT_FALSE(df.pixels.empty());
          const DetBox b = d.record.to_pixels(d.before.width, d.before.height);
          EXPECT_NEAR(b.x1(), df.x1, 1.0);
          EXPECT_NEAR(b.y1(), df.y1, 1.0);
          EXPECT_NEAR(b.x2(), df.x2, 1.0);
          EXPECT_NEAR(b.y2(), df.y2, 1.0);
          for (auto [x, y] : df.pixels) {
            ASSERT_TRUE(x >= b.x1() - 1e-9 && x + 1 <= b.x2() + 1e-9 && y >= b.y1() - 1e-9 &&
                        y + 1 <= b.y2() + 1e-9);
          }
          EXPECT_EQ(d.record.class_id, static_cast<int>(type));
          EXPECT_EQ(d.record.severity, sev);
          EXPECT_TRUE(valid_record(d.record));
          ++checked;
        }
  EXPECT_EQ(checked, 3 * 3 * 3 * 4);
}

TEST(GenDefect, SevereAtLeastAsLargeAsMinor) {
  for (auto kind : kAllParts)
    for (auto type : defects_for(kind))
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto minor = draw(kind, type, Severity::minor, seed, seed * 7 + 1);
        auto severe = draw(kind, type, Severity::severe, seed, seed * 7 + 1);
        EXPECT_GE(severe.record.w * severe.record.h, minor.record.w * minor.record.h)
            << to_string(kind) << "/" << to_string(type) << " seed " << seed;
      }
}

TEST(GenDefect, DifferentSeedsGiveDifferentGeometry) {
  for (auto type : {DefectType::scratch, DefectType::crack, DefectType::wear}) {
    for (std::uint64_t s = 0; s < 100; ++s) {
      auto a = diff(draw(PartKind::bearing, type, Severity::moderate, 9, 2 * s).before,
                    draw(PartKind::bearing, type, Severity::moderate, 9, 2 * s).after);
      auto b = diff(draw(PartKind::bearing, type, Severity::moderate, 9, 2 * s + 1).before,
                    draw(PartKind::bearing, type, Severity::moderate, 9, 2 * s + 1).after);
      ASSERT_NE(a.pixels, b.pixels) << to_string(type) << " pair " << s;
    }
  }
}

TEST(GenSample, DeterministicPerSeed) {
  auto a = gen_sample(PartKind::gear, {DefectType::burr, DefectType::wear},
                      {Severity::minor, Severity::severe}, 160, 120, 42);
  auto b = gen_sample(PartKind::gear, {DefectType::burr, DefectType::wear},
                      {Severity::minor, Severity::severe}, 160, 120, 42);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.records.size(), 2u);
  auto c = gen_sample(PartKind::gear, {DefectType::burr, DefectType::wear},
                      {Severity::minor, Severity::severe}, 160, 120, 43);
  EXPECT_NE(a.image, c.image);
  EXPECT_THROW(gen_sample(PartKind::gear, {DefectType::burr}, {}, 160, 120, 1), ArgumentError);
}

GenSpec forty() {
  GenSpec s;
  s.width = 64;
  s.height = 64;
  s.seed = 17;
  s.counts = {{PartKind::bearing, DefectType::scratch, 10},
              {PartKind::gear, DefectType::broken_tooth, 10},
              {PartKind::bolt, DefectType::rust, 10},
              {PartKind::bolt, DefectType::deformation, 10}};
  return s;
}

std::vector<std::pair<std::string, std::vector<std::uint8_t>>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).string(), read_file(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

TEST(GenDataset, CountsFilesAndDeterminism) {
  testing::TempDir a, b;
  GenSpec spec = forty();
  spec.defect_free_fraction = 0.25;
  auto m = gen_dataset(spec, a.path());
  EXPECT_EQ(m.entries.size(), 40u);
  int images = 0, empty = 0;
  std::map<std::pair<PartKind, DefectType>, int> per;
  for (const auto& e : m.entries) {
    images += fs::exists(m.image_path(e));
    const auto recs = read_annotations(m.annotation_path(e));
    if (recs.empty()) {
      ++empty;
      EXPECT_FALSE(e.dominant);
    } else {
      ++per[{e.part, *e.dominant}];
    }
  }
  EXPECT_EQ(images, 40);
  EXPECT_EQ(empty, 10);
  int defective = 0;
  for (auto& [k, n] : per) defective += n;
  EXPECT_EQ(defective, 30);
  EXPECT_EQ(m.count(Split::train) + m.count(Split::test), 40u);
  EXPECT_EQ(m.count(Split::train), 32u);

  gen_dataset(spec, b.path());
  EXPECT_EQ(snapshot(a.path()), snapshot(b.path()));
  auto loaded = load_manifest(a.path() / "manifest.json");
  EXPECT_EQ(loaded.entries, m.entries);
}

TEST(GenDataset, ClassBalanceWithoutDefectFree) {
  testing::TempDir dir;
  auto m = gen_dataset(forty(), dir.path());
  std::map<std::pair<PartKind, DefectType>, int> per;
  for (const auto& e : m.entries) ++per[{e.part, *e.dominant}];
  EXPECT_EQ((per[{PartKind::bearing, DefectType::scratch}]), 10);
  EXPECT_EQ((per[{PartKind::bolt, DefectType::rust}]), 10);
}

TEST(GenSpec, JsonRoundTripAndValidation) {
  GenSpec s = forty();
  s.severity_mix = {0.5, 0.25, 0.25};
  s.textured = true;
  auto back = gen_spec_from_json(gen_spec_to_json(s));
  EXPECT_EQ(back.total(), 40);
  EXPECT_EQ(back.severity_mix, s.severity_mix);
  EXPECT_TRUE(back.textured);
  EXPECT_EQ(back.seed, 17u);
  EXPECT_THROW(gen_spec_from_json("{\"widht\": 10}"), DataError);
  GenSpec bad = forty();
  bad.counts.push_back({PartKind::bearing, DefectType::rust, 1});
  EXPECT_THROW(bad.validate(), DataError);
  bad = forty();
  bad.severity_mix = {0.5, 0.5, 0.5};
  EXPECT_THROW(bad.validate(), DataError);
}

}  // namespace
}  // namespace dylo
