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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "dylo/annotation.hpp"
#include "dylo/dataset.hpp"
#include "dylo/errors.hpp"
#include "dylo/image.hpp"
#include "dylo/taxonomy.hpp"
#include "support/tempdir.hpp"

namespace dylo {
namespace {

TEST(Taxonomy, NamesRoundTrip) {
  for (auto p : kAllParts) EXPECT_EQ(parse_part(to_string(p)), p);
  for (auto d : kAllDefects) EXPECT_EQ(parse_defect(to_string(d)), d);
  for (auto s : {Severity::minor, Severity::moderate, Severity::severe}) {
    EXPECT_EQ(parse_severity(to_string(s)), s);
    EXPECT_EQ(severity_from_token(severity_token(s)), s);
  }
  EXPECT_FALSE(parse_part("nut"));
  EXPECT_FALSE(severity_from_token('x'));
}

TEST(Taxonomy, EachPartCarriesThreeDefects) {
  EXPECT_TRUE(compatible(PartKind::gear, DefectType::broken_tooth));
  EXPECT_FALSE(compatible(PartKind::bearing, DefectType::rust));
  EXPECT_TRUE(compatible(PartKind::bolt, DefectType::crack));
  std::set<DefectType> seen;
  for (auto p : kAllParts)
    for (auto d : defects_for(p)) seen.insert(d);
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Annotation, ParsesPlainRecord) {
  auto r = parse_annotation("0 0.5 0.5 0.2 0.1");
  EXPECT_EQ(r.class_id, 0);
  EXPECT_DOUBLE_EQ(r.cx, 0.5);
  EXPECT_DOUBLE_EQ(r.cy, 0.5);
  EXPECT_DOUBLE_EQ(r.w, 0.2);
  EXPECT_DOUBLE_EQ(r.h, 0.1);
  EXPECT_FALSE(r.severity);
}

TEST(Annotation, ParsesSeverityToken) {
  auto r = parse_annotation("1 0.25 0.75 0.1 0.2 s");
  EXPECT_EQ(r.severity, Severity::severe);
  EXPECT_EQ(parse_annotation("  1\t0.25 0.75 0.1 0.2   m ").severity, Severity::minor);
}

TEST(Annotation, RejectsOutOfBoundsBox) {
  try {
    parse_annotation("3 0.9 0.9 0.3 0.3", 7);
    FAIL();
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("exceeds image bounds"), std::string::npos);
    EXPECT_NE(msg.find("7"), std::string::npos);
  }
}

TEST(Annotation, ToleranceClampsTinyOvershoot) {
  auto r = parse_annotation("0 0.1 0.5 0.2000004 0.2");
  EXPECT_GE(r.x1(), 0.0);
  EXPECT_TRUE(valid_record(r));
  EXPECT_THROW(parse_annotation("0 0.1 0.5 0.20001 0.2"), ParseError);
}

TEST(Annotation, ErrorCases) {
  for (const char* bad : {"0 0.5 abc 0.2 0.1", "0 1.5 0.5 0.2 0.1", "0 0.5 0.5 0 0.1",
                          "9 0.5 0.5 0.2 0.1", "-1 0.5 0.5 0.2 0.1", "0 0.5 0.5 0.2",
                          "0 0.5 0.5 0.2 0.1 q", "0 0.5 0.5 0.2 0.1 s extra", "0.5 0.5 0.5 0.2 0.1"}) {
    EXPECT_THROW(parse_annotation(bad), ParseError) << bad;
  }
}

TEST(Annotation, MultiLineKeepsLineNumbers) {
  auto rs = parse_annotations("0 0.5 0.5 0.2 0.1\n\n1 0.3 0.3 0.1 0.1 d\n");
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[1].severity, Severity::moderate);
  try {
    parse_annotations("0 0.5 0.5 0.2 0.1\n\n0 2 2 2 2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
}

TEST(Annotation, FormatRoundTrips) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double w = 0.01 + 0.5 * u(rng), h = 0.01 + 0.5 * u(rng);
    AnnotationRecord r{static_cast<int>(i % 7), w / 2 + (1 - w) * u(rng), h / 2 + (1 - h) * u(rng),
                       w, h, std::nullopt};
    if (i % 2) r.severity = static_cast<Severity>(i % 3);
    auto back = parse_annotation(format_annotation(r));
    EXPECT_EQ(back.class_id, r.class_id);
    EXPECT_NEAR(back.cx, r.cx, 1e-6);
    EXPECT_NEAR(back.h, r.h, 1e-6);
    EXPECT_EQ(back.severity, r.severity);
  }
}

TEST(Annotation, PixelsAndCorners) {
  auto r = AnnotationRecord::from_corners(2, 0.1, 0.2, 0.3, 0.6);
  EXPECT_NEAR(r.cx, 0.2, 1e-12);
  EXPECT_NEAR(r.h, 0.4, 1e-12);
  DetBox b = r.to_pixels(200, 100);
  EXPECT_NEAR(b.x1(), 20, 1e-9);
  EXPECT_NEAR(b.y2(), 60, 1e-9);
  EXPECT_EQ(b.class_id, 2);
}

TEST(Annotation, DominantType) {
  EXPECT_FALSE(dominant_type({}));
  std::vector<AnnotationRecord> rs{{1, .5, .5, .1, .1, {}}, {4, .5, .5, .1, .1, {}},
                                   {4, .2, .2, .1, .1, {}}, {1, .3, .3, .1, .1, {}}};
  EXPECT_EQ(dominant_type(rs), DefectType::crack);  // tie goes to the lower index
  rs.push_back({4, .7, .7, .1, .1, {}});
  EXPECT_EQ(dominant_type(rs), DefectType::burr);
}

const std::vector<DefectType> kBearing{DefectType::scratch, DefectType::crack, DefectType::wear};

TEST(Strategy, SeverityBasedGivesNineClasses) {
  LabelStrategy s(StrategyKind::severity_based, kBearing);
  EXPECT_EQ(s.num_classes(), 9);
  EXPECT_EQ(s.class_names().size(), 9u);
  EXPECT_EQ(s.class_names()[4], "crack_moderate");
  std::set<int> ids;
  for (auto t : kBearing)
    for (auto v : {Severity::minor, Severity::moderate, Severity::severe})
      ids.insert(s.class_of(t, v));
  EXPECT_EQ(ids.size(), 9u);
  EXPECT_EQ(s.class_of(DefectType::wear, Severity::severe), 8);
  EXPECT_THROW(s.class_of(DefectType::wear, std::nullopt), StrategyError);
  EXPECT_THROW(s.class_of(DefectType::rust, Severity::minor), StrategyError);
}

TEST(Strategy, TypeBasedDropsSeverity) {
  LabelStrategy s(StrategyKind::type_based, kBearing);
  EXPECT_EQ(s.num_classes(), 3);
  std::vector<AnnotationRecord> rs{{1, .5, .5, .2, .2, Severity::severe},
                                   {2, .3, .3, .1, .1, Severity::minor}};
  auto out = apply_label_strategy(rs, s);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].class_id, 1);
  EXPECT_EQ(out[1].class_id, 2);
  EXPECT_FALSE(out[0].severity);
  EXPECT_DOUBLE_EQ(out[0].cx, .5);
}

TEST(Strategy, NoRoiOneFullBoxPerType) {
  LabelStrategy s(StrategyKind::no_roi, kBearing);
  std::vector<AnnotationRecord> rs{{1, .5, .5, .2, .2, {}}, {0, .3, .3, .1, .1, {}},
                                   {0, .7, .7, .1, .1, {}}};
  auto out = apply_label_strategy(rs, s);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].class_id, 0);
  EXPECT_EQ(out[1].class_id, 1);
  for (const auto& r : out) {
    EXPECT_EQ(r.cx, 0.5);
    EXPECT_EQ(r.cy, 0.5);
    EXPECT_EQ(r.w, 1.0);
    EXPECT_EQ(r.h, 1.0);
  }
  EXPECT_TRUE(apply_label_strategy({}, s).empty());
}

TEST(Strategy, SeverityMissingIsError) {
  LabelStrategy s(StrategyKind::severity_based, kBearing);
  EXPECT_THROW(apply_label_strategy({{0, .5, .5, .1, .1, {}}}, s), StrategyError);
}

TEST(Image, PnmRoundTripGrayAndRgb) {
  for (int ch : {1, 3}) {
    Image img(5, 3, ch);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 17);
    EXPECT_EQ(decode_pnm(encode_pnm(img)), img);
  }
}

TEST(Image, HeaderCommentsAndErrors) {
  std::string s = "P5\n# note\n2 1\n255\n";
  std::vector<std::uint8_t> bytes(s.begin(), s.end());
  bytes.push_back(7);
  bytes.push_back(9);
  Image img = decode_pnm(bytes);
  EXPECT_EQ(img.at(1, 0), 9);
  bytes.pop_back();
  EXPECT_THROW(decode_pnm(bytes), DataError);
  std::string p3 = "P3\n1 1\n255\n1 2 3\n";
  EXPECT_THROW(decode_pnm({p3.begin(), p3.end()}), DataError);
  std::string wide = "P5\n1 1\n65535\n\1\2";
  EXPECT_THROW(decode_pnm({wide.begin(), wide.end()}), DataError);
  EXPECT_THROW(read_pnm("/nonexistent/x.ppm"), IoError);
}

TEST(Image, Luma) {
  Image img(1, 1, 3);
  img.at(0, 0, 0) = 255;
  EXPECT_NEAR(img.luma(0, 0), 0.299 * 255, 1e-9);
  Image g(1, 1, 1, 77);
  EXPECT_EQ(g.luma(0, 0), 77);
}

DatasetManifest strata_manifest(const std::vector<std::pair<std::optional<DefectType>, int>>& strata,
                                PartKind part = PartKind::bearing) {
  DatasetManifest m;
  m.strategy = LabelStrategy(StrategyKind::type_based, kBearing);
  m.class_names = m.strategy.class_names();
  int id = 0;
  for (auto [dom, n] : strata) {
    for (int i = 0; i < n; ++i, ++id) {
      m.entries.push_back({"img" + std::to_string(id) + ".ppm", "lbl" + std::to_string(id) + ".txt",
                           part, dom, Split::test});
    }
  }
  return m;
}

TEST(Split, ThousandSingleStratum) {
  auto m = split_dataset(strata_manifest({{DefectType::scratch, 1000}}), 0.8, 1);
  EXPECT_EQ(m.count(Split::train), 800u);
  EXPECT_EQ(m.count(Split::test), 200u);
}

TEST(Split, SevenHundredMixed) {
  auto m = split_dataset(strata_manifest({{DefectType::scratch, 233},
                                          {DefectType::crack, 231},
                                          {DefectType::wear, 229},
                                          {std::nullopt, 7}}),
                         0.8, 3);
  EXPECT_EQ(m.count(Split::train), 560u);
  EXPECT_EQ(m.count(Split::test), 140u);
}

TEST(Split, TwoStrataOfFive) {
  auto m = split_dataset(strata_manifest({{DefectType::scratch, 5}, {DefectType::crack, 5}}), 0.8, 9);
  std::map<DefectType, int> train;
  for (const auto& e : m.entries)
    if (e.split == Split::train) ++train[*e.dominant];
  EXPECT_EQ(train[DefectType::scratch], 4);
  EXPECT_EQ(train[DefectType::crack], 4);
}

TEST(Split, Errors) {
  EXPECT_THROW(split_dataset(DatasetManifest{}, 0.8, 1), ArgumentError);
  auto m = strata_manifest({{DefectType::scratch, 4}});
  EXPECT_THROW(split_dataset(m, 0.0, 1), ArgumentError);
  EXPECT_THROW(split_dataset(m, 1.0, 1), ArgumentError);
}

TEST(SplitProperty, StratifiedReproduciblePartition) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::pair<std::optional<DefectType>, int>> strata;
    const int k = 1 + static_cast<int>(rng() % 5);
    for (int s = 0; s < k; ++s) {
      std::optional<DefectType> dom;
      if (s > 0) dom = kAllDefects[static_cast<std::size_t>(s)];
      strata.push_back({dom, 1 + static_cast<int>(rng() % 40)});
    }
    const double ratio = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    auto base = strata_manifest(strata);
    auto a = split_dataset(base, ratio, trial);
    auto b = split_dataset(base, ratio, trial);
    ASSERT_EQ(a.entries, b.entries);
    // Same multiset of entries, split tags aside.
    ASSERT_EQ(a.entries.size(), base.entries.size());
    std::set<std::string> seen;
    for (const auto& e : a.entries) seen.insert(e.image.string());
    ASSERT_EQ(seen.size(), base.entries.size());
    const auto total = static_cast<double>(base.entries.size());
    EXPECT_EQ(static_cast<double>(a.count(Split::train)), std::llround(ratio * total));
    std::map<std::optional<DefectType>, std::pair<int, int>> per;  // train, all
    for (const auto& e : a.entries) {
      auto& c = per[e.dominant];
      c.first += e.split == Split::train;
      ++c.second;
    }
    for (auto& [dom, c] : per) EXPECT_LT(std::abs(c.first - ratio * c.second), 1.0 + 1e-9);
  }
}

TEST(Split, DifferentSeedsShuffleDifferently) {
  auto base = strata_manifest({{DefectType::scratch, 50}});
  auto a = split_dataset(base, 0.5, 1), b = split_dataset(base, 0.5, 2);
  EXPECT_NE(a.entries, b.entries);
}

TEST(Manifest, JsonRoundTripAndLoadSamples) {
  testing::TempDir dir;
  Image img(8, 6, 3, 50);
  write_pnm(dir.path() / "a.ppm", img);
  write_text(dir.path() / "a.txt", "1 0.5 0.5 0.25 0.5 s\n");
  write_pnm(dir.path() / "b.ppm", img);
  write_text(dir.path() / "b.txt", "");
  DatasetManifest m;
  m.strategy = LabelStrategy(StrategyKind::severity_based, {DefectType::scratch, DefectType::crack});
  m.class_names = m.strategy.class_names();
  m.entries = {{"a.ppm", "a.txt", PartKind::bolt, DefectType::crack, Split::train},
               {"b.ppm", "b.txt", PartKind::gear, std::nullopt, Split::test}};
  save_manifest(m, dir.path() / "manifest.json");
  auto back = load_manifest(dir.path() / "manifest.json");
  EXPECT_EQ(back.entries, m.entries);
  EXPECT_EQ(back.strategy, m.strategy);
  EXPECT_EQ(back.class_names, m.class_names);

  auto train = load_samples(back, Split::train);
  ASSERT_EQ(train.size(), 1u);
  ASSERT_EQ(train[0].records.size(), 1u);
  EXPECT_EQ(train[0].records[0].class_id, 5);  // crack (index 1) * 3 + severe
  auto test = load_samples(back, Split::test);
  ASSERT_EQ(test.size(), 1u);
  EXPECT_TRUE(test[0].records.empty());
}

TEST(Manifest, RejectsMalformedJson) {
  auto good = manifest_to_json(strata_manifest({{DefectType::scratch, 1}}));
  EXPECT_NO_THROW(manifest_from_json(good, "."));
  std::string extra = good;
  extra.insert(extra.find('{') + 1, "\"bogus\": 1,");
  EXPECT_THROW(manifest_from_json(extra, "."), DataError);
  EXPECT_THROW(manifest_from_json("{not json", "."), DataError);
  std::string part = good;
  part.replace(part.find("\"bearing\""), 9, "\"widget\"");
  EXPECT_THROW(manifest_from_json(part, "."), DataError);
  EXPECT_THROW(load_manifest("/nonexistent/manifest.json"), IoError);
}

}  // namespace
}  // namespace dylo
