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
#include <random>

#include "dylo/errors.hpp"
#include "dylo/eval.hpp"
#include "support/oracles.hpp"

namespace dylo {
namespace {

DetBox box(double x1, double y1, double x2, double y2, int cls = 0, double score = 1.0) {
  return DetBox::from_corners(x1, y1, x2, y2, cls, score);
}

TEST(Nms, Examples) {
  EXPECT_EQ(nms({box(0, 0, 10, 10, 0, 0.6)}, 0.45, 0.25).size(), 1u);
  // IoU(0..10, 0..9.5) = 0.95
  auto kept = nms({box(0, 0, 10, 9.5, 0, 0.8), box(0, 0, 10, 10, 0, 0.9)}, 0.45, 0.25);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].score, 0.9);
  EXPECT_EQ(nms({box(0, 0, 10, 10, 0, 0.9), box(0, 0, 10, 10, 1, 0.8)}, 0.45, 0.25).size(), 2u);
  EXPECT_TRUE(nms({box(0, 0, 10, 10, 0, 0.2)}, 0.45, 0.25).empty());
}

TEST(Nms, TiesOrderByClassThenInput) {
  auto kept = nms({box(0, 0, 1, 1, 2, 0.5), box(5, 5, 6, 6, 1, 0.5), box(9, 9, 10, 10, 1, 0.5)},
                  0.45, 0.0);
  ASSERT_EQ(kept.size(), 3u);
  EXPECT_EQ(kept[0].class_id, 1);
  EXPECT_EQ(kept[0].cx, 5.5);
  EXPECT_EQ(kept[1].cx, 9.5);
  EXPECT_EQ(kept[2].class_id, 2);
}

TEST(NmsProperty, KeptBoxesAreSeparatedAndSorted) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 50);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DetBox> dets;
    for (int i = 0; i < 30; ++i) {
      const double x = u(rng), y = u(rng);
      dets.push_back(box(x, y, x + 5 + u(rng) / 5, y + 5 + u(rng) / 5, static_cast<int>(rng() % 2),
                         u(rng) / 50));
    }
    auto kept = nms(dets, 0.45, 0.25);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      EXPECT_GE(kept[i].score, 0.25);
      if (i) EXPECT_GE(kept[i - 1].score, kept[i].score);
      for (std::size_t j = 0; j < i; ++j) {
        if (kept[i].class_id == kept[j].class_id) EXPECT_LE(iou(kept[i], kept[j]), 0.45);
      }
    }
    // Every dropped box above threshold overlaps some kept one of its class.
    for (const auto& d : dets) {
      if (d.score < 0.25) continue;
      bool covered = false;
      for (const auto& k : kept) {
        covered |= k.class_id == d.class_id && (iou(k, d) > 0.45 || (k.cx == d.cx && k.cy == d.cy));
      }
      EXPECT_TRUE(covered);
    }
    EXPECT_EQ(nms(kept, 0.45, 0.25).size(), kept.size());
  }
}

TEST(Match, Examples) {
  const std::vector<DetBox> gt{box(0, 0, 10, 10)};
  auto one = match_detections({box(0, 0, 10, 6, 0, 0.9)}, gt);  // IoU 0.6
  EXPECT_EQ(one.total.tp, 1u);
  EXPECT_EQ(one.total.fp, 0u);
  EXPECT_EQ(one.total.fn, 0u);
  auto two = match_detections({box(0, 0, 10, 9, 0, 0.9), box(0, 0, 10, 8, 0, 0.8)}, gt);
  EXPECT_TRUE(two.det_tp[0]);
  EXPECT_FALSE(two.det_tp[1]);
  EXPECT_EQ(two.total.fp, 1u);
  auto miss = match_detections({box(0, 0, 10, 4.9, 0, 0.9)}, gt);  // IoU 0.49
  EXPECT_EQ(miss.total.fp, 1u);
  EXPECT_EQ(miss.total.fn, 1u);
  auto wrong_class = match_detections({box(0, 0, 10, 10, 1, 0.9)}, gt);
  EXPECT_EQ(wrong_class.total.tp, 0u);
  ASSERT_GE(wrong_class.per_class.size(), 2u);
  EXPECT_EQ(wrong_class.per_class[1].fp, 1u);
  EXPECT_EQ(wrong_class.per_class[0].fn, 1u);
}

TEST(Match, PicksHighestIouGroundTruth) {
  auto r = match_detections({box(2, 0, 12, 10, 0, 0.9)}, {box(0, 0, 10, 10), box(3, 0, 13, 10)});
  EXPECT_FALSE(r.gt_matched[0]);
  EXPECT_TRUE(r.gt_matched[1]);
}

TEST(Prf, Examples) {
  auto a = precision_recall_f1({3, 1, 1});
  EXPECT_DOUBLE_EQ(a.precision, 0.75);
  EXPECT_DOUBLE_EQ(a.recall, 0.75);
  EXPECT_DOUBLE_EQ(a.f1, 0.75);
  auto z = precision_recall_f1({0, 0, 0});
  EXPECT_EQ(z.precision, 0);
  EXPECT_EQ(z.recall, 0);
  EXPECT_EQ(z.f1, 0);
  auto p = precision_recall_f1({4, 0, 0});
  EXPECT_EQ(p.f1, 1.0);
}

TEST(Ap, Examples) {
  EXPECT_DOUBLE_EQ(*average_precision({{0.9, true}}, 1), 1.0);
  EXPECT_NEAR(*average_precision({{0.9, true}, {0.8, false}, {0.7, true}}, 2), 0.5 + 0.5 * 2 / 3.0,
              1e-12);
  EXPECT_NEAR(*average_precision({{0.9, true}, {0.8, false}, {0.7, true}}, 2), 0.8333, 1e-4);
  EXPECT_EQ(*average_precision({{0.9, false}, {0.5, false}}, 3), 0.0);
  EXPECT_FALSE(average_precision({{0.9, false}}, 0));
  EXPECT_EQ(*average_precision({}, 2), 0.0);
}

TEST(ApProperty, AgreesWithThresholdSweepAndIgnoresScale) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 20);
    const int num_gt = 1 + static_cast<int>(rng() % 8);
    std::vector<RankedDet> dets;
    int tps = 0;
    for (int i = 0; i < n; ++i) {
      // Coarse scores so ties show up.
      const double s = static_cast<double>(rng() % 6) / 5.0 + 0.01;
      const bool tp = tps < num_gt && rng() % 2;
      tps += tp;
      dets.push_back({s, tp});
    }
    std::vector<RankedDet> sorted = dets;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const RankedDet& a, const RankedDet& b) { return a.score > b.score; });
    std::vector<double> scores;
    std::vector<bool> flags;
    for (auto& d : sorted) {
      scores.push_back(d.score);
      flags.push_back(d.tp);
    }
    const double want = testing::brute_force_ap(scores, flags, num_gt);
    const double got = *average_precision(dets, static_cast<std::size_t>(num_gt));
    ASSERT_NEAR(got, want, 1e-12) << "trial " << trial;
    auto scaled = dets;
    for (auto& d : scaled) d.score *= 37.5;
    ASSERT_NEAR(*average_precision(scaled, static_cast<std::size_t>(num_gt)), got, 1e-12);
    ASSERT_GE(got, 0.0);
    ASSERT_LE(got, 1.0);
  }
}

TEST(PrfProperty, MatchesCountingAtThreshold) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<DetBox> gts, dets;
    for (int g = 0; g < 4; ++g) gts.push_back(box(g * 20, 0, g * 20 + 10, 10));
    for (int d = 0; d < 6; ++d) {
      const int g = static_cast<int>(rng() % 5);  // 4 means a stray box
      const double jitter = 4 * u(rng);
      dets.push_back(box(g * 20 + jitter, 0, g * 20 + 10 + jitter, 10, 0, u(rng)));
    }
    std::sort(dets.begin(), dets.end(), [](auto& a, auto& b) { return a.score > b.score; });
    auto r = match_detections(dets, gts);
    // Independent count: greedy per GT column in score order.
    std::vector<bool> used(4, false);
    std::size_t tp = 0;
    for (const auto& d : dets) {
      int best = -1;
      double best_iou = 0.5;
      for (int g = 0; g < 4; ++g) {
        const double v = iou(d, gts[static_cast<std::size_t>(g)]);
        if (!used[static_cast<std::size_t>(g)] && v >= best_iou) {
          best_iou = v;
          best = g;
        }
      }
      if (best >= 0) {
        used[static_cast<std::size_t>(best)] = true;
        ++tp;
      }
    }
    EXPECT_EQ(r.total.tp, tp);
    EXPECT_EQ(r.total.fp, dets.size() - tp);
    EXPECT_EQ(r.total.fn, 4 - tp);
  }
}

const std::vector<std::string> kNames{"scratch", "crack", "wear"};

TEST(Report, GroundTruthAsDetectionsIsPerfect) {
  std::vector<std::vector<DetBox>> gts{{box(0, 0, 10, 10, 0), box(20, 20, 30, 40, 1)},
                                       {box(5, 5, 15, 15, 0)}};
  auto report = evaluate_detections(gts, gts, kNames);
  EXPECT_DOUBLE_EQ(report.map, 1.0);
  EXPECT_DOUBLE_EQ(report.overall.precision, 1.0);
  EXPECT_DOUBLE_EQ(report.overall.recall, 1.0);
  EXPECT_DOUBLE_EQ(report.overall.f1, 1.0);
  ASSERT_EQ(report.classes.size(), 3u);
  EXPECT_FALSE(report.classes[2].ap);  // wear has no ground truth
  EXPECT_FALSE(report.notes.empty());
  EXPECT_EQ(report.classes[0].num_gt, 2u);
}

TEST(Report, TableHasOneRowPerClassPlusOverall) {
  std::vector<std::vector<DetBox>> gts{{box(0, 0, 10, 10, 0)}};
  std::vector<std::vector<DetBox>> dets{{box(0, 0, 10, 10, 0, 0.9), box(50, 50, 60, 60, 1, 0.8)}};
  auto report = evaluate_detections(dets, gts, kNames);
  const std::string table = report.to_table();
  int lines = 0;
  std::size_t pos = 0;
  while (pos < table.size()) {
    const std::size_t end = table.find('\n', pos);
    if (table.compare(pos, 5, "note:") != 0) ++lines;
    pos = end + 1;
  }
  EXPECT_EQ(lines, 1 + 3 + 1);  // header, classes, overall
  EXPECT_NE(table.find("Overall"), std::string::npos);
  EXPECT_NE(table.find("mAP"), std::string::npos);
  const std::string json = report.to_json();
  EXPECT_NE(json.find("\"map\""), std::string::npos);
  EXPECT_DOUBLE_EQ(report.overall.precision, 0.5);
}

TEST(Report, ConfidenceThresholdSplitsPrfFromAp) {
  std::vector<std::vector<DetBox>> gts{{box(0, 0, 10, 10, 0)}};
  std::vector<std::vector<DetBox>> dets{{box(0, 0, 10, 10, 0, 0.1)}};
  auto report = evaluate_detections(dets, gts, kNames);
  EXPECT_DOUBLE_EQ(report.map, 1.0);            // ranked above ap_conf_thresh
  EXPECT_DOUBLE_EQ(report.overall.recall, 0.0);  // below conf_thresh 0.25
}

TEST(Report, MismatchedImageCountsAreErrors) {
  EXPECT_THROW(evaluate_detections({{}, {}}, {{}}, kNames), DimensionError);
  EXPECT_THROW(evaluate_detections({}, {}, kNames), ArgumentError);
  EXPECT_THROW(evaluate_detections({{}}, {{box(0, 0, 1, 1, 5)}}, kNames), ArgumentError);
}

TEST(Evaluate, ZeroWeightModelSmoke) {
  ModelConfig mc;
  mc.input_size = 64;
  mc.width = 4;
  mc.num_classes = 3;
  Detectorf model(mc);
  model.zero_weights();
  std::vector<Sample> samples(2);
  for (auto& s : samples) {
    s.image = Image(80, 60, 3, 90);
    s.records = {{0, 0.5, 0.5, 0.3, 0.3, std::nullopt}, {2, 0.2, 0.3, 0.1, 0.2, std::nullopt}};
  }
  auto report = evaluate(model, samples, kNames);
  EXPECT_TRUE(std::isfinite(report.map));
  EXPECT_LE(report.map, 0.1);
  EXPECT_EQ(report.classes.size(), 3u);
  EXPECT_THROW(evaluate(model, {}, kNames), ArgumentError);
}

}  // namespace
}  // namespace dylo
