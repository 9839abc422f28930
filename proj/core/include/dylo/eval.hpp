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
#include <string>
#include <vector>

#include "dylo/box.hpp"
#include "dylo/dataset.hpp"
#include "dylo/model.hpp"

namespace dylo {

struct EvalConfig {
  double match_iou = 0.5;
  double nms_iou = 0.45;
  double conf_thresh = 0.25;   // detections counted for precision / recall / F1
  double ap_conf_thresh = 0.001;  // detections kept for ranking in AP
};

// Class-aware greedy suppression. Sorted by score, then lower class id, then
// input order.
std::vector<DetBox> nms(const std::vector<DetBox>& dets, double iou_thresh, double conf_thresh);

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

struct MatchResult {
  std::vector<bool> det_tp;      // parallel to the detections
  std::vector<bool> gt_matched;  // parallel to the ground truths
  std::vector<Counts> per_class;  // indexed by class id, sized to cover all ids seen
  Counts total;
};

// Detections must be sorted by score, highest first. Each one takes the
// unmatched same-class ground truth of highest IoU >= iou_thresh.
MatchResult match_detections(const std::vector<DetBox>& dets, const std::vector<DetBox>& gts,
                             double iou_thresh = 0.5);

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

Prf precision_recall_f1(const Counts& counts);

struct RankedDet {
  double score = 0;
  bool tp = false;
};

// All-points interpolated area under the precision envelope. Tied scores are
// ranked as one group. nullopt when num_gt is 0.
std::optional<double> average_precision(std::vector<RankedDet> dets, std::size_t num_gt);

struct ClassMetrics {
  std::string name;
  Counts counts;
  Prf prf;
  std::optional<double> ap;  // nullopt: no ground truth for the class
  std::size_t num_gt = 0;
};

struct MetricsReport {
  std::vector<ClassMetrics> classes;
  Counts total;
  Prf overall;  // micro-averaged over counts
  double map = 0;  // macro mean over classes with ground truth
  std::vector<std::string> notes;

  std::string to_table() const;
  std::string to_json() const;
};

// Per-image detections (already post-processed) against per-image ground
// truth, both in one pixel frame.
MetricsReport evaluate_detections(const std::vector<std::vector<DetBox>>& dets,
                                  const std::vector<std::vector<DetBox>>& gts,
                                  const std::vector<std::string>& class_names,
                                  const EvalConfig& config = {});

// Forward + decode + NMS over network-ready inputs.
std::vector<DetBox> detect(const Detectorf& model, const Tensorf& input, const EvalConfig& config,
                           double conf_thresh);

MetricsReport evaluate(const Detectorf& model, const std::vector<Sample>& samples,
                       const std::vector<std::string>& class_names, const EvalConfig& config = {});

}  // namespace dylo
