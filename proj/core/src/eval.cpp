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


#include "dylo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <nlohmann/json.hpp>

#include "dylo/errors.hpp"
#include "dylo/preprocess.hpp"

namespace dylo {

namespace {

// Stable descending order by score, lower class id first on ties.
std::vector<std::size_t> rank_order(const std::vector<DetBox>& dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    return dets[a].class_id < dets[b].class_id;
  });
  return order;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

std::vector<DetBox> nms(const std::vector<DetBox>& dets, double iou_thresh, double conf_thresh) {
  if (!(iou_thresh >= 0 && iou_thresh <= 1) || !(conf_thresh >= 0 && conf_thresh <= 1)) {
    throw ArgumentError("nms: thresholds must lie in [0, 1]");
  }
  std::vector<DetBox> kept;
  for (std::size_t i : rank_order(dets)) {
    const DetBox& d = dets[i];
    if (d.score < conf_thresh) continue;
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const DetBox& k) {
      return k.class_id == d.class_id && iou(k, d) > iou_thresh;
    });
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

MatchResult match_detections(const std::vector<DetBox>& dets, const std::vector<DetBox>& gts,
                             double iou_thresh) {
  MatchResult r;
  r.det_tp.assign(dets.size(), false);
  r.gt_matched.assign(gts.size(), false);
  int max_class = -1;
  for (const auto& d : dets) max_class = std::max(max_class, d.class_id);
  for (const auto& g : gts) max_class = std::max(max_class, g.class_id);
  r.per_class.resize(static_cast<std::size_t>(max_class + 1));

  for (std::size_t i = 0; i < dets.size(); ++i) {
    double best = -1;
    std::size_t best_j = gts.size();
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (r.gt_matched[j] || gts[j].class_id != dets[i].class_id) continue;
      const double v = iou(dets[i], gts[j]);
      if (v >= iou_thresh && v > best) {
        best = v;
        best_j = j;
      }
    }
    auto& c = r.per_class[static_cast<std::size_t>(dets[i].class_id)];
    if (best_j < gts.size()) {
      r.gt_matched[best_j] = true;
      r.det_tp[i] = true;
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  for (std::size_t j = 0; j < gts.size(); ++j) {
    if (!r.gt_matched[j]) ++r.per_class[static_cast<std::size_t>(gts[j].class_id)].fn;
  }
  for (const auto& c : r.per_class) r.total += c;
  return r;
}

Prf precision_recall_f1(const Counts& c) {
  Prf p;
  if (c.tp + c.fp > 0) p.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) p.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (p.precision + p.recall > 0) {
    p.f1 = 2 * p.precision * p.recall / (p.precision + p.recall);
  }
  return p;
}

std::optional<double> average_precision(std::vector<RankedDet> dets, std::size_t num_gt) {
  if (num_gt == 0) return std::nullopt;
  std::stable_sort(dets.begin(), dets.end(),
                   [](const RankedDet& a, const RankedDet& b) { return a.score > b.score; });
  // One (recall, precision) point per distinct score.
  std::vector<double> recall, precision;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    tp += dets[i].tp ? 1 : 0;
    if (i + 1 < dets.size() && dets[i + 1].score == dets[i].score) continue;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
  }
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0, prev_r = 0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    ap += (recall[i] - prev_r) * precision[i];
    prev_r = recall[i];
  }
  return ap;
}

MetricsReport evaluate_detections(const std::vector<std::vector<DetBox>>& dets,
                                  const std::vector<std::vector<DetBox>>& gts,
                                  const std::vector<std::string>& class_names,
                                  const EvalConfig& config) {
  if (dets.size() != gts.size()) {
    throw DimensionError("evaluate: " + std::to_string(dets.size()) + " detection lists for " +
                         std::to_string(gts.size()) + " images");
  }
  if (gts.empty()) throw ArgumentError("evaluate: no images");
  const std::size_t C = class_names.size();
  MetricsReport rep;
  rep.classes.resize(C);
  std::vector<std::vector<RankedDet>> ranked(C);
  for (std::size_t c = 0; c < C; ++c) rep.classes[c].name = class_names[c];

  for (std::size_t n = 0; n < gts.size(); ++n) {
    for (const auto& g : gts[n]) {
      if (g.class_id < 0 || static_cast<std::size_t>(g.class_id) >= C) {
        throw ArgumentError("evaluate: ground-truth class " + std::to_string(g.class_id) +
                            " outside the class table");
      }
      ++rep.classes[static_cast<std::size_t>(g.class_id)].num_gt;
    }
    std::vector<DetBox> sorted;
    for (std::size_t i : rank_order(dets[n])) {
      const DetBox& d = dets[n][i];
      if (d.class_id < 0 || static_cast<std::size_t>(d.class_id) >= C) {
        throw ArgumentError("evaluate: detection class outside the class table");
      }
      sorted.push_back(d);
    }
    const MatchResult m = match_detections(sorted, gts[n], config.match_iou);
    // The thresholded set is a prefix of the ranking, so greedy matches carry over.
    std::vector<std::size_t> tp_conf(C, 0);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const auto c = static_cast<std::size_t>(sorted[i].class_id);
      ranked[c].push_back({sorted[i].score, m.det_tp[i]});
      if (sorted[i].score >= config.conf_thresh) {
        if (m.det_tp[i]) {
          ++rep.classes[c].counts.tp;
          ++tp_conf[c];
        } else {
          ++rep.classes[c].counts.fp;
        }
      }
    }
    std::vector<std::size_t> gt_per_class(C, 0);
    for (const auto& g : gts[n]) ++gt_per_class[static_cast<std::size_t>(g.class_id)];
    for (std::size_t c = 0; c < C; ++c) rep.classes[c].counts.fn += gt_per_class[c] - tp_conf[c];
  }

  double ap_sum = 0;
  std::size_t ap_n = 0;
  for (std::size_t c = 0; c < C; ++c) {
    auto& cm = rep.classes[c];
    cm.prf = precision_recall_f1(cm.counts);
    cm.ap = average_precision(ranked[c], cm.num_gt);
    rep.total += cm.counts;
    if (cm.ap) {
      ap_sum += *cm.ap;
      ++ap_n;
    } else {
      rep.notes.push_back("class " + cm.name + " has no ground truth; excluded from mAP");
    }
  }
  rep.overall = precision_recall_f1(rep.total);
  rep.map = ap_n > 0 ? ap_sum / static_cast<double>(ap_n) : 0.0;
  return rep;
}

std::vector<DetBox> detect(const Detectorf& model, const Tensorf& input, const EvalConfig& config,
                           double conf_thresh) {
  NoGradScope<float> no_grad;
  const auto grids = model.forward(input);
  std::vector<DetBox> all;
  for (const auto& g : grids) {
    auto boxes = decode(g);
    all.insert(all.end(), boxes.begin(), boxes.end());
  }
  return nms(all, config.nms_iou, conf_thresh);
}

MetricsReport evaluate(const Detectorf& model, const std::vector<Sample>& samples,
                       const std::vector<std::string>& class_names, const EvalConfig& config) {
  if (samples.empty()) throw ArgumentError("evaluate: empty split");
  const ModelConfig& mc = model.config();
  std::vector<std::vector<DetBox>> dets, gts;
  for (const auto& s : samples) {
    dets.push_back(detect(model, preprocess(s.image, mc), config, config.ap_conf_thresh));
    gts.push_back(letterbox_boxes(s.records, s.image.width, s.image.height, mc.input_size));
  }
  return evaluate_detections(dets, gts, class_names, config);
}

std::string MetricsReport::to_table() const {
  std::size_t name_w = std::string("Defect Type").size();
  for (const auto& c : classes) name_w = std::max(name_w, c.name.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %9s  %9s  %9s  %9s\n", static_cast<int>(name_w),
                "Defect Type", "Precision", "Recall", "F1 Score", "mAP");
  out += buf;
  auto row = [&](const std::string& name, const Prf& p, std::optional<double> ap) {
    const std::string ap_s = ap ? ([&] {
      char b[32];
      std::snprintf(b, sizeof b, "%.4f", round4(*ap));
      return std::string(b);
    })()
                                : std::string("n/a");
    std::snprintf(buf, sizeof buf, "%-*s  %9.4f  %9.4f  %9.4f  %9s\n", static_cast<int>(name_w),
                  name.c_str(), round4(p.precision), round4(p.recall), round4(p.f1), ap_s.c_str());
    out += buf;
  };
  for (const auto& c : classes) row(c.name, c.prf, c.ap);
  row("Overall", overall, map);
  for (const auto& n : notes) out += "note: " + n + "\n";
  return out;
}

std::string MetricsReport::to_json() const {
  using nlohmann::json;
  json cls = json::array();
  for (const auto& c : classes) {
    cls.push_back({{"name", c.name},
                   {"precision", round4(c.prf.precision)},
                   {"recall", round4(c.prf.recall)},
                   {"f1", round4(c.prf.f1)},
                   {"ap", c.ap ? json(round4(*c.ap)) : json()},
                   {"tp", c.counts.tp},
                   {"fp", c.counts.fp},
                   {"fn", c.counts.fn},
                   {"num_gt", c.num_gt}});
  }
  json doc = {{"classes", cls},
              {"overall",
               {{"precision", round4(overall.precision)},
                {"recall", round4(overall.recall)},
                {"f1", round4(overall.f1)},
                {"map", round4(map)},
                {"tp", total.tp},
                {"fp", total.fp},
                {"fn", total.fn}}},
              {"notes", notes}};
  return doc.dump(2) + "\n";
}

}  // namespace dylo
