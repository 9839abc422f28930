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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dylo/box.hpp"
#include "dylo/taxonomy.hpp"

namespace dylo {

/// One box, normalized to the image: center and size in [0, 1].
/// On disk and out of the generator, class_id is the DefectType index;
/// apply_label_strategy remaps it to a model class.
struct AnnotationRecord {
  int class_id = 0;
  double cx = 0;
  double cy = 0;
  double w = 0;
  double h = 0;
  std::optional<Severity> severity;

  double x1() const { return cx - w / 2; }
  double y1() const { return cy - h / 2; }
  double x2() const { return cx + w / 2; }
  double y2() const { return cy + h / 2; }

  static AnnotationRecord from_corners(int class_id, double x1, double y1, double x2, double y2,
                                       std::optional<Severity> severity = std::nullopt);
  // Pixel box in a width x height image.
  DetBox to_pixels(int width, int height) const;

  bool operator==(const AnnotationRecord&) const = default;
};

inline constexpr double kBoundsTolerance = 1e-6;

// "class cx cy w h [m|d|s]". Corners may overshoot [0, 1] by the tolerance and
// are clamped; anything further is a ParseError carrying `line_no`.
AnnotationRecord parse_annotation(std::string_view line, int line_no = 1,
                                  int num_classes = kNumDefectTypes);
// Whole file body; blank lines are skipped, line numbers stay 1-based.
std::vector<AnnotationRecord> parse_annotations(std::string_view text,
                                                int num_classes = kNumDefectTypes);
std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path,
                                               int num_classes = kNumDefectTypes);
std::string format_annotation(const AnnotationRecord& record);
std::string format_annotations(const std::vector<AnnotationRecord>& records);

// True when the record meets the range invariants.
bool valid_record(const AnnotationRecord& record);

// Most frequent defect type (lowest index on ties); nullopt when empty.
std::optional<DefectType> dominant_type(const std::vector<AnnotationRecord>& records);

enum class StrategyKind { severity_based, type_based, no_roi };

std::string_view to_string(StrategyKind kind);
std::optional<StrategyKind> parse_strategy(std::string_view name);

/// Class table over an ordered list of defect types. severity_based gives
/// type_index * 3 + severity_index; the other two give type_index.
class LabelStrategy {
 public:
  LabelStrategy() = default;
  LabelStrategy(StrategyKind kind, std::vector<DefectType> types);

  StrategyKind kind() const { return kind_; }
  const std::vector<DefectType>& types() const { return types_; }
  int num_classes() const;
  std::vector<std::string> class_names() const;
  // Throws StrategyError for a type outside the table, or a missing severity
  // under severity_based.
  int class_of(DefectType type, std::optional<Severity> severity) const;

  bool operator==(const LabelStrategy&) const = default;

 private:
  int type_index(DefectType type) const;

  StrategyKind kind_ = StrategyKind::type_based;
  std::vector<DefectType> types_;
};

// Records carry DefectType indices in; model class ids come out. no_roi emits
// one full-image box per distinct type, ordered by class id.
std::vector<AnnotationRecord> apply_label_strategy(const std::vector<AnnotationRecord>& records,
                                                   const LabelStrategy& strategy);

}  // namespace dylo
