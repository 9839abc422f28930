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


#include "dylo/annotation.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "dylo/errors.hpp"
#include "dylo/image.hpp"

namespace dylo {

AnnotationRecord AnnotationRecord::from_corners(int class_id, double x1, double y1, double x2,
                                                double y2, std::optional<Severity> severity) {
  return AnnotationRecord{class_id, (x1 + x2) / 2, (y1 + y2) / 2, x2 - x1, y2 - y1, severity};
}

DetBox AnnotationRecord::to_pixels(int width, int height) const {
  return DetBox{cx * width, cy * height, w * width, h * height, class_id, 1.0};
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double to_double(std::string_view s, const char* field, int line_no) {
  // from_chars for double is missing in older libstdc++, so go through strtod.
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(v)) {
    throw ParseError(std::string("non-numeric ") + field + " '" + buf + "'", line_no);
  }
  return v;
}

}  // namespace

AnnotationRecord parse_annotation(std::string_view line, int line_no, int num_classes) {
  const auto f = split_ws(line);
  if (f.size() != 5 && f.size() != 6) {
    throw ParseError("expected 'class cx cy w h [severity]', got " + std::to_string(f.size()) +
                         " fields",
                     line_no);
  }
  int cls = 0;
  const auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), cls);
  if (ec != std::errc{} || ptr != f[0].data() + f[0].size()) {
    throw ParseError("non-numeric class id '" + std::string(f[0]) + "'", line_no);
  }
  if (cls < 0 || cls >= num_classes) {
    throw ParseError("unknown class id " + std::to_string(cls), line_no);
  }
  AnnotationRecord r;
  r.class_id = cls;
  r.cx = to_double(f[1], "cx", line_no);
  r.cy = to_double(f[2], "cy", line_no);
  r.w = to_double(f[3], "w", line_no);
  r.h = to_double(f[4], "h", line_no);
  if (r.cx < 0 || r.cx > 1 || r.cy < 0 || r.cy > 1) {
    throw ParseError("center outside [0, 1]", line_no);
  }
  if (r.w <= 0 || r.w > 1 || r.h <= 0 || r.h > 1) {
    throw ParseError("size outside (0, 1]", line_no);
  }
  const double x1 = r.x1(), y1 = r.y1(), x2 = r.x2(), y2 = r.y2();
  const double tol = kBoundsTolerance;
  if (x1 < -tol || y1 < -tol || x2 > 1 + tol || y2 > 1 + tol) {
    throw ParseError("box exceeds image bounds", line_no);
  }
  if (x1 < 0 || y1 < 0 || x2 > 1 || y2 > 1) {
    const auto sev = r.severity;
    r = AnnotationRecord::from_corners(cls, std::max(x1, 0.0), std::max(y1, 0.0),
                                       std::min(x2, 1.0), std::min(y2, 1.0), sev);
  }
  if (f.size() == 6) {
    const auto sev = f[5].size() == 1 ? severity_from_token(f[5][0]) : std::nullopt;
    if (!sev) throw ParseError("severity must be one of m, d, s", line_no);
    r.severity = sev;
  }
  return r;
}

std::vector<AnnotationRecord> parse_annotations(std::string_view text, int num_classes) {
  std::vector<AnnotationRecord> out;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    ++line_no;
    const std::string_view line = text.substr(start, end - start);
    if (!split_ws(line).empty()) out.push_back(parse_annotation(line, line_no, num_classes));
    start = end + 1;
  }
  return out;
}

std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path,
                                               int num_classes) {
  const auto bytes = read_file(path);
  try {
    return parse_annotations(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                              bytes.size()),
                             num_classes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::string format_annotation(const AnnotationRecord& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f", r.class_id, r.cx, r.cy, r.w, r.h);
  std::string s(buf);
  if (r.severity) {
    s += ' ';
    s += severity_token(*r.severity);
  }
  return s;
}

std::string format_annotations(const std::vector<AnnotationRecord>& records) {
  std::string out;
  for (const auto& r : records) out += format_annotation(r) + "\n";
  return out;
}

bool valid_record(const AnnotationRecord& r) {
  const double tol = kBoundsTolerance;
  return r.cx >= 0 && r.cx <= 1 && r.cy >= 0 && r.cy <= 1 && r.w > 0 && r.w <= 1 && r.h > 0 &&
         r.h <= 1 && r.x1() >= -tol && r.y1() >= -tol && r.x2() <= 1 + tol && r.y2() <= 1 + tol;
}

std::optional<DefectType> dominant_type(const std::vector<AnnotationRecord>& records) {
  if (records.empty()) return std::nullopt;
  std::array<int, kNumDefectTypes> counts{};
  for (const auto& r : records) {
    if (r.class_id >= 0 && r.class_id < kNumDefectTypes) ++counts[r.class_id];
  }
  const auto it = std::max_element(counts.begin(), counts.end());
  if (*it == 0) return std::nullopt;
  return static_cast<DefectType>(it - counts.begin());
}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::severity_based:
      return "severity_based";
    case StrategyKind::type_based:
      return "type_based";
    case StrategyKind::no_roi:
      return "no_roi";
  }
  return "";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) {
  for (auto k : {StrategyKind::severity_based, StrategyKind::type_based, StrategyKind::no_roi}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

LabelStrategy::LabelStrategy(StrategyKind kind, std::vector<DefectType> types)
    : kind_(kind), types_(std::move(types)) {
  if (types_.empty()) throw StrategyError("label strategy needs at least one defect type");
  std::set<DefectType> seen(types_.begin(), types_.end());
  if (seen.size() != types_.size()) throw StrategyError("label strategy lists a type twice");
}

int LabelStrategy::num_classes() const {
  const int n = static_cast<int>(types_.size());
  return kind_ == StrategyKind::severity_based ? n * kNumSeverities : n;
}

std::vector<std::string> LabelStrategy::class_names() const {
  std::vector<std::string> names;
  for (DefectType t : types_) {
    if (kind_ == StrategyKind::severity_based) {
      for (auto s : {Severity::minor, Severity::moderate, Severity::severe}) {
        names.push_back(std::string(to_string(t)) + "_" + std::string(to_string(s)));
      }
    } else {
      names.emplace_back(to_string(t));
    }
  }
  return names;
}

int LabelStrategy::type_index(DefectType type) const {
  const auto it = std::find(types_.begin(), types_.end(), type);
  if (it == types_.end()) {
    throw StrategyError("defect type " + std::string(to_string(type)) +
                        " is not in the class table");
  }
  return static_cast<int>(it - types_.begin());
}

int LabelStrategy::class_of(DefectType type, std::optional<Severity> severity) const {
  const int t = type_index(type);
  if (kind_ != StrategyKind::severity_based) return t;
  if (!severity) {
    throw StrategyError("severity_based labeling needs a severity on every " +
                        std::string(to_string(type)) + " box");
  }
  return t * kNumSeverities + static_cast<int>(*severity);
}

std::vector<AnnotationRecord> apply_label_strategy(const std::vector<AnnotationRecord>& records,
                                                   const LabelStrategy& strategy) {
  std::vector<AnnotationRecord> out;
  if (strategy.kind() == StrategyKind::no_roi) {
    std::set<int> classes;
    for (const auto& r : records) {
      if (r.class_id < 0 || r.class_id >= kNumDefectTypes) {
        throw StrategyError("record class " + std::to_string(r.class_id) + " is not a defect type");
      }
      classes.insert(strategy.class_of(static_cast<DefectType>(r.class_id), std::nullopt));
    }
    for (int c : classes) out.push_back(AnnotationRecord{c, 0.5, 0.5, 1.0, 1.0, std::nullopt});
    return out;
  }
  for (const auto& r : records) {
    if (r.class_id < 0 || r.class_id >= kNumDefectTypes) {
      throw StrategyError("record class " + std::to_string(r.class_id) + " is not a defect type");
    }
    AnnotationRecord m = r;
    m.class_id = strategy.class_of(static_cast<DefectType>(r.class_id), r.severity);
    if (strategy.kind() == StrategyKind::type_based) m.severity.reset();
    out.push_back(m);
  }
  return out;
}

}  // namespace dylo
