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


#include "dylo/taxonomy.hpp"

#include <algorithm>

namespace dylo {

namespace {

constexpr std::array<std::string_view, 3> kPartNames{"bearing", "gear", "bolt"};
constexpr std::array<std::string_view, 7> kDefectNames{
    "scratch", "crack", "wear", "broken_tooth", "burr", "deformation", "rust"};
constexpr std::array<std::string_view, 3> kSeverityNames{"minor", "moderate", "severe"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view name) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<E>(i);
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(PartKind kind) { return kPartNames.at(static_cast<std::size_t>(kind)); }
std::string_view to_string(DefectType type) {
  return kDefectNames.at(static_cast<std::size_t>(type));
}
std::string_view to_string(Severity severity) {
  return kSeverityNames.at(static_cast<std::size_t>(severity));
}

std::optional<PartKind> parse_part(std::string_view name) {
  return lookup<PartKind>(kPartNames, name);
}
std::optional<DefectType> parse_defect(std::string_view name) {
  return lookup<DefectType>(kDefectNames, name);
}
std::optional<Severity> parse_severity(std::string_view name) {
  return lookup<Severity>(kSeverityNames, name);
}

char severity_token(Severity severity) {
  switch (severity) {
    case Severity::minor:
      return 'm';
    case Severity::moderate:
      return 'd';
    case Severity::severe:
      return 's';
  }
  return '?';
}

std::optional<Severity> severity_from_token(char c) {
  switch (c) {
    case 'm':
      return Severity::minor;
    case 'd':
      return Severity::moderate;
    case 's':
      return Severity::severe;
    default:
      return std::nullopt;
  }
}

std::array<DefectType, 3> defects_for(PartKind kind) {
  switch (kind) {
    case PartKind::bearing:
      return {DefectType::scratch, DefectType::crack, DefectType::wear};
    case PartKind::gear:
      return {DefectType::broken_tooth, DefectType::burr, DefectType::wear};
    case PartKind::bolt:
      return {DefectType::deformation, DefectType::crack, DefectType::rust};
  }
  return {};
}

bool compatible(PartKind kind, DefectType type) {
  const auto allowed = defects_for(kind);
  return std::find(allowed.begin(), allowed.end(), type) != allowed.end();
}

}  // namespace dylo
