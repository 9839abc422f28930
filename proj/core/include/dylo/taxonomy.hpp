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
#include <optional>
#include <string>
#include <string_view>

namespace dylo {

enum class PartKind { bearing, gear, bolt };
enum class DefectType { scratch, crack, wear, broken_tooth, burr, deformation, rust };
enum class Severity { minor, moderate, severe };

inline constexpr int kNumDefectTypes = 7;
inline constexpr int kNumSeverities = 3;

inline constexpr std::array<PartKind, 3> kAllParts{PartKind::bearing, PartKind::gear,
                                                   PartKind::bolt};
inline constexpr std::array<DefectType, 7> kAllDefects{
    DefectType::scratch, DefectType::crack,       DefectType::wear, DefectType::broken_tooth,
    DefectType::burr,    DefectType::deformation, DefectType::rust};

std::string_view to_string(PartKind kind);
std::string_view to_string(DefectType type);
std::string_view to_string(Severity severity);

std::optional<PartKind> parse_part(std::string_view name);
std::optional<DefectType> parse_defect(std::string_view name);
std::optional<Severity> parse_severity(std::string_view name);

// One-letter annotation token: m, d, s.
char severity_token(Severity severity);
std::optional<Severity> severity_from_token(char c);

// Defects each part kind can carry.
std::array<DefectType, 3> defects_for(PartKind kind);
bool compatible(PartKind kind, DefectType type);

}  // namespace dylo
