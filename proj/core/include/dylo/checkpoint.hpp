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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dylo/model.hpp"

namespace dylo {

inline constexpr char kCheckpointMagic[4] = {'D', 'Y', 'L', 'O'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  int epoch = 0;
  double best_map = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> class_names;

  bool operator==(const CheckpointMeta&) const = default;
};

struct LoadedCheckpoint {
  CheckpointMeta meta;
  Detectorf model;
};

/// Little-endian layout: magic, u32 version, model config, metadata, a named
/// tensor table (name, rank, dims, f32 data) and a trailing CRC-32 of all
/// preceding bytes. See docs/checkpoint.md.
std::vector<std::uint8_t> encode_checkpoint(const Detectorf& model, const CheckpointMeta& meta);
// Fully validates before building the model; any defect raises
// CheckpointError naming the field.
LoadedCheckpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

// Writes to a sibling temp file, then renames over `path`.
void save_checkpoint(const Detectorf& model, const CheckpointMeta& meta,
                     const std::filesystem::path& path);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dylo
