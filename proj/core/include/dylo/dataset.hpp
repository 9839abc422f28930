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
#include <optional>
#include <string>
#include <vector>

#include "dylo/annotation.hpp"
#include "dylo/image.hpp"
#include "dylo/taxonomy.hpp"

namespace dylo {

enum class Split { train, test };

std::string_view to_string(Split split);

struct ManifestEntry {
  std::filesystem::path image;
  std::filesystem::path annotation;  // empty file = defect-free image
  PartKind part = PartKind::bearing;
  std::optional<DefectType> dominant;  // stratification key; nullopt = defect-free
  Split split = Split::train;

  bool operator==(const ManifestEntry&) const = default;
};

/// Entry paths are stored relative to the manifest file and resolved against
/// `root` on load.
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
  LabelStrategy strategy;
  std::vector<std::string> class_names;

  std::size_t count(Split split) const;
  std::filesystem::path image_path(const ManifestEntry& e) const { return root / e.image; }
  std::filesystem::path annotation_path(const ManifestEntry& e) const {
    return root / e.annotation;
  }
};

// JSON round trip. Unknown keys, missing fields and bad enum names raise
// DataError; a class_names list that disagrees with the strategy is an error.
std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text, const std::filesystem::path& root);
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Stratified split keyed by (part, dominant type). Each stratum is shuffled
/// with a seeded engine and gives round(ratio * n) items to train, adjusted by
/// largest remainder so the global train count is round(ratio * total) while
/// no stratum moves by more than one item from ratio * n.
DatasetManifest split_dataset(const DatasetManifest& manifest, double ratio, std::uint64_t seed);

/// One loaded image with its records remapped to model classes.
struct Sample {
  Image image;
  std::vector<AnnotationRecord> records;
};

std::vector<Sample> load_samples(const DatasetManifest& manifest, Split split);

}  // namespace dylo
