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


#include "dylo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "dylo/errors.hpp"

namespace dylo {

using nlohmann::json;

std::string_view to_string(Split split) { return split == Split::train ? "train" : "test"; }

std::size_t DatasetManifest::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [&](const ManifestEntry& e) { return e.split == split; }));
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
  if (!obj.is_object()) throw DataError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; })) {
      throw DataError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

const json& need(const json& obj, const char* key, const char* where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string(where) + ": missing '" + key + "'");
  return *it;
}

std::string need_string(const json& obj, const char* key, const char* where) {
  const json& v = need(obj, key, where);
  if (!v.is_string()) throw DataError(std::string(where) + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

DefectType need_defect(const std::string& name, const char* where) {
  const auto t = parse_defect(name);
  if (!t) throw DataError(std::string(where) + ": unknown defect type '" + name + "'");
  return *t;
}

}  // namespace

std::string manifest_to_json(const DatasetManifest& m) {
  json types = json::array();
  for (DefectType t : m.strategy.types()) types.push_back(std::string(to_string(t)));
  json entries = json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"image", e.image.generic_string()},
                       {"annotation", e.annotation.generic_string()},
                       {"part", std::string(to_string(e.part))},
                       {"dominant", e.dominant ? json(std::string(to_string(*e.dominant))) : json()},
                       {"split", std::string(to_string(e.split))}});
  }
  json doc = {{"format", "dylo-manifest"},
              {"version", 1},
              {"strategy", {{"kind", std::string(to_string(m.strategy.kind()))}, {"types", types}}},
              {"class_names", m.class_names},
              {"entries", entries}};
  return doc.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text, const std::filesystem::path& root) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("manifest: invalid JSON: ") + e.what());
  }
  check_keys(doc, {"format", "version", "strategy", "class_names", "entries"}, "manifest");
  if (need_string(doc, "format", "manifest") != "dylo-manifest") {
    throw DataError("manifest: format must be 'dylo-manifest'");
  }
  const json& version = need(doc, "version", "manifest");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    throw DataError("manifest: unsupported version");
  }

  const json& sj = need(doc, "strategy", "manifest");
  check_keys(sj, {"kind", "types"}, "manifest.strategy");
  const auto kind = parse_strategy(need_string(sj, "kind", "manifest.strategy"));
  if (!kind) throw DataError("manifest.strategy: unknown kind");
  const json& tj = need(sj, "types", "manifest.strategy");
  if (!tj.is_array()) throw DataError("manifest.strategy: 'types' must be an array");
  std::vector<DefectType> types;
  for (const auto& t : tj) {
    if (!t.is_string()) throw DataError("manifest.strategy: type names must be strings");
    types.push_back(need_defect(t.get<std::string>(), "manifest.strategy"));
  }

  DatasetManifest m;
  m.root = root;
  try {
    m.strategy = LabelStrategy(*kind, types);
  } catch (const StrategyError& e) {
    throw DataError(std::string("manifest.strategy: ") + e.what());
  }
  const json& names = need(doc, "class_names", "manifest");
  if (!names.is_array()) throw DataError("manifest: 'class_names' must be an array");
  for (const auto& n : names) {
    if (!n.is_string()) throw DataError("manifest: class names must be strings");
    m.class_names.push_back(n.get<std::string>());
  }
  if (static_cast<int>(m.class_names.size()) != m.strategy.num_classes()) {
    throw DataError("manifest: " + std::to_string(m.class_names.size()) +
                    " class names for a strategy with " +
                    std::to_string(m.strategy.num_classes()) + " classes");
  }

  const json& ej = need(doc, "entries", "manifest");
  if (!ej.is_array()) throw DataError("manifest: 'entries' must be an array");
  for (const auto& e : ej) {
    check_keys(e, {"image", "annotation", "part", "dominant", "split"}, "manifest entry");
    ManifestEntry entry;
    entry.image = need_string(e, "image", "manifest entry");
    entry.annotation = need_string(e, "annotation", "manifest entry");
    const auto part = parse_part(need_string(e, "part", "manifest entry"));
    if (!part) throw DataError("manifest entry: unknown part kind");
    entry.part = *part;
    if (const auto it = e.find("dominant"); it != e.end() && !it->is_null()) {
      if (!it->is_string()) throw DataError("manifest entry: 'dominant' must be a string or null");
      entry.dominant = need_defect(it->get<std::string>(), "manifest entry");
    }
    const std::string split = need_string(e, "split", "manifest entry");
    if (split == "train") {
      entry.split = Split::train;
    } else if (split == "test") {
      entry.split = Split::test;
    } else {
      throw DataError("manifest entry: split must be 'train' or 'test'");
    }
    m.entries.push_back(std::move(entry));
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return manifest_from_json(std::string(bytes.begin(), bytes.end()), path.parent_path());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  write_text(path, manifest_to_json(manifest));
}

DatasetManifest split_dataset(const DatasetManifest& manifest, double ratio, std::uint64_t seed) {
  if (manifest.entries.empty()) throw ArgumentError("split_dataset: empty manifest");
  if (!(ratio > 0 && ratio < 1)) throw ArgumentError("split_dataset: ratio must lie in (0, 1)");

  std::map<std::pair<int, int>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    strata[{static_cast<int>(e.part), e.dominant ? static_cast<int>(*e.dominant) : -1}].push_back(i);
  }

  struct Quota {
    std::vector<std::size_t>* items;
    std::size_t train;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (auto& [key, items] : strata) {
    const double q = ratio * static_cast<double>(items.size());
    const auto base = static_cast<std::size_t>(std::floor(q + 1e-9));
    quotas.push_back({&items, base, q - static_cast<double>(base)});
    assigned += base;
  }
  const auto target =
      static_cast<std::size_t>(std::llround(ratio * static_cast<double>(manifest.entries.size())));
  std::vector<std::size_t> order(quotas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a].remainder > quotas[b].remainder;
  });
  for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
    auto& q = quotas[order[k]];
    if (q.remainder > 1e-9 && q.train < q.items->size()) {
      ++q.train;
      ++assigned;
    }
  }

  DatasetManifest out = manifest;
  std::mt19937_64 rng(seed);
  for (auto& q : quotas) {
    std::vector<std::size_t> items = *q.items;
    std::shuffle(items.begin(), items.end(), rng);
    for (std::size_t k = 0; k < items.size(); ++k) {
      out.entries[items[k]].split = k < q.train ? Split::train : Split::test;
    }
  }
  return out;
}

std::vector<Sample> load_samples(const DatasetManifest& manifest, Split split) {
  std::vector<Sample> out;
  for (const auto& e : manifest.entries) {
    if (e.split != split) continue;
    Sample s;
    s.image = read_pnm(manifest.image_path(e));
    s.records =
        apply_label_strategy(read_annotations(manifest.annotation_path(e)), manifest.strategy);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace dylo
