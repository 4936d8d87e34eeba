// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "partmat/colormap.hpp"

#include <algorithm>

#include "partmat/errors.hpp"

namespace partmat {

const std::vector<ColorEntry>& color_palette() {
  static const std::vector<ColorEntry> palette = {
      {"red", {0.80, 0.12, 0.12}},    {"green", {0.15, 0.65, 0.20}},
      {"blue", {0.15, 0.25, 0.80}},   {"yellow", {0.90, 0.85, 0.15}},
      {"orange", {0.92, 0.55, 0.10}}, {"purple", {0.55, 0.20, 0.70}},
      {"brown", {0.50, 0.32, 0.15}},  {"black", {0.08, 0.08, 0.08}},
      {"white", {0.95, 0.95, 0.95}},  {"gray", {0.50, 0.50, 0.50}},
      {"pink", {0.95, 0.60, 0.70}},   {"cyan", {0.15, 0.75, 0.80}},
      {"olive", {0.45, 0.50, 0.15}},  {"navy", {0.10, 0.12, 0.40}},
      {"teal", {0.10, 0.45, 0.45}},   {"maroon", {0.45, 0.10, 0.15}},
  };
  return palette;
}

ColorMap ColorMap::for_materials(const LabelVocabulary& materials) {
  const auto& palette = color_palette();
  ColorMap map;
  map.materials_ = materials;
  map.entries_.reserve(materials.size());
  for (int32_t i = 0; i < materials.size(); ++i) {
    const ColorEntry& entry = palette[static_cast<size_t>(i) % palette.size()];
    map.entries_.push_back(entry);
    if (std::find(map.words_.begin(), map.words_.end(), entry.word) ==
        map.words_.end()) {
      map.words_.push_back(entry.word);
    }
  }
  return map;
}

const ColorEntry& ColorMap::color_of(std::string_view material_name) const {
  auto id = materials_.find(material_name);
  if (!id) {
    throw InvalidArgument("no color entry for material '" +
                          std::string(material_name) + "'");
  }
  return entries_[static_cast<size_t>(*id)];
}

const ColorEntry& ColorMap::color_of_id(int32_t material_id) const {
  return entries_.at(static_cast<size_t>(material_id));
}

bool ColorMap::has(std::string_view material_name) const {
  return materials_.find(material_name).has_value();
}

}  // namespace partmat
