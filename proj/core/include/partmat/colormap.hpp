// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARTMAT_COLORMAP_HPP_
#define PARTMAT_COLORMAP_HPP_

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "partmat/types.hpp"

namespace partmat {

struct ColorEntry {
  std::string word;            // color word used in captions
  std::array<double, 3> rgb;   // canonical point color, channels in [0, 1]
};

/// The fixed palette shipped with the artifact. Material i is assigned
/// palette entry i mod palette size, so adjacent material ids get distinct
/// colors and color is a genuine signal in both point colors and captions.
const std::vector<ColorEntry>& color_palette();

/// Material name -> color entry. Every material in the vocabulary it was
/// built from has an entry.
class ColorMap {
 public:
  static ColorMap for_materials(const LabelVocabulary& materials);

  const ColorEntry& color_of(std::string_view material_name) const;
  const ColorEntry& color_of_id(int32_t material_id) const;
  bool has(std::string_view material_name) const;

  /// Distinct color words in first-use order; the vocabulary for the color
  /// embedding table.
  const std::vector<std::string>& color_words() const { return words_; }

 private:
  LabelVocabulary materials_;
  std::vector<ColorEntry> entries_;  // parallel to materials_
  std::vector<std::string> words_;
};

}  // namespace partmat

#endif  // PARTMAT_COLORMAP_HPP_
