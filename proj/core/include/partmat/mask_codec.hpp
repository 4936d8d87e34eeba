// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0
//
// 24-bit segmentation-mask pixel codec. A pixel packs a part id (11 bits),
// a coarse material id (5 bits) and a fine material id (7 bits) into one RGB
// byte triple. Layout: part occupies bits 0-10, coarse material bits 11-15,
// fine material bits 16-22; bit 23 is reserved zero. R carries the most
// significant byte of the 24-bit word.

#ifndef PARTMAT_MASK_CODEC_HPP_
#define PARTMAT_MASK_CODEC_HPP_

#include <cstdint>

namespace partmat {

struct MaskPixel {
  uint8_t r;
  uint8_t g;
  uint8_t b;
};

struct MaskIds {
  uint32_t part_id;             // < 2^11
  uint32_t coarse_material_id;  // < 2^5
  uint32_t fine_material_id;    // < 2^7
};

/// Throws InvalidArgument when any id exceeds its bit range.
MaskPixel pack_mask_pixel(uint32_t part_id, uint32_t coarse_material_id,
                          uint32_t fine_material_id);

/// Exact inverse of pack_mask_pixel. Throws InvalidArgument when the reserved
/// bit is set (decoded fine material id >= 2^7).
MaskIds unpack_mask_pixel(uint8_t r, uint8_t g, uint8_t b);

}  // namespace partmat

#endif  // PARTMAT_MASK_CODEC_HPP_
