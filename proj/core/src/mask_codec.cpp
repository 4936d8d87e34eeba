// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "partmat/mask_codec.hpp"

#include <string>

#include "partmat/errors.hpp"

namespace partmat {

namespace {
constexpr uint32_t kPartBits = 11;
constexpr uint32_t kCoarseBits = 5;
constexpr uint32_t kFineBits = 7;
constexpr uint32_t kPartMax = (1u << kPartBits) - 1;
constexpr uint32_t kCoarseMax = (1u << kCoarseBits) - 1;
constexpr uint32_t kFineMax = (1u << kFineBits) - 1;
}  // namespace

MaskPixel pack_mask_pixel(uint32_t part_id, uint32_t coarse_material_id,
                          uint32_t fine_material_id) {
  if (part_id > kPartMax) {
    throw InvalidArgument("part_id " + std::to_string(part_id) +
                          " exceeds 11-bit range");
  }
  if (coarse_material_id > kCoarseMax) {
    throw InvalidArgument("coarse_material_id " +
                          std::to_string(coarse_material_id) +
                          " exceeds 5-bit range");
  }
  if (fine_material_id > kFineMax) {
    throw InvalidArgument("fine_material_id " +
                          std::to_string(fine_material_id) +
                          " exceeds 7-bit range");
  }
  const uint32_t word = part_id | (coarse_material_id << kPartBits) |
                        (fine_material_id << (kPartBits + kCoarseBits));
  return MaskPixel{static_cast<uint8_t>((word >> 16) & 0xff),
                   static_cast<uint8_t>((word >> 8) & 0xff),
                   static_cast<uint8_t>(word & 0xff)};
}

MaskIds unpack_mask_pixel(uint8_t r, uint8_t g, uint8_t b) {
  const uint32_t word = (static_cast<uint32_t>(r) << 16) |
                        (static_cast<uint32_t>(g) << 8) |
                        static_cast<uint32_t>(b);
  const uint32_t fine = word >> (kPartBits + kCoarseBits);
  if (fine > kFineMax) {
    throw InvalidArgument("invalid mask pixel: reserved bit set (decoded fine "
                          "material id " +
                          std::to_string(fine) + " >= 128)");
  }
  return MaskIds{word & kPartMax, (word >> kPartBits) & kCoarseMax, fine};
}

}  // namespace partmat
