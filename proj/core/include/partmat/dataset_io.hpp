// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary dataset format, little-endian.
//
//   magic "C3DS" | u16 version=1 | u32 shapes | u32 C_part | u32 C_mat |
//   u32 C_shape | 3 vocabularies (u32 count, then u16-length-prefixed names) |
//   per shape: u32 N | u8 split | u16 shape_class | N x 6 f32 (x,y,z,r,g,b) |
//   N x u16 part labels | N x u16 material labels

#ifndef PARTMAT_DATASET_IO_HPP_
#define PARTMAT_DATASET_IO_HPP_

#include <filesystem>

#include "partmat/types.hpp"

namespace partmat {

void save_dataset(const Dataset& ds, const std::filesystem::path& path);

/// Throws IoError with code kBadMagic / kBadVersion / kTruncated /
/// kLabelOutOfRange for the respective malformed inputs.
Dataset load_dataset(const std::filesystem::path& path);

/// Writes parts.json, materials.json and classes.json (plain JSON arrays of
/// names, index = label id) into `dir`.
void export_vocab_json(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace partmat

#endif  // PARTMAT_DATASET_IO_HPP_
