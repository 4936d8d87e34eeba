// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARTMAT_TYPES_HPP_
#define PARTMAT_TYPES_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "partmat/errors.hpp"

namespace partmat {

/// A colored point cloud. Coordinates are unitless; a normalized cloud has
/// zero centroid and max point norm 1. Colors are per-channel in [0, 1].
struct PointCloud {
  Eigen::MatrixX3d coordinates;  // N x 3
  Eigen::MatrixX3d colors;       // N x 3

  Eigen::Index size() const { return coordinates.rows(); }
};

/// Translates the cloud to a zero centroid and scales it so the farthest
/// point has norm 1. A degenerate cloud (all points coincident) is centered
/// but left unscaled. Colors pass through untouched.
PointCloud normalize_cloud(const PointCloud& cloud);

enum class Split : uint8_t { kTrain = 0, kValid = 1, kTest = 2 };

/// A point cloud with per-point part and material labels plus a shape-class
/// label; the unit of all training and evaluation.
struct LabeledShape {
  PointCloud cloud;
  std::vector<int32_t> part_labels;      // length N, values in [0, C_part)
  std::vector<int32_t> material_labels;  // length N, values in [0, C_mat)
  int32_t shape_class = 0;
};

/// Ordered list of unique class names; the index of a name is its label id.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  explicit LabelVocabulary(std::vector<std::string> names);

  int32_t size() const { return static_cast<int32_t>(names_.size()); }
  const std::string& name(int32_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<int32_t> find(std::string_view name) const;

  bool operator==(const LabelVocabulary&) const = default;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int32_t> index_;
};

struct Dataset {
  std::vector<LabeledShape> shapes;
  LabelVocabulary part_vocab;
  LabelVocabulary material_vocab;
  LabelVocabulary shape_vocab;
  std::vector<Split> split_of;  // parallel to shapes

  std::vector<int32_t> indices_of(Split split) const;
};

/// Validates label ranges, split-tag count and length agreement between
/// labels and points. Throws InvalidArgument on the first violation.
void validate_dataset(const Dataset& ds);

}  // namespace partmat

#endif  // PARTMAT_TYPES_HPP_
