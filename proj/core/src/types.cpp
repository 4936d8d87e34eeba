// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "partmat/types.hpp"

#include <cmath>
#include <string>

namespace partmat {

PointCloud normalize_cloud(const PointCloud& cloud) {
  const Eigen::Index n = cloud.size();
  if (n < 1) throw InvalidArgument("normalize_cloud: empty cloud");
  if (!cloud.coordinates.allFinite()) {
    throw InvalidArgument("normalize_cloud: non-finite coordinate");
  }

  PointCloud out;
  const Eigen::RowVector3d centroid = cloud.coordinates.colwise().mean();
  out.coordinates = cloud.coordinates.rowwise() - centroid;
  out.colors = cloud.colors;

  const double max_norm = out.coordinates.rowwise().norm().maxCoeff();
  if (max_norm > 0.0) out.coordinates /= max_norm;
  return out;
}

LabelVocabulary::LabelVocabulary(std::vector<std::string> names)
    : names_(std::move(names)) {
  if (names_.empty()) throw InvalidArgument("vocabulary must be non-empty");
  for (int32_t i = 0; i < size(); ++i) {
    if (names_[i].empty()) {
      throw InvalidArgument("vocabulary name at index " + std::to_string(i) +
                            " is empty");
    }
    if (!index_.emplace(names_[i], i).second) {
      throw InvalidArgument("duplicate vocabulary name '" + names_[i] + "'");
    }
  }
}

std::optional<int32_t> LabelVocabulary::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int32_t> Dataset::indices_of(Split split) const {
  std::vector<int32_t> out;
  for (size_t i = 0; i < shapes.size(); ++i) {
    if (split_of[i] == split) out.push_back(static_cast<int32_t>(i));
  }
  return out;
}

void validate_dataset(const Dataset& ds) {
  if (ds.split_of.size() != ds.shapes.size()) {
    throw InvalidArgument("dataset: split tags and shapes disagree in count");
  }
  for (size_t s = 0; s < ds.shapes.size(); ++s) {
    const LabeledShape& shape = ds.shapes[s];
    const size_t n = static_cast<size_t>(shape.cloud.size());
    if (n == 0) {
      throw InvalidArgument("dataset: shape " + std::to_string(s) +
                            " has no points");
    }
    if (shape.part_labels.size() != n || shape.material_labels.size() != n) {
      throw InvalidArgument("dataset: shape " + std::to_string(s) +
                            " label length disagrees with point count");
    }
    if (shape.shape_class < 0 || shape.shape_class >= ds.shape_vocab.size()) {
      throw InvalidArgument("dataset: shape " + std::to_string(s) +
                            " class id out of vocabulary range");
    }
    for (size_t i = 0; i < n; ++i) {
      if (shape.part_labels[i] < 0 ||
          shape.part_labels[i] >= ds.part_vocab.size()) {
        throw InvalidArgument("dataset: shape " + std::to_string(s) +
                              " part label out of vocabulary range");
      }
      if (shape.material_labels[i] < 0 ||
          shape.material_labels[i] >= ds.material_vocab.size()) {
        throw InvalidArgument("dataset: shape " + std::to_string(s) +
                              " material label out of vocabulary range");
      }
    }
  }
}

}  // namespace partmat
