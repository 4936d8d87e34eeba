// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARTMAT_GENERATOR_HPP_
#define PARTMAT_GENERATOR_HPP_

#include <cstdint>
#include <vector>

#include "partmat/types.hpp"

namespace partmat {

/// Configuration for the synthetic long-tail dataset generator.
struct GeneratorConfig {
  int32_t n_shape_classes = 20;
  int32_t n_part_classes = 40;
  int32_t n_material_classes = 12;
  int32_t shapes_total = 1000;
  int32_t points_per_shape = 2048;
  double zipf_exponent = 1.5;  // 0 = uniform class frequencies
  uint64_t seed = 0;
  /// Material re-draws per geometry. Each extra composition re-samples the
  /// part materials (and point colors) on identical geometry and part labels.
  int32_t compositions_per_shape = 1;
};

/// Shape-class counts under count(rank r) proportional to r^(-exponent),
/// apportioned by largest remainder so the sequence is non-increasing in
/// rank. Throws InvalidArgument when some class would receive zero shapes.
std::vector<int32_t> zipf_class_counts(int32_t n_classes, double exponent,
                                       int32_t total);

/// Deterministic synthetic dataset: each shape class carries a fixed template
/// of 2-6 parts realized as geometric primitives; part frequencies and
/// per-part material choices are Zipf-weighted so low ids dominate. Point
/// colors carry the material's canonical color plus small uniform noise.
/// All shapes are tagged train; use split_dataset to assign splits.
Dataset generate_synthetic_dataset(const GeneratorConfig& cfg);

/// Stratified split by shape class: within each class the split sizes follow
/// the fractions by largest remainder and every non-empty class contributes
/// at least one shape to train. Deterministic given the seed.
Dataset split_dataset(Dataset ds, double train_frac, double valid_frac,
                      double test_frac, uint64_t seed);

}  // namespace partmat

#endif  // PARTMAT_GENERATOR_HPP_
