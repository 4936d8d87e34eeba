// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared prediction and evaluation plumbing used by the trainer's validation
// pass, the gamma-ablation harness and the CLI evaluators.

#ifndef PARTMAT_EVALUATE_HPP_
#define PARTMAT_EVALUATE_HPP_

#include <span>
#include <vector>

#include "partmat/embedding.hpp"
#include "partmat/encoder.hpp"
#include "partmat/metrics.hpp"

namespace partmat {

/// Frozen class tables cast once to the working scalar.
template <typename S>
struct EvalTables {
  MatX<S> part;      // C_part x D, unit rows
  MatX<S> material;  // C_mat x D, unit rows
};

template <typename S>
EvalTables<S> make_eval_tables(const EmbeddingTable& part,
                               const EmbeddingTable& material);

/// Per-point labels from the nearest class embedding (argmax cosine) and the
/// shape class from the shape head.
template <typename S>
ShapePrediction predict_shape(const EncoderParams<S>& params,
                              const LabeledShape& shape,
                              const EvalTables<S>& tables, bool use_prior);

struct HeadEval {
  double instance_acc = 0.0;
  double class_avg_acc = 0.0;
  MiouResult miou;
  Eigen::VectorXd preference;  // mean predicted probability per class
  HubnessStats hubness;
};

struct SegEval {
  HeadEval part;
  HeadEval material;
  double shape_acc = 0.0;
};

template <typename S>
SegEval evaluate_segmentation(const EncoderParams<S>& params,
                              const Dataset& ds,
                              std::span<const int32_t> indices,
                              const EvalTables<S>& tables, double tau,
                              bool use_prior);

/// Part classes ranked by training-split point frequency (descending, ties to
/// the lower id) and cut into thirds. head/tail sizes are max(1, C/3).
struct FrequencyTerciles {
  std::vector<int32_t> head;
  std::vector<int32_t> mid;
  std::vector<int32_t> tail;
};

FrequencyTerciles part_frequency_terciles(
    const Dataset& ds, std::span<const int32_t> train_indices);

/// Mean per-class IoU restricted to `classes`, skipping classes with no
/// union in the evaluated set. Returns 0 when none is defined.
double mean_iou_over(const MiouResult& result,
                     std::span<const int32_t> classes);

}  // namespace partmat

#endif  // PARTMAT_EVALUATE_HPP_
