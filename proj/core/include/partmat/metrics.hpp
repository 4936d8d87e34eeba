// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARTMAT_METRICS_HPP_
#define PARTMAT_METRICS_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "partmat/types.hpp"

namespace partmat {

/// Per-class TP/FP/FN counts. Pure integer sums, so shard accumulation is
/// associative and commutative and merge order never matters.
class ConfusionAccumulator {
 public:
  explicit ConfusionAccumulator(int32_t n_classes);

  void add(std::span<const int32_t> pred, std::span<const int32_t> gt);
  void merge(const ConfusionAccumulator& other);

  int32_t n_classes() const { return n_classes_; }
  int64_t tp(int32_t c) const { return tp_[static_cast<size_t>(c)]; }
  int64_t fp(int32_t c) const { return fp_[static_cast<size_t>(c)]; }
  int64_t fn(int32_t c) const { return fn_[static_cast<size_t>(c)]; }

 private:
  int32_t n_classes_;
  std::vector<int64_t> tp_, fp_, fn_;
};

/// Fraction of exact matches.
double pointwise_accuracy(std::span<const int32_t> pred,
                          std::span<const int32_t> gt);

/// Mean per-class recall over classes present in the ground truth.
double class_average_accuracy(std::span<const int32_t> pred,
                              std::span<const int32_t> gt, int32_t n_classes);

struct MiouResult {
  std::vector<double> per_class;  // meaningful only where defined[c]
  std::vector<bool> defined;      // nonzero union in the evaluated set
  double mean = 0.0;              // over defined classes only
};

MiouResult miou(const ConfusionAccumulator& acc);

struct HubnessStats {
  double variance = 0.0;  // population variance of the preference entries
  double max_pref = 0.0;
  double entropy = 0.0;   // Shannon entropy, natural log
};

HubnessStats hubness_stats(const Eigen::VectorXd& pref);

struct ShapePrediction {
  int32_t shape_class = 0;
  std::vector<int32_t> part_labels;
  std::vector<int32_t> material_labels;
};

struct GCRResult {
  double shape_acc = 0.0;
  double value = 0.0;
  double value_all = 0.0;
  double grounded_value = 0.0;
  double grounded_value_all = 0.0;
};

/// Grounded compositional recognition over a prediction set.
///
/// Per shape, the ground-truth pair set holds (part category, majority GT
/// material) for every part present. The predicted material of a part is the
/// majority of predicted material labels over that part's GT points (ties to
/// the lowest material id). A pair is value-correct when the materials agree
/// and grounded-correct when additionally the predicted part mask reaches
/// the IoU threshold against the GT part mask. Shape accuracy, value and
/// value-all aggregate as means over shapes.
GCRResult gcr_evaluate(std::span<const ShapePrediction> predictions,
                       std::span<const LabeledShape> ground_truth,
                       double iou_threshold = 0.5);

}  // namespace partmat

#endif  // PARTMAT_METRICS_HPP_
