// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "partmat/metrics.hpp"

#include <cmath>
#include <map>
#include <string>

#include "partmat/errors.hpp"

namespace partmat {

ConfusionAccumulator::ConfusionAccumulator(int32_t n_classes)
    : n_classes_(n_classes),
      tp_(static_cast<size_t>(n_classes), 0),
      fp_(static_cast<size_t>(n_classes), 0),
      fn_(static_cast<size_t>(n_classes), 0) {
  if (n_classes < 1) {
    throw InvalidArgument("ConfusionAccumulator: need at least one class");
  }
}

void ConfusionAccumulator::add(std::span<const int32_t> pred,
                               std::span<const int32_t> gt) {
  if (pred.size() != gt.size()) {
    throw InvalidArgument("ConfusionAccumulator: length mismatch");
  }
  for (size_t i = 0; i < pred.size(); ++i) {
    const int32_t p = pred[i];
    const int32_t g = gt[i];
    if (p < 0 || p >= n_classes_ || g < 0 || g >= n_classes_) {
      throw InvalidArgument("ConfusionAccumulator: label out of range at " +
                            std::to_string(i));
    }
    if (p == g) {
      tp_[static_cast<size_t>(p)] += 1;
    } else {
      fp_[static_cast<size_t>(p)] += 1;
      fn_[static_cast<size_t>(g)] += 1;
    }
  }
}

void ConfusionAccumulator::merge(const ConfusionAccumulator& other) {
  if (other.n_classes_ != n_classes_) {
    throw InvalidArgument("ConfusionAccumulator: class count mismatch");
  }
  for (size_t c = 0; c < tp_.size(); ++c) {
    tp_[c] += other.tp_[c];
    fp_[c] += other.fp_[c];
    fn_[c] += other.fn_[c];
  }
}

double pointwise_accuracy(std::span<const int32_t> pred,
                          std::span<const int32_t> gt) {
  if (pred.size() != gt.size()) {
    throw InvalidArgument("pointwise_accuracy: length mismatch");
  }
  if (pred.empty()) {
    throw InvalidArgument("pointwise_accuracy: empty input");
  }
  size_t hits = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == gt[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double class_average_accuracy(std::span<const int32_t> pred,
                              std::span<const int32_t> gt, int32_t n_classes) {
  if (pred.size() != gt.size()) {
    throw InvalidArgument("class_average_accuracy: length mismatch");
  }
  std::vector<int64_t> hits(static_cast<size_t>(n_classes), 0);
  std::vector<int64_t> totals(static_cast<size_t>(n_classes), 0);
  for (size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] < 0 || gt[i] >= n_classes || pred[i] < 0 ||
        pred[i] >= n_classes) {
      throw InvalidArgument("class_average_accuracy: label out of range");
    }
    totals[static_cast<size_t>(gt[i])] += 1;
    if (pred[i] == gt[i]) hits[static_cast<size_t>(gt[i])] += 1;
  }
  double sum = 0.0;
  int32_t present = 0;
  for (int32_t c = 0; c < n_classes; ++c) {
    if (totals[static_cast<size_t>(c)] > 0) {
      sum += static_cast<double>(hits[static_cast<size_t>(c)]) /
             static_cast<double>(totals[static_cast<size_t>(c)]);
      ++present;
    }
  }
  if (present == 0) {
    throw InvalidArgument("class_average_accuracy: no class present in gt");
  }
  return sum / static_cast<double>(present);
}

MiouResult miou(const ConfusionAccumulator& acc) {
  MiouResult result;
  result.per_class.assign(static_cast<size_t>(acc.n_classes()), 0.0);
  result.defined.assign(static_cast<size_t>(acc.n_classes()), false);
  double sum = 0.0;
  int32_t defined = 0;
  for (int32_t c = 0; c < acc.n_classes(); ++c) {
    const int64_t union_count = acc.tp(c) + acc.fp(c) + acc.fn(c);
    if (union_count == 0) continue;
    const double iou =
        static_cast<double>(acc.tp(c)) / static_cast<double>(union_count);
    result.per_class[static_cast<size_t>(c)] = iou;
    result.defined[static_cast<size_t>(c)] = true;
    sum += iou;
    ++defined;
  }
  if (defined == 0) {
    throw InvalidArgument("miou: every class has zero union");
  }
  result.mean = sum / static_cast<double>(defined);
  return result;
}

HubnessStats hubness_stats(const Eigen::VectorXd& pref) {
  HubnessStats stats;
  const Eigen::Index c = pref.size();
  if (c == 0) throw InvalidArgument("hubness_stats: empty preference");
  const double mean = pref.mean();
  stats.variance = (pref.array() - mean).square().sum() /
                   static_cast<double>(c);
  stats.max_pref = pref.maxCoeff();
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < c; ++i) {
    const double p = pref[i];
    if (p > 0.0) entropy -= p * std::log(p);
  }
  stats.entropy = entropy;
  return stats;
}

GCRResult gcr_evaluate(std::span<const ShapePrediction> predictions,
                       std::span<const LabeledShape> ground_truth,
                       double iou_threshold) {
  if (predictions.size() != ground_truth.size()) {
    throw InvalidArgument("gcr_evaluate: prediction/gt count mismatch");
  }
  if (predictions.empty()) {
    throw InvalidArgument("gcr_evaluate: empty evaluation set");
  }
  if (!(iou_threshold > 0.0) || iou_threshold > 1.0) {
    throw InvalidArgument("gcr_evaluate: iou_threshold must be in (0, 1]");
  }

  double shape_hits = 0.0;
  double value_sum = 0.0;
  double value_all_sum = 0.0;
  double grounded_sum = 0.0;
  double grounded_all_sum = 0.0;

  for (size_t s = 0; s < ground_truth.size(); ++s) {
    const LabeledShape& gt = ground_truth[s];
    const ShapePrediction& pred = predictions[s];
    const size_t n = gt.part_labels.size();
    if (n == 0) {
      throw InvalidArgument("gcr_evaluate: shape " + std::to_string(s) +
                            " has zero ground-truth parts");
    }
    if (pred.part_labels.size() != n || pred.material_labels.size() != n) {
      throw InvalidArgument("gcr_evaluate: shape " + std::to_string(s) +
                            " prediction point count mismatch");
    }

    // Per GT part: point count, GT material votes, predicted material votes
    // over GT points, and intersection with the predicted mask.
    struct PartStats {
      int64_t gt_points = 0;
      int64_t intersection = 0;
      std::map<int32_t, int64_t> gt_material_votes;
      std::map<int32_t, int64_t> pred_material_votes;
    };
    std::map<int32_t, PartStats> parts;
    std::map<int32_t, int64_t> pred_mask_sizes;
    for (size_t i = 0; i < n; ++i) {
      const int32_t q = gt.part_labels[i];
      PartStats& st = parts[q];
      st.gt_points += 1;
      st.gt_material_votes[gt.material_labels[i]] += 1;
      st.pred_material_votes[pred.material_labels[i]] += 1;
      if (pred.part_labels[i] == q) st.intersection += 1;
      pred_mask_sizes[pred.part_labels[i]] += 1;
    }

    const auto majority = [](const std::map<int32_t, int64_t>& votes) {
      int32_t best_id = -1;
      int64_t best_count = -1;
      for (const auto& [id, count] : votes) {  // ascending id, ties keep first
        if (count > best_count) {
          best_id = id;
          best_count = count;
        }
      }
      return best_id;
    };

    int64_t total_pairs = 0;
    int64_t value_correct = 0;
    int64_t grounded_correct = 0;
    for (const auto& [q, st] : parts) {
      ++total_pairs;
      const int32_t gt_material = majority(st.gt_material_votes);
      const int32_t pred_material = majority(st.pred_material_votes);
      const bool value_ok = pred_material == gt_material;

      const int64_t pred_size =
          pred_mask_sizes.count(q) ? pred_mask_sizes.at(q) : 0;
      const int64_t union_size = st.gt_points + pred_size - st.intersection;
      const double iou = union_size > 0 ? static_cast<double>(st.intersection) /
                                              static_cast<double>(union_size)
                                        : 0.0;
      const bool grounded_ok = value_ok && iou >= iou_threshold;
      if (value_ok) ++value_correct;
      if (grounded_ok) ++grounded_correct;
    }

    shape_hits += pred.shape_class == gt.shape_class ? 1.0 : 0.0;
    value_sum += static_cast<double>(value_correct) /
                 static_cast<double>(total_pairs);
    value_all_sum += value_correct == total_pairs ? 1.0 : 0.0;
    grounded_sum += static_cast<double>(grounded_correct) /
                    static_cast<double>(total_pairs);
    grounded_all_sum += grounded_correct == total_pairs ? 1.0 : 0.0;
  }

  const double m = static_cast<double>(ground_truth.size());
  return GCRResult{shape_hits / m, value_sum / m, value_all_sum / m,
                   grounded_sum / m, grounded_all_sum / m};
}

}  // namespace partmat
