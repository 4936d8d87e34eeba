// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "partmat/evaluate.hpp"

#include <algorithm>

#include "partmat/losses.hpp"

namespace partmat {

template <typename S>
EvalTables<S> make_eval_tables(const EmbeddingTable& part,
                               const EmbeddingTable& material) {
  if (part.dim() != material.dim()) {
    throw InvalidArgument(
        "make_eval_tables: part/material embedding dims differ");
  }
  EvalTables<S> tables;
  tables.part = part.vectors.cast<S>();
  tables.material = material.vectors.cast<S>();
  return tables;
}

namespace {

template <typename S>
std::vector<int32_t> argmax_rows(const MatX<S>& scores) {
  std::vector<int32_t> out(static_cast<size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).maxCoeff(&best);
    out[static_cast<size_t>(i)] = static_cast<int32_t>(best);
  }
  return out;
}

}  // namespace

template <typename S>
ShapePrediction predict_shape(const EncoderParams<S>& params,
                              const LabeledShape& shape,
                              const EvalTables<S>& tables, bool use_prior) {
  const auto [output, cache] = forward(params, shape, use_prior);
  ShapePrediction pred;
  pred.part_labels =
      argmax_rows(MatX<S>(output.part_features * tables.part.transpose()));
  pred.material_labels = argmax_rows(
      MatX<S>(output.material_features * tables.material.transpose()));
  Eigen::Index best = 0;
  output.shape_logits.maxCoeff(&best);
  pred.shape_class = static_cast<int32_t>(best);
  return pred;
}

template <typename S>
SegEval evaluate_segmentation(const EncoderParams<S>& params,
                              const Dataset& ds,
                              std::span<const int32_t> indices,
                              const EvalTables<S>& tables, double tau,
                              bool use_prior) {
  if (indices.empty()) {
    throw InvalidArgument("evaluate_segmentation: no shapes to evaluate");
  }
  const int32_t c_part = static_cast<int32_t>(tables.part.rows());
  const int32_t c_mat = static_cast<int32_t>(tables.material.rows());

  std::vector<int32_t> part_pred_all, part_gt_all, mat_pred_all, mat_gt_all;
  ConfusionAccumulator part_acc(c_part);
  ConfusionAccumulator mat_acc(c_mat);
  Eigen::VectorXd part_pref_sum = Eigen::VectorXd::Zero(c_part);
  Eigen::VectorXd mat_pref_sum = Eigen::VectorXd::Zero(c_mat);
  int64_t total_points = 0;
  int64_t shape_hits = 0;

  for (int32_t idx : indices) {
    const LabeledShape& shape = ds.shapes[static_cast<size_t>(idx)];
    const auto [output, cache] = forward(params, shape, use_prior);

    const MatX<S> part_scores = output.part_features * tables.part.transpose();
    const MatX<S> mat_scores =
        output.material_features * tables.material.transpose();
    std::vector<int32_t> part_pred = argmax_rows(part_scores);
    std::vector<int32_t> mat_pred = argmax_rows(mat_scores);

    part_acc.add(part_pred, shape.part_labels);
    mat_acc.add(mat_pred, shape.material_labels);
    part_pred_all.insert(part_pred_all.end(), part_pred.begin(),
                         part_pred.end());
    part_gt_all.insert(part_gt_all.end(), shape.part_labels.begin(),
                       shape.part_labels.end());
    mat_pred_all.insert(mat_pred_all.end(), mat_pred.begin(), mat_pred.end());
    mat_gt_all.insert(mat_gt_all.end(), shape.material_labels.begin(),
                      shape.material_labels.end());

    const MatX<S> part_probs =
        softmax_rows(MatX<S>(part_scores / static_cast<S>(tau)));
    const MatX<S> mat_probs =
        softmax_rows(MatX<S>(mat_scores / static_cast<S>(tau)));
    part_pref_sum +=
        part_probs.colwise().sum().transpose().template cast<double>();
    mat_pref_sum +=
        mat_probs.colwise().sum().transpose().template cast<double>();
    total_points += shape.cloud.size();

    Eigen::Index best = 0;
    output.shape_logits.maxCoeff(&best);
    if (static_cast<int32_t>(best) == shape.shape_class) ++shape_hits;
  }

  SegEval eval;
  eval.part.instance_acc = pointwise_accuracy(part_pred_all, part_gt_all);
  eval.part.class_avg_acc =
      class_average_accuracy(part_pred_all, part_gt_all, c_part);
  eval.part.miou = miou(part_acc);
  eval.part.preference = part_pref_sum / static_cast<double>(total_points);
  eval.part.hubness = hubness_stats(eval.part.preference);
  eval.material.instance_acc = pointwise_accuracy(mat_pred_all, mat_gt_all);
  eval.material.class_avg_acc =
      class_average_accuracy(mat_pred_all, mat_gt_all, c_mat);
  eval.material.miou = miou(mat_acc);
  eval.material.preference = mat_pref_sum / static_cast<double>(total_points);
  eval.material.hubness = hubness_stats(eval.material.preference);
  eval.shape_acc =
      static_cast<double>(shape_hits) / static_cast<double>(indices.size());
  return eval;
}

FrequencyTerciles part_frequency_terciles(
    const Dataset& ds, std::span<const int32_t> train_indices) {
  const int32_t c = ds.part_vocab.size();
  std::vector<int64_t> counts(static_cast<size_t>(c), 0);
  for (int32_t idx : train_indices) {
    for (int32_t label : ds.shapes[static_cast<size_t>(idx)].part_labels) {
      counts[static_cast<size_t>(label)] += 1;
    }
  }
  std::vector<int32_t> order(static_cast<size_t>(c));
  for (int32_t i = 0; i < c; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
    if (counts[static_cast<size_t>(a)] != counts[static_cast<size_t>(b)]) {
      return counts[static_cast<size_t>(a)] > counts[static_cast<size_t>(b)];
    }
    return a < b;
  });

  const int32_t third = std::max<int32_t>(1, c / 3);
  FrequencyTerciles terciles;
  for (int32_t i = 0; i < c; ++i) {
    if (i < third) {
      terciles.head.push_back(order[static_cast<size_t>(i)]);
    } else if (i >= c - third) {
      terciles.tail.push_back(order[static_cast<size_t>(i)]);
    } else {
      terciles.mid.push_back(order[static_cast<size_t>(i)]);
    }
  }
  return terciles;
}

double mean_iou_over(const MiouResult& result,
                     std::span<const int32_t> classes) {
  double sum = 0.0;
  int32_t defined = 0;
  for (int32_t c : classes) {
    if (result.defined[static_cast<size_t>(c)]) {
      sum += result.per_class[static_cast<size_t>(c)];
      ++defined;
    }
  }
  return defined > 0 ? sum / static_cast<double>(defined) : 0.0;
}

#define PARTMAT_INSTANTIATE_EVALUATE(S)                                  \
  template EvalTables<S> make_eval_tables<S>(const EmbeddingTable&,      \
                                             const EmbeddingTable&);     \
  template ShapePrediction predict_shape<S>(                             \
      const EncoderParams<S>&, const LabeledShape&, const EvalTables<S>&, \
      bool);                                                             \
  template SegEval evaluate_segmentation<S>(                             \
      const EncoderParams<S>&, const Dataset&, std::span<const int32_t>, \
      const EvalTables<S>&, double, bool);

PARTMAT_INSTANTIATE_EVALUATE(float)
PARTMAT_INSTANTIATE_EVALUATE(double)

#undef PARTMAT_INSTANTIATE_EVALUATE

}  // namespace partmat
