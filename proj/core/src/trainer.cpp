// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "partmat/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "partmat/losses.hpp"
#include "partmat/report_json.hpp"
#include "partmat/rng.hpp"

namespace partmat {

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("TrainConfig: epochs must be >= 1");
  if (batch_shapes < 1) {
    throw InvalidArgument("TrainConfig: batch_shapes must be >= 1");
  }
  if (learning_rate < 0.0 || !std::isfinite(learning_rate)) {
    throw InvalidArgument("TrainConfig: learning_rate must be >= 0");
  }
  if (!(lr_decay_factor > 0.0) || lr_decay_factor > 1.0) {
    throw InvalidArgument("TrainConfig: lr_decay_factor must be in (0, 1]");
  }
  if (lr_decay_every < 1) {
    throw InvalidArgument("TrainConfig: lr_decay_every must be >= 1");
  }
  if (!(tau > 0.0)) throw InvalidArgument("TrainConfig: tau must be > 0");
  if (gamma < 0.0) throw InvalidArgument("TrainConfig: gamma must be >= 0");
  if (h1 < 1 || h2 < 1 || prior_dim < 1) {
    throw InvalidArgument("TrainConfig: encoder dims must be >= 1");
  }
}

double effective_lr(const TrainConfig& cfg, int32_t epoch) {
  return cfg.learning_rate *
         std::pow(cfg.lr_decay_factor,
                  static_cast<double>(epoch / cfg.lr_decay_every));
}

namespace {

void check_vocab_match(const EmbeddingTable& table, const LabelVocabulary& vocab,
                       const char* which) {
  if (!(table.names == vocab)) {
    throw InvalidArgument(std::string("train: ") + which +
                          " embedding vocabulary does not match the dataset");
  }
}

}  // namespace

template <typename S>
TrainResult<S> train(const Dataset& ds, const EmbeddingTable& part_table,
                     const EmbeddingTable& material_table,
                     const TrainConfig& cfg) {
  cfg.validate();
  check_vocab_match(part_table, ds.part_vocab, "part");
  check_vocab_match(material_table, ds.material_vocab, "material");
  if (part_table.dim() != material_table.dim()) {
    throw InvalidArgument("train: part/material embedding dims differ");
  }
  const std::vector<int32_t> train_indices = ds.indices_of(Split::kTrain);
  if (train_indices.empty()) {
    throw InvalidArgument("train: dataset has an empty train split");
  }
  const std::vector<int32_t> valid_indices = ds.indices_of(Split::kValid);

  EncoderDims dims;
  dims.input_dim = 6;
  dims.h1 = cfg.h1;
  dims.h2 = cfg.h2;
  dims.feature_dim = part_table.dim();
  dims.n_shape_classes = ds.shape_vocab.size();
  dims.prior_dim = cfg.prior_dim;
  dims.has_prior = cfg.use_prior;

  TrainResult<S> result;
  result.params = init_params<S>(dims, derive_stream(cfg.seed, "init"));
  EncoderParams<S>& params = result.params;

  const EvalTables<S> tables = make_eval_tables<S>(part_table, material_table);
  LossConfig loss_cfg;
  loss_cfg.tau = cfg.tau;
  loss_cfg.gamma = cfg.gamma;

  std::vector<int32_t> order = train_indices;
  for (int32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = effective_lr(cfg, epoch);
    Rng shuffle_rng(
        derive_stream(cfg.seed, "epoch", static_cast<uint64_t>(epoch)));
    for (size_t i = order.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(shuffle_rng.uniform_int(i));
      std::swap(order[i - 1], order[j]);
    }

    double sum_vl_part = 0.0, sum_hub_part = 0.0;
    double sum_vl_mat = 0.0, sum_hub_mat = 0.0;
    double sum_shape_ce = 0.0, sum_total = 0.0;
    int32_t n_batches = 0;

    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.batch_shapes)) {
      const size_t b = std::min<size_t>(static_cast<size_t>(cfg.batch_shapes),
                                        order.size() - start);
      std::vector<EncoderOutput<S>> outputs;
      std::vector<ForwardCache<S>> caches;
      outputs.reserve(b);
      caches.reserve(b);
      Eigen::Index batch_points = 0;
      for (size_t i = 0; i < b; ++i) {
        const LabeledShape& shape =
            ds.shapes[static_cast<size_t>(order[start + i])];
        auto [output, cache] = forward(params, shape, cfg.use_prior);
        batch_points += shape.cloud.size();
        outputs.push_back(std::move(output));
        caches.push_back(std::move(cache));
      }

      // Pool all points of the batch: Eq. 3's preference is a batch mean.
      MatX<S> part_features(batch_points, dims.feature_dim);
      MatX<S> mat_features(batch_points, dims.feature_dim);
      std::vector<int32_t> part_labels, mat_labels;
      part_labels.reserve(static_cast<size_t>(batch_points));
      mat_labels.reserve(static_cast<size_t>(batch_points));
      Eigen::Index row = 0;
      for (size_t i = 0; i < b; ++i) {
        const LabeledShape& shape =
            ds.shapes[static_cast<size_t>(order[start + i])];
        const Eigen::Index n = shape.cloud.size();
        part_features.middleRows(row, n) = outputs[i].part_features;
        mat_features.middleRows(row, n) = outputs[i].material_features;
        part_labels.insert(part_labels.end(), shape.part_labels.begin(),
                           shape.part_labels.end());
        mat_labels.insert(mat_labels.end(), shape.material_labels.begin(),
                          shape.material_labels.end());
        row += n;
      }

      auto [part_loss, part_probs] =
          total_loss(part_features, tables.part, part_labels, loss_cfg);
      auto [mat_loss, mat_probs] =
          total_loss(mat_features, tables.material, mat_labels, loss_cfg);

      double shape_ce = 0.0;
      std::vector<VecX<S>> shape_grads(b);
      for (size_t i = 0; i < b; ++i) {
        const LabeledShape& shape =
            ds.shapes[static_cast<size_t>(order[start + i])];
        auto [ce, grad] =
            softmax_cross_entropy(outputs[i].shape_logits, shape.shape_class);
        shape_ce += static_cast<double>(ce);
        shape_grads[i] = grad / static_cast<S>(b);
      }
      shape_ce /= static_cast<double>(b);

      const double batch_total = static_cast<double>(part_loss.total) +
                                 static_cast<double>(mat_loss.total) +
                                 shape_ce;
      if (!std::isfinite(batch_total)) {
        throw NumericError(
            "train: non-finite loss at epoch " + std::to_string(epoch) +
                ", batch " +
                std::to_string(start / static_cast<size_t>(cfg.batch_shapes)),
            epoch,
            static_cast<long>(start / static_cast<size_t>(cfg.batch_shapes)));
      }

      const MatX<S> part_grad_f =
          MatX<S>(loss_gradient_wrt_logits(part_probs, part_labels,
                                           static_cast<S>(cfg.gamma)) *
                  tables.part) /
          static_cast<S>(cfg.tau);
      const MatX<S> mat_grad_f =
          MatX<S>(loss_gradient_wrt_logits(mat_probs, mat_labels,
                                           static_cast<S>(cfg.gamma)) *
                  tables.material) /
          static_cast<S>(cfg.tau);

      // Backward per shape, gradients summed in batch order.
      EncoderParams<S> grads = zeros_like(params);
      row = 0;
      for (size_t i = 0; i < b; ++i) {
        const Eigen::Index n = caches[i].x.rows();
        OutputGrads<S> out_grads;
        out_grads.part_features = part_grad_f.middleRows(row, n);
        out_grads.material_features = mat_grad_f.middleRows(row, n);
        out_grads.shape_logits = shape_grads[i];
        axpy_params(grads, S(1), backward(params, caches[i], out_grads));
        row += n;
      }
      axpy_params(params, static_cast<S>(-lr), grads);

      sum_vl_part += static_cast<double>(part_loss.vl);
      sum_hub_part += static_cast<double>(part_loss.hub);
      sum_vl_mat += static_cast<double>(mat_loss.vl);
      sum_hub_mat += static_cast<double>(mat_loss.hub);
      sum_shape_ce += shape_ce;
      sum_total += batch_total;
      ++n_batches;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.vl_part = sum_vl_part / n_batches;
    stats.hub_part = sum_hub_part / n_batches;
    stats.vl_mat = sum_vl_mat / n_batches;
    stats.hub_mat = sum_hub_mat / n_batches;
    stats.shape_ce = sum_shape_ce / n_batches;
    stats.total = sum_total / n_batches;
    if (!valid_indices.empty()) {
      const SegEval val = evaluate_segmentation(params, ds, valid_indices,
                                                tables, cfg.tau, cfg.use_prior);
      stats.val_instance_acc_part = val.part.instance_acc;
      stats.val_instance_acc_mat = val.material.instance_acc;
      stats.val_miou_part = val.part.miou.mean;
      stats.val_miou_mat = val.material.miou.mean;
      stats.pref_var_part = val.part.hubness.variance;
      stats.pref_var_mat = val.material.hubness.variance;
    }
    result.history.epochs.push_back(stats);
  }
  return result;
}

void write_history_jsonl(const TrainHistory& history,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError(IoError::Code::kOpenFailed,
                  "cannot open " + path.string() + " for writing");
  }
  for (const EpochStats& e : history.epochs) {
    JsonNode line = JsonNode::object();
    line.set("epoch", e.epoch);
    line.set("vl_part", e.vl_part);
    line.set("hub_part", e.hub_part);
    line.set("vl_mat", e.vl_mat);
    line.set("hub_mat", e.hub_mat);
    line.set("shape_ce", e.shape_ce);
    line.set("total", e.total);
    line.set("val_miou_part", e.val_miou_part);
    line.set("val_miou_mat", e.val_miou_mat);
    line.set("pref_var_part", e.pref_var_part);
    line.set("pref_var_mat", e.pref_var_mat);
    line.set("lr", e.lr);
    out << line.dump(0) << '\n';
  }
}

template <typename S>
GammaAblationReport ablate_gamma(const Dataset& ds,
                                 const EmbeddingTable& part_table,
                                 const EmbeddingTable& material_table,
                                 const TrainConfig& base_cfg,
                                 std::span<const double> gammas) {
  if (gammas.empty()) {
    throw InvalidArgument("ablate_gamma: need at least one gamma");
  }
  const std::vector<int32_t> train_indices = ds.indices_of(Split::kTrain);
  std::vector<int32_t> eval_indices = ds.indices_of(Split::kTest);
  if (eval_indices.empty()) eval_indices = ds.indices_of(Split::kValid);
  if (eval_indices.empty()) eval_indices = train_indices;

  const FrequencyTerciles terciles =
      part_frequency_terciles(ds, train_indices);
  const EvalTables<S> tables = make_eval_tables<S>(part_table, material_table);

  GammaAblationReport report;
  for (double gamma : gammas) {
    TrainConfig cfg = base_cfg;
    cfg.gamma = gamma;
    TrainResult<S> trained = train<S>(ds, part_table, material_table, cfg);
    const SegEval eval =
        evaluate_segmentation(trained.params, ds, eval_indices, tables,
                              cfg.tau, cfg.use_prior);
    GammaAblationRow row;
    row.gamma = gamma;
    row.overall_miou = eval.part.miou.mean;
    row.head_miou = mean_iou_over(eval.part.miou, terciles.head);
    row.tail_miou = mean_iou_over(eval.part.miou, terciles.tail);
    row.pref_variance = eval.part.hubness.variance;
    report.rows.push_back(row);
  }
  return report;
}

#define PARTMAT_INSTANTIATE_TRAINER(S)                                   \
  template TrainResult<S> train<S>(const Dataset&, const EmbeddingTable&, \
                                   const EmbeddingTable&,                 \
                                   const TrainConfig&);                   \
  template GammaAblationReport ablate_gamma<S>(                           \
      const Dataset&, const EmbeddingTable&, const EmbeddingTable&,       \
      const TrainConfig&, std::span<const double>);

PARTMAT_INSTANTIATE_TRAINER(float)
PARTMAT_INSTANTIATE_TRAINER(double)

#undef PARTMAT_INSTANTIATE_TRAINER

}  // namespace partmat
