// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0
//
// Mini-batch gradient-descent training of the encoder against frozen part
// and material embedding tables. Per batch, the contrastive + hubless
// objective is evaluated independently for each head over all points of the
// batch pooled, the shape head adds plain cross-entropy, and the summed
// gradient takes one plain SGD step on the stepped learning-rate schedule.
// Fully deterministic given (dataset, config).

#ifndef PARTMAT_TRAINER_HPP_
#define PARTMAT_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "partmat/embedding.hpp"
#include "partmat/encoder.hpp"
#include "partmat/evaluate.hpp"

namespace partmat {

enum class Precision { kTrain32, kCheck64 };

struct TrainConfig {
  int32_t epochs = 100;
  int32_t batch_shapes = 8;
  double learning_rate = 1e-3;
  double lr_decay_factor = 0.7;
  int32_t lr_decay_every = 20;
  double tau = 0.07;
  double gamma = 1.0;
  bool use_prior = false;
  uint64_t seed = 0;
  Precision precision = Precision::kTrain32;

  // Encoder dims; the feature dim comes from the embedding tables.
  int32_t h1 = 64;
  int32_t h2 = 128;
  int32_t prior_dim = 32;

  void validate() const;
};

/// Effective learning rate at a 0-based epoch: lr0 * factor^(epoch / every).
double effective_lr(const TrainConfig& cfg, int32_t epoch);

struct EpochStats {
  int32_t epoch = 0;  // 0-based
  double vl_part = 0.0;
  double hub_part = 0.0;
  double vl_mat = 0.0;
  double hub_mat = 0.0;
  double shape_ce = 0.0;
  double total = 0.0;
  // Validation metrics; zero when the dataset has no validation split.
  double val_instance_acc_part = 0.0;
  double val_instance_acc_mat = 0.0;
  double val_miou_part = 0.0;
  double val_miou_mat = 0.0;
  double pref_var_part = 0.0;
  double pref_var_mat = 0.0;
  double lr = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

template <typename S>
struct TrainResult {
  EncoderParams<S> params;
  TrainHistory history;
};

/// Throws NumericError with epoch/batch coordinates when the loss turns
/// non-finite. The embedding tables are read-only throughout.
template <typename S>
TrainResult<S> train(const Dataset& ds, const EmbeddingTable& part_table,
                     const EmbeddingTable& material_table,
                     const TrainConfig& cfg);

/// One JSON object per epoch: {epoch, vl_part, hub_part, vl_mat, hub_mat,
/// shape_ce, total, val_miou_part, val_miou_mat, pref_var_part, pref_var_mat,
/// lr}.
void write_history_jsonl(const TrainHistory& history,
                         const std::filesystem::path& path);

struct GammaAblationRow {
  double gamma = 0.0;
  double overall_miou = 0.0;   // part head, evaluation split
  double head_miou = 0.0;      // top frequency tercile
  double tail_miou = 0.0;      // bottom frequency tercile
  double pref_variance = 0.0;  // part-head preference variance
};

struct GammaAblationReport {
  std::vector<GammaAblationRow> rows;
};

/// Trains one model per gamma with everything else fixed and evaluates the
/// part head on the test split (falling back to valid, then train, when
/// empty). Evaluation uses the same seed and tables for every row.
template <typename S>
GammaAblationReport ablate_gamma(const Dataset& ds,
                                 const EmbeddingTable& part_table,
                                 const EmbeddingTable& material_table,
                                 const TrainConfig& base_cfg,
                                 std::span<const double> gammas);

}  // namespace partmat

#endif  // PARTMAT_TRAINER_HPP_
