// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training objective: temperature-scaled cosine softmax against a frozen
// class-embedding table, cross-entropy on the resulting probabilities, and a
// hubless penalty that drives the batch-mean predicted probability of every
// class toward 1/C. All pieces have closed-form gradients.
//
// Scalar-templated: training runs the float instantiation, gradient checks
// run the identical code path in double.

#ifndef PARTMAT_LOSSES_HPP_
#define PARTMAT_LOSSES_HPP_

#include <cstdint>
#include <span>
#include <utility>

#include "partmat/matrix.hpp"

namespace partmat {

struct LossConfig {
  double tau = 0.07;   // softmax temperature, > 0
  double gamma = 1.0;  // hubless-loss weight, >= 0

  void validate() const;
};

template <typename S>
struct LossBreakdown {
  S vl = 0;     // contrastive cross-entropy term
  S hub = 0;    // hubless term
  S total = 0;  // vl + gamma * hub
};

/// z_ic = <f_i, t_c> / tau. Rows of both inputs must be unit-norm; dots are
/// clamped to [-1, 1] so |z| <= 1/tau holds exactly. Throws InvalidArgument
/// on dimension mismatch.
template <typename S>
MatX<S> similarity_logits(const MatX<S>& features, const MatX<S>& table,
                          S tau);

/// Numerically stable row softmax (row-max subtraction).
template <typename S>
MatX<S> softmax_rows(MatX<S> logits);

/// Mean negative log probability of the true class; probabilities are
/// clamped at 1e-30 before the log. Throws InvalidArgument on a label out of
/// range.
template <typename S>
S vl_loss(const MatX<S>& probs, std::span<const int32_t> labels);

/// Column means of the probability matrix: the batch's class preference.
template <typename S>
VecX<S> class_preference(const MatX<S>& probs);

/// sum_c (pref_c - 1/C)^2; zero iff the preference is uniform.
template <typename S>
S vilhub_loss(const VecX<S>& pref);

/// Composes the four pieces above. Returns the probabilities for reuse by
/// metrics.
template <typename S>
std::pair<LossBreakdown<S>, MatX<S>> total_loss(const MatX<S>& features,
                                                const MatX<S>& table,
                                                std::span<const int32_t> labels,
                                                const LossConfig& cfg);

/// d(total)/d(logits): (1/N)(p - onehot) for the cross-entropy term plus the
/// hubless chain through the softmax.
template <typename S>
MatX<S> loss_gradient_wrt_logits(const MatX<S>& probs,
                                 std::span<const int32_t> labels, S gamma);

/// d(total)/d(features) = d(total)/d(logits) * table / tau.
template <typename S>
MatX<S> loss_gradient_wrt_features(const MatX<S>& features, const MatX<S>& table,
                                   std::span<const int32_t> labels,
                                   const LossConfig& cfg);

/// Plain softmax cross-entropy on one logit vector; returns the loss and its
/// gradient with respect to the logits. Used by the shape-classification
/// head, which trains outside the contrastive objective.
template <typename S>
std::pair<S, VecX<S>> softmax_cross_entropy(const VecX<S>& logits,
                                            int32_t label);

}  // namespace partmat

#endif  // PARTMAT_LOSSES_HPP_
