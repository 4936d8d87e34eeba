// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "partmat/losses.hpp"

#include <cmath>
#include <string>

#include "partmat/errors.hpp"

namespace partmat {

void LossConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw InvalidArgument("LossConfig: tau must be finite and > 0");
  }
  if (gamma < 0.0 || !std::isfinite(gamma)) {
    throw InvalidArgument("LossConfig: gamma must be finite and >= 0");
  }
}

template <typename S>
MatX<S> similarity_logits(const MatX<S>& features, const MatX<S>& table,
                          S tau) {
  if (features.cols() != table.cols()) {
    throw InvalidArgument(
        "similarity_logits: feature dim " + std::to_string(features.cols()) +
        " does not match table dim " + std::to_string(table.cols()));
  }
  MatX<S> logits = features * table.transpose();
  logits = logits.cwiseMax(S(-1)).cwiseMin(S(1));
  logits /= tau;
  return logits;
}

template <typename S>
MatX<S> softmax_rows(MatX<S> logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    row = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
  return logits;
}

template <typename S>
S vl_loss(const MatX<S>& probs, std::span<const int32_t> labels) {
  const Eigen::Index n = probs.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw InvalidArgument("vl_loss: label count does not match row count");
  }
  S sum = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int32_t y = labels[static_cast<size_t>(i)];
    if (y < 0 || y >= probs.cols()) {
      throw InvalidArgument("vl_loss: label " + std::to_string(y) +
                            " out of range at row " + std::to_string(i));
    }
    sum -= std::log(std::max(probs(i, y), S(1e-30)));
  }
  return sum / static_cast<S>(n);
}

template <typename S>
VecX<S> class_preference(const MatX<S>& probs) {
  return probs.colwise().mean().transpose();
}

template <typename S>
S vilhub_loss(const VecX<S>& pref) {
  const S uniform = S(1) / static_cast<S>(pref.size());
  return (pref.array() - uniform).square().sum();
}

template <typename S>
std::pair<LossBreakdown<S>, MatX<S>> total_loss(const MatX<S>& features,
                                                const MatX<S>& table,
                                                std::span<const int32_t> labels,
                                                const LossConfig& cfg) {
  cfg.validate();
  MatX<S> probs =
      softmax_rows(similarity_logits(features, table, static_cast<S>(cfg.tau)));
  LossBreakdown<S> breakdown;
  breakdown.vl = vl_loss(probs, labels);
  breakdown.hub = vilhub_loss(VecX<S>(class_preference(probs)));
  breakdown.total = breakdown.vl + static_cast<S>(cfg.gamma) * breakdown.hub;
  return {breakdown, std::move(probs)};
}

template <typename S>
MatX<S> loss_gradient_wrt_logits(const MatX<S>& probs,
                                 std::span<const int32_t> labels, S gamma) {
  const Eigen::Index n = probs.rows();
  const Eigen::Index c = probs.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw InvalidArgument(
        "loss_gradient_wrt_logits: label count does not match row count");
  }
  const S inv_n = S(1) / static_cast<S>(n);

  // Cross-entropy part: (1/N) (p - onehot).
  MatX<S> grad = probs * inv_n;
  for (Eigen::Index i = 0; i < n; ++i) {
    grad(i, labels[static_cast<size_t>(i)]) -= inv_n;
  }

  if (gamma != S(0)) {
    // Hub part: with a_c = (2/N)(pref_c - 1/C), the softmax chain gives
    // d(hub)/dz_ic = p_ic (a_c - <a, p_i>).
    const VecX<S> pref = class_preference(probs);
    const VecX<S> a =
        (S(2) * inv_n) * (pref.array() - S(1) / static_cast<S>(c)).matrix();
    const VecX<S> row_dots = probs * a;  // <a, p_i> per row
    grad.noalias() +=
        gamma * (probs.array().colwise() * (-row_dots).array()).matrix();
    grad.noalias() += gamma * (probs * a.asDiagonal());
  }
  return grad;
}

template <typename S>
MatX<S> loss_gradient_wrt_features(const MatX<S>& features, const MatX<S>& table,
                                   std::span<const int32_t> labels,
                                   const LossConfig& cfg) {
  cfg.validate();
  const MatX<S> probs =
      softmax_rows(similarity_logits(features, table, static_cast<S>(cfg.tau)));
  const MatX<S> grad_z =
      loss_gradient_wrt_logits(probs, labels, static_cast<S>(cfg.gamma));
  return (grad_z * table) / static_cast<S>(cfg.tau);
}

template <typename S>
std::pair<S, VecX<S>> softmax_cross_entropy(const VecX<S>& logits,
                                            int32_t label) {
  if (label < 0 || label >= logits.size()) {
    throw InvalidArgument("softmax_cross_entropy: label out of range");
  }
  VecX<S> p = logits;
  p = (p.array() - p.maxCoeff()).exp();
  p /= p.sum();
  const S loss = -std::log(std::max(p[label], S(1e-30)));
  p[label] -= S(1);
  return {loss, std::move(p)};
}

#define PARTMAT_INSTANTIATE_LOSSES(S)                                        \
  template MatX<S> similarity_logits<S>(const MatX<S>&, const MatX<S>&, S);  \
  template MatX<S> softmax_rows<S>(MatX<S>);                                 \
  template S vl_loss<S>(const MatX<S>&, std::span<const int32_t>);           \
  template VecX<S> class_preference<S>(const MatX<S>&);                      \
  template S vilhub_loss<S>(const VecX<S>&);                                 \
  template std::pair<LossBreakdown<S>, MatX<S>> total_loss<S>(               \
      const MatX<S>&, const MatX<S>&, std::span<const int32_t>,              \
      const LossConfig&);                                                    \
  template MatX<S> loss_gradient_wrt_logits<S>(const MatX<S>&,               \
                                               std::span<const int32_t>, S); \
  template MatX<S> loss_gradient_wrt_features<S>(                            \
      const MatX<S>&, const MatX<S>&, std::span<const int32_t>,              \
      const LossConfig&);                                                    \
  template std::pair<S, VecX<S>> softmax_cross_entropy<S>(const VecX<S>&,    \
                                                          int32_t);

PARTMAT_INSTANTIATE_LOSSES(float)
PARTMAT_INSTANTIATE_LOSSES(double)

#undef PARTMAT_INSTANTIATE_LOSSES

}  // namespace partmat
