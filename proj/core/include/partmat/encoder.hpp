// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0
//
// Lightweight per-point encoder: a pointwise MLP trunk with channelwise
// max-pooling (permutation-equivariant features, permutation-invariant
// global feature), dual part/material projection heads emitting unit-norm
// rows, a shape-classification head on the global feature, and an optional
// learned shape-prior embedding concatenated to the head inputs.
//
// forward/backward are scalar-templated; the backward pass is hand-derived
// and checked against central finite differences at 64-bit.

#ifndef PARTMAT_ENCODER_HPP_
#define PARTMAT_ENCODER_HPP_

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "partmat/matrix.hpp"
#include "partmat/types.hpp"

namespace partmat {

struct EncoderDims {
  int32_t input_dim = 6;  // xyz + rgb
  int32_t h1 = 64;
  int32_t h2 = 128;
  int32_t feature_dim = 64;  // D; must match the embedding tables
  int32_t n_shape_classes = 1;
  int32_t prior_dim = 32;
  bool has_prior = false;  // allocates the prior table and widens head inputs

  int32_t head_hidden() const { return h2; }
  int32_t head_input() const { return 2 * h2 + (has_prior ? prior_dim : 0); }

  void validate() const;
  bool operator==(const EncoderDims&) const = default;
};

template <typename S>
struct EncoderParams {
  EncoderDims dims;

  // Trunk, y = W x + b with W stored out x in.
  MatX<S> w1;  // h1 x input_dim
  VecX<S> b1;
  MatX<S> w2;  // h2 x h1
  VecX<S> b2;

  // Part / material heads: affine -> ReLU -> affine -> row normalization.
  MatX<S> part_w1;  // head_hidden x head_input
  VecX<S> part_b1;
  MatX<S> part_w2;  // feature_dim x head_hidden
  VecX<S> part_b2;
  MatX<S> mat_w1;
  VecX<S> mat_b1;
  MatX<S> mat_w2;
  VecX<S> mat_b2;

  // Shape head on the global feature.
  MatX<S> shape_w1;  // head_hidden x h2
  VecX<S> shape_b1;
  MatX<S> shape_w2;  // n_shape_classes x head_hidden
  VecX<S> shape_b2;

  // Shape-prior embedding rows; 0 x 0 when !dims.has_prior.
  MatX<S> prior;  // n_shape_classes x prior_dim

  // Retrieval head projecting the global feature; trained separately.
  MatX<S> retrieval_w;  // feature_dim x h2
  VecX<S> retrieval_b;
};

template <typename S>
struct EncoderOutput {
  MatX<S> part_features;      // N x D, unit rows
  MatX<S> material_features;  // N x D, unit rows
  VecX<S> shape_logits;       // n_shape_classes
};

template <typename S>
struct HeadCache {
  MatX<S> hz1;   // N x head_hidden, pre-activation
  MatX<S> ha1;   // N x head_hidden
  MatX<S> v;     // N x D, pre-normalization
  VecX<S> norms; // N
  MatX<S> f;     // N x D, normalized
};

template <typename S>
struct ForwardCache {
  const EncoderParams<S>* params = nullptr;
  bool use_prior = false;
  int32_t shape_class = -1;

  MatX<S> x;   // N x input_dim
  MatX<S> z1;  // N x h1
  MatX<S> a1;
  MatX<S> z2;  // N x h2
  MatX<S> t;
  std::vector<int32_t> argmax;  // per-channel winning row, lowest index wins
  VecX<S> g;                    // h2
  MatX<S> u;                    // N x head_input
  HeadCache<S> part;
  HeadCache<S> material;
  VecX<S> sz1;  // head_hidden
  VecX<S> sa1;
};

/// Gradients of a scalar loss with respect to the encoder outputs.
template <typename S>
struct OutputGrads {
  MatX<S> part_features;
  MatX<S> material_features;
  VecX<S> shape_logits;
};

/// Deterministic init: weights ~ Normal(0, 1/fan_in), biases zero, one RNG
/// stream per tensor.
template <typename S>
EncoderParams<S> init_params(const EncoderDims& dims, uint64_t seed);

template <typename S>
EncoderParams<S> zeros_like(const EncoderParams<S>& params);

/// params += scale * delta, over every tensor.
template <typename S>
void axpy_params(EncoderParams<S>& params, S scale,
                 const EncoderParams<S>& delta);

/// Forward on a bare cloud. shape_class is only consulted when use_prior.
template <typename S>
std::pair<EncoderOutput<S>, ForwardCache<S>> forward_cloud(
    const EncoderParams<S>& params, const PointCloud& cloud,
    int32_t shape_class, bool use_prior);

template <typename S>
std::pair<EncoderOutput<S>, ForwardCache<S>> forward(
    const EncoderParams<S>& params, const LabeledShape& shape, bool use_prior);

/// Exact gradients of the composed map, including the row-normalization
/// Jacobian and max-pool routing to the cached argmax rows. The returned
/// container mirrors the parameter layout; retrieval tensors stay zero.
/// Throws InvalidArgument when the cache does not belong to `params`.
template <typename S>
EncoderParams<S> backward(const EncoderParams<S>& params,
                          const ForwardCache<S>& cache,
                          const OutputGrads<S>& grad_output);

/// Trunk + max-pool only; the permutation-invariant global feature.
template <typename S>
VecX<S> global_feature(const EncoderParams<S>& params, const PointCloud& cloud);

template <typename To, typename From>
EncoderParams<To> cast_params(const EncoderParams<From>& params);

/// Checkpoint sidecar: vocabulary sizes and embedding provenance recorded at
/// training time so evaluation can rebuild the frozen tables and detect
/// mismatched datasets.
struct CheckpointMeta {
  uint32_t c_part = 0;
  uint32_t c_mat = 0;
  bool embed_synth = true;
  uint64_t embed_seed = 0;
};

void save_checkpoint(const EncoderParams<float>& params,
                     const CheckpointMeta& meta,
                     const std::filesystem::path& path);

std::pair<EncoderParams<float>, CheckpointMeta> load_checkpoint(
    const std::filesystem::path& path);

}  // namespace partmat

#endif  // PARTMAT_ENCODER_HPP_
