// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "partmat/encoder.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "partmat/binio.hpp"
#include "partmat/errors.hpp"
#include "partmat/rng.hpp"

namespace partmat {

void EncoderDims::validate() const {
  if (input_dim < 1 || h1 < 1 || h2 < 1 || feature_dim < 1 ||
      n_shape_classes < 1) {
    throw InvalidArgument("EncoderDims: all dimensions must be >= 1");
  }
  if (has_prior && prior_dim < 1) {
    throw InvalidArgument("EncoderDims: prior_dim must be >= 1 when enabled");
  }
}

namespace {

template <typename S>
MatX<S> random_matrix(Eigen::Index rows, Eigen::Index cols, uint64_t seed,
                      const char* tag) {
  Rng rng(derive_stream(seed, tag));
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  MatX<S> m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = static_cast<S>(rng.normal() * scale);
    }
  }
  return m;
}

template <typename S>
MatX<S> relu(const MatX<S>& m) {
  return m.cwiseMax(S(0));
}

/// Backward through one projection head. Accumulates weight grads into
/// (gw1, gb1, gw2, gb2) and returns dL/d(head input).
template <typename S>
MatX<S> head_backward(const MatX<S>& u, const HeadCache<S>& cache,
                      const MatX<S>& w1, const MatX<S>& w2,
                      const MatX<S>& grad_f, MatX<S>& gw1, VecX<S>& gb1,
                      MatX<S>& gw2, VecX<S>& gb2) {
  // Row normalization: dv = (df - <f, df> f) / ||v||.
  const VecX<S> dots = (cache.f.array() * grad_f.array()).rowwise().sum();
  MatX<S> dv = grad_f - (cache.f.array().colwise() * dots.array()).matrix();
  dv = (dv.array().colwise() / cache.norms.array()).matrix();

  gw2.noalias() += dv.transpose() * cache.ha1;
  gb2.noalias() += dv.colwise().sum().transpose();

  MatX<S> dhz1 = (dv * w2).cwiseProduct(
      (cache.hz1.array() > S(0)).template cast<S>().matrix());
  gw1.noalias() += dhz1.transpose() * u;
  gb1.noalias() += dhz1.colwise().sum().transpose();
  return dhz1 * w1;
}

}  // namespace

template <typename S>
EncoderParams<S> init_params(const EncoderDims& dims, uint64_t seed) {
  dims.validate();
  EncoderParams<S> p;
  p.dims = dims;
  const int32_t hh = dims.head_hidden();
  const int32_t hin = dims.head_input();

  p.w1 = random_matrix<S>(dims.h1, dims.input_dim, seed, "w1");
  p.b1 = VecX<S>::Zero(dims.h1);
  p.w2 = random_matrix<S>(dims.h2, dims.h1, seed, "w2");
  p.b2 = VecX<S>::Zero(dims.h2);

  p.part_w1 = random_matrix<S>(hh, hin, seed, "part_w1");
  p.part_b1 = VecX<S>::Zero(hh);
  p.part_w2 = random_matrix<S>(dims.feature_dim, hh, seed, "part_w2");
  p.part_b2 = VecX<S>::Zero(dims.feature_dim);
  p.mat_w1 = random_matrix<S>(hh, hin, seed, "mat_w1");
  p.mat_b1 = VecX<S>::Zero(hh);
  p.mat_w2 = random_matrix<S>(dims.feature_dim, hh, seed, "mat_w2");
  p.mat_b2 = VecX<S>::Zero(dims.feature_dim);

  p.shape_w1 = random_matrix<S>(hh, dims.h2, seed, "shape_w1");
  p.shape_b1 = VecX<S>::Zero(hh);
  p.shape_w2 = random_matrix<S>(dims.n_shape_classes, hh, seed, "shape_w2");
  p.shape_b2 = VecX<S>::Zero(dims.n_shape_classes);

  if (dims.has_prior) {
    p.prior = random_matrix<S>(dims.n_shape_classes, dims.prior_dim, seed,
                               "prior");
  } else {
    p.prior.resize(0, 0);
  }

  p.retrieval_w = random_matrix<S>(dims.feature_dim, dims.h2, seed,
                                   "retrieval_w");
  p.retrieval_b = VecX<S>::Zero(dims.feature_dim);
  return p;
}

template <typename S>
EncoderParams<S> zeros_like(const EncoderParams<S>& params) {
  EncoderParams<S> g;
  g.dims = params.dims;
  g.w1 = MatX<S>::Zero(params.w1.rows(), params.w1.cols());
  g.b1 = VecX<S>::Zero(params.b1.size());
  g.w2 = MatX<S>::Zero(params.w2.rows(), params.w2.cols());
  g.b2 = VecX<S>::Zero(params.b2.size());
  g.part_w1 = MatX<S>::Zero(params.part_w1.rows(), params.part_w1.cols());
  g.part_b1 = VecX<S>::Zero(params.part_b1.size());
  g.part_w2 = MatX<S>::Zero(params.part_w2.rows(), params.part_w2.cols());
  g.part_b2 = VecX<S>::Zero(params.part_b2.size());
  g.mat_w1 = MatX<S>::Zero(params.mat_w1.rows(), params.mat_w1.cols());
  g.mat_b1 = VecX<S>::Zero(params.mat_b1.size());
  g.mat_w2 = MatX<S>::Zero(params.mat_w2.rows(), params.mat_w2.cols());
  g.mat_b2 = VecX<S>::Zero(params.mat_b2.size());
  g.shape_w1 = MatX<S>::Zero(params.shape_w1.rows(), params.shape_w1.cols());
  g.shape_b1 = VecX<S>::Zero(params.shape_b1.size());
  g.shape_w2 = MatX<S>::Zero(params.shape_w2.rows(), params.shape_w2.cols());
  g.shape_b2 = VecX<S>::Zero(params.shape_b2.size());
  g.prior = MatX<S>::Zero(params.prior.rows(), params.prior.cols());
  g.retrieval_w =
      MatX<S>::Zero(params.retrieval_w.rows(), params.retrieval_w.cols());
  g.retrieval_b = VecX<S>::Zero(params.retrieval_b.size());
  return g;
}

template <typename S>
void axpy_params(EncoderParams<S>& params, S scale,
                 const EncoderParams<S>& delta) {
  params.w1 += scale * delta.w1;
  params.b1 += scale * delta.b1;
  params.w2 += scale * delta.w2;
  params.b2 += scale * delta.b2;
  params.part_w1 += scale * delta.part_w1;
  params.part_b1 += scale * delta.part_b1;
  params.part_w2 += scale * delta.part_w2;
  params.part_b2 += scale * delta.part_b2;
  params.mat_w1 += scale * delta.mat_w1;
  params.mat_b1 += scale * delta.mat_b1;
  params.mat_w2 += scale * delta.mat_w2;
  params.mat_b2 += scale * delta.mat_b2;
  params.shape_w1 += scale * delta.shape_w1;
  params.shape_b1 += scale * delta.shape_b1;
  params.shape_w2 += scale * delta.shape_w2;
  params.shape_b2 += scale * delta.shape_b2;
  if (params.prior.size() > 0) params.prior += scale * delta.prior;
  params.retrieval_w += scale * delta.retrieval_w;
  params.retrieval_b += scale * delta.retrieval_b;
}

template <typename S>
std::pair<EncoderOutput<S>, ForwardCache<S>> forward_cloud(
    const EncoderParams<S>& params, const PointCloud& cloud,
    int32_t shape_class, bool use_prior) {
  const EncoderDims& dims = params.dims;
  const Eigen::Index n = cloud.size();
  if (n < 1) throw InvalidArgument("encoder forward: empty cloud");
  if (use_prior) {
    if (!dims.has_prior) {
      throw InvalidArgument(
          "encoder forward: use_prior requested but params carry no prior "
          "table");
    }
    if (shape_class < 0 || shape_class >= dims.n_shape_classes) {
      throw InvalidArgument("encoder forward: shape class out of range for "
                            "prior lookup");
    }
  }

  ForwardCache<S> cache;
  cache.params = &params;
  cache.use_prior = use_prior;
  cache.shape_class = shape_class;

  cache.x.resize(n, dims.input_dim);
  cache.x.leftCols(3) = cloud.coordinates.template cast<S>();
  cache.x.rightCols(3) = cloud.colors.template cast<S>();

  cache.z1 = (cache.x * params.w1.transpose()).rowwise() +
             params.b1.transpose();
  cache.a1 = relu(cache.z1);
  cache.z2 = (cache.a1 * params.w2.transpose()).rowwise() +
             params.b2.transpose();
  cache.t = relu(cache.z2);

  // Channelwise max over points; ties go to the lowest row index.
  cache.g.resize(dims.h2);
  cache.argmax.assign(static_cast<size_t>(dims.h2), 0);
  for (int32_t j = 0; j < dims.h2; ++j) {
    S best = cache.t(0, j);
    int32_t best_row = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (cache.t(i, j) > best) {
        best = cache.t(i, j);
        best_row = static_cast<int32_t>(i);
      }
    }
    cache.g[j] = best;
    cache.argmax[static_cast<size_t>(j)] = best_row;
  }

  cache.u.resize(n, dims.head_input());
  cache.u.leftCols(dims.h2) = cache.t;
  cache.u.middleCols(dims.h2, dims.h2) =
      cache.g.transpose().replicate(n, 1);
  if (dims.has_prior) {
    if (use_prior) {
      cache.u.rightCols(dims.prior_dim) =
          params.prior.row(shape_class).replicate(n, 1);
    } else {
      cache.u.rightCols(dims.prior_dim).setZero();
    }
  }

  const auto run_head = [&](const MatX<S>& w1, const VecX<S>& b1,
                            const MatX<S>& w2, const VecX<S>& b2,
                            HeadCache<S>& head) {
    head.hz1 = (cache.u * w1.transpose()).rowwise() + b1.transpose();
    head.ha1 = relu(head.hz1);
    head.v = (head.ha1 * w2.transpose()).rowwise() + b2.transpose();
    head.norms = head.v.rowwise().norm();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (head.norms[i] == S(0)) {
        throw NumericError(
            "encoder forward: zero feature row before normalization (point " +
            std::to_string(i) + ")");
      }
    }
    head.f = (head.v.array().colwise() / head.norms.array()).matrix();
  };
  run_head(params.part_w1, params.part_b1, params.part_w2, params.part_b2,
           cache.part);
  run_head(params.mat_w1, params.mat_b1, params.mat_w2, params.mat_b2,
           cache.material);

  cache.sz1 = params.shape_w1 * cache.g + params.shape_b1;
  cache.sa1 = cache.sz1.cwiseMax(S(0));

  EncoderOutput<S> out;
  out.part_features = cache.part.f;
  out.material_features = cache.material.f;
  out.shape_logits = params.shape_w2 * cache.sa1 + params.shape_b2;
  return {std::move(out), std::move(cache)};
}

template <typename S>
std::pair<EncoderOutput<S>, ForwardCache<S>> forward(
    const EncoderParams<S>& params, const LabeledShape& shape,
    bool use_prior) {
  return forward_cloud(params, shape.cloud, shape.shape_class, use_prior);
}

template <typename S>
EncoderParams<S> backward(const EncoderParams<S>& params,
                          const ForwardCache<S>& cache,
                          const OutputGrads<S>& grad_output) {
  if (cache.params != &params) {
    throw InvalidArgument("encoder backward: cache does not match params");
  }
  const EncoderDims& dims = params.dims;
  const Eigen::Index n = cache.x.rows();
  if (grad_output.part_features.rows() != n ||
      grad_output.material_features.rows() != n ||
      grad_output.shape_logits.size() != dims.n_shape_classes) {
    throw InvalidArgument("encoder backward: gradient shapes do not match");
  }

  EncoderParams<S> g = zeros_like(params);

  MatX<S> du = head_backward(cache.u, cache.part, params.part_w1,
                             params.part_w2, grad_output.part_features,
                             g.part_w1, g.part_b1, g.part_w2, g.part_b2);
  du += head_backward(cache.u, cache.material, params.mat_w1, params.mat_w2,
                      grad_output.material_features, g.mat_w1, g.mat_b1,
                      g.mat_w2, g.mat_b2);

  // Shape head.
  VecX<S> dsa1 = params.shape_w2.transpose() * grad_output.shape_logits;
  VecX<S> dsz1 = dsa1.cwiseProduct(
      (cache.sz1.array() > S(0)).template cast<S>().matrix());
  g.shape_w2.noalias() += grad_output.shape_logits * cache.sa1.transpose();
  g.shape_b2 += grad_output.shape_logits;
  g.shape_w1.noalias() += dsz1 * cache.g.transpose();
  g.shape_b1 += dsz1;

  // Split the head-input gradient into per-point, pooled, and prior blocks.
  MatX<S> dt = du.leftCols(dims.h2);
  VecX<S> dg = du.middleCols(dims.h2, dims.h2).colwise().sum().transpose();
  dg.noalias() += params.shape_w1.transpose() * dsz1;
  if (dims.has_prior && cache.use_prior) {
    g.prior.row(cache.shape_class) +=
        du.rightCols(dims.prior_dim).colwise().sum();
  }

  // Max-pool routes the pooled gradient to the cached winning rows.
  for (int32_t j = 0; j < dims.h2; ++j) {
    dt(cache.argmax[static_cast<size_t>(j)], j) += dg[j];
  }

  MatX<S> dz2 = dt.cwiseProduct(
      (cache.z2.array() > S(0)).template cast<S>().matrix());
  g.w2.noalias() += dz2.transpose() * cache.a1;
  g.b2 += dz2.colwise().sum().transpose();
  MatX<S> dz1 = (dz2 * params.w2).cwiseProduct(
      (cache.z1.array() > S(0)).template cast<S>().matrix());
  g.w1.noalias() += dz1.transpose() * cache.x;
  g.b1 += dz1.colwise().sum().transpose();
  return g;
}

template <typename S>
VecX<S> global_feature(const EncoderParams<S>& params,
                       const PointCloud& cloud) {
  const Eigen::Index n = cloud.size();
  if (n < 1) throw InvalidArgument("global_feature: empty cloud");
  MatX<S> x(n, params.dims.input_dim);
  x.leftCols(3) = cloud.coordinates.template cast<S>();
  x.rightCols(3) = cloud.colors.template cast<S>();
  const MatX<S> a1 =
      relu(MatX<S>((x * params.w1.transpose()).rowwise() + params.b1.transpose()));
  const MatX<S> t = relu(
      MatX<S>((a1 * params.w2.transpose()).rowwise() + params.b2.transpose()));
  return t.colwise().maxCoeff().transpose();
}

template <typename To, typename From>
EncoderParams<To> cast_params(const EncoderParams<From>& params) {
  EncoderParams<To> out;
  out.dims = params.dims;
  out.w1 = params.w1.template cast<To>();
  out.b1 = params.b1.template cast<To>();
  out.w2 = params.w2.template cast<To>();
  out.b2 = params.b2.template cast<To>();
  out.part_w1 = params.part_w1.template cast<To>();
  out.part_b1 = params.part_b1.template cast<To>();
  out.part_w2 = params.part_w2.template cast<To>();
  out.part_b2 = params.part_b2.template cast<To>();
  out.mat_w1 = params.mat_w1.template cast<To>();
  out.mat_b1 = params.mat_b1.template cast<To>();
  out.mat_w2 = params.mat_w2.template cast<To>();
  out.mat_b2 = params.mat_b2.template cast<To>();
  out.shape_w1 = params.shape_w1.template cast<To>();
  out.shape_b1 = params.shape_b1.template cast<To>();
  out.shape_w2 = params.shape_w2.template cast<To>();
  out.shape_b2 = params.shape_b2.template cast<To>();
  out.prior = params.prior.template cast<To>();
  out.retrieval_w = params.retrieval_w.template cast<To>();
  out.retrieval_b = params.retrieval_b.template cast<To>();
  return out;
}

namespace {

constexpr char kMagic[4] = {'C', '3', 'C', 'K'};
constexpr uint16_t kVersion = 1;

void write_tensor(std::ostream& out, const MatX<float>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      binio::write_f32(out, m(r, c));
    }
  }
}

void write_tensor(std::ostream& out, const VecX<float>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) binio::write_f32(out, v[i]);
}

void read_tensor(std::istream& in, MatX<float>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = binio::read_f32(in, "tensor");
    }
  }
}

void read_tensor(std::istream& in, VecX<float>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = binio::read_f32(in, "tensor");
  }
}

}  // namespace

void save_checkpoint(const EncoderParams<float>& params,
                     const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError(IoError::Code::kOpenFailed,
                  "cannot open " + path.string() + " for writing");
  }
  const EncoderDims& d = params.dims;
  binio::write_magic(out, kMagic);
  binio::write_u16(out, kVersion);
  binio::write_u32(out, static_cast<uint32_t>(d.input_dim));
  binio::write_u32(out, static_cast<uint32_t>(d.h1));
  binio::write_u32(out, static_cast<uint32_t>(d.h2));
  binio::write_u32(out, static_cast<uint32_t>(d.feature_dim));
  binio::write_u32(out, static_cast<uint32_t>(d.n_shape_classes));
  binio::write_u32(out, static_cast<uint32_t>(d.prior_dim));
  binio::write_u8(out, d.has_prior ? 1 : 0);
  binio::write_u32(out, meta.c_part);
  binio::write_u32(out, meta.c_mat);
  binio::write_u8(out, meta.embed_synth ? 1 : 0);
  binio::write_u64(out, meta.embed_seed);

  write_tensor(out, params.w1);
  write_tensor(out, params.b1);
  write_tensor(out, params.w2);
  write_tensor(out, params.b2);
  write_tensor(out, params.part_w1);
  write_tensor(out, params.part_b1);
  write_tensor(out, params.part_w2);
  write_tensor(out, params.part_b2);
  write_tensor(out, params.mat_w1);
  write_tensor(out, params.mat_b1);
  write_tensor(out, params.mat_w2);
  write_tensor(out, params.mat_b2);
  write_tensor(out, params.shape_w1);
  write_tensor(out, params.shape_b1);
  write_tensor(out, params.shape_w2);
  write_tensor(out, params.shape_b2);
  if (d.has_prior) write_tensor(out, params.prior);
  write_tensor(out, params.retrieval_w);
  write_tensor(out, params.retrieval_b);
  if (!out) {
    throw IoError(IoError::Code::kOpenFailed,
                  "write failure on " + path.string());
  }
}

std::pair<EncoderParams<float>, CheckpointMeta> load_checkpoint(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(IoError::Code::kOpenFailed,
                  "cannot open " + path.string() + " for reading");
  }
  binio::expect_magic(in, kMagic, "checkpoint");
  const uint16_t version = binio::read_u16(in, "version");
  if (version != kVersion) {
    throw IoError(IoError::Code::kBadVersion,
                  "unsupported checkpoint version " + std::to_string(version));
  }
  EncoderDims d;
  d.input_dim = static_cast<int32_t>(binio::read_u32(in, "input_dim"));
  d.h1 = static_cast<int32_t>(binio::read_u32(in, "h1"));
  d.h2 = static_cast<int32_t>(binio::read_u32(in, "h2"));
  d.feature_dim = static_cast<int32_t>(binio::read_u32(in, "feature_dim"));
  d.n_shape_classes =
      static_cast<int32_t>(binio::read_u32(in, "n_shape_classes"));
  d.prior_dim = static_cast<int32_t>(binio::read_u32(in, "prior_dim"));
  d.has_prior = binio::read_u8(in, "has_prior") != 0;
  CheckpointMeta meta;
  meta.c_part = binio::read_u32(in, "c_part");
  meta.c_mat = binio::read_u32(in, "c_mat");
  meta.embed_synth = binio::read_u8(in, "embed_synth") != 0;
  meta.embed_seed = binio::read_u64(in, "embed_seed");
  d.validate();

  EncoderParams<float> p;
  p.dims = d;
  const int32_t hh = d.head_hidden();
  const int32_t hin = d.head_input();
  p.w1.resize(d.h1, d.input_dim);
  p.b1.resize(d.h1);
  p.w2.resize(d.h2, d.h1);
  p.b2.resize(d.h2);
  p.part_w1.resize(hh, hin);
  p.part_b1.resize(hh);
  p.part_w2.resize(d.feature_dim, hh);
  p.part_b2.resize(d.feature_dim);
  p.mat_w1.resize(hh, hin);
  p.mat_b1.resize(hh);
  p.mat_w2.resize(d.feature_dim, hh);
  p.mat_b2.resize(d.feature_dim);
  p.shape_w1.resize(hh, d.h2);
  p.shape_b1.resize(hh);
  p.shape_w2.resize(d.n_shape_classes, hh);
  p.shape_b2.resize(d.n_shape_classes);
  p.prior.resize(d.has_prior ? d.n_shape_classes : 0,
                 d.has_prior ? d.prior_dim : 0);
  p.retrieval_w.resize(d.feature_dim, d.h2);
  p.retrieval_b.resize(d.feature_dim);

  read_tensor(in, p.w1);
  read_tensor(in, p.b1);
  read_tensor(in, p.w2);
  read_tensor(in, p.b2);
  read_tensor(in, p.part_w1);
  read_tensor(in, p.part_b1);
  read_tensor(in, p.part_w2);
  read_tensor(in, p.part_b2);
  read_tensor(in, p.mat_w1);
  read_tensor(in, p.mat_b1);
  read_tensor(in, p.mat_w2);
  read_tensor(in, p.mat_b2);
  read_tensor(in, p.shape_w1);
  read_tensor(in, p.shape_b1);
  read_tensor(in, p.shape_w2);
  read_tensor(in, p.shape_b2);
  if (d.has_prior) read_tensor(in, p.prior);
  read_tensor(in, p.retrieval_w);
  read_tensor(in, p.retrieval_b);
  return {std::move(p), meta};
}

#define PARTMAT_INSTANTIATE_ENCODER(S)                                      \
  template EncoderParams<S> init_params<S>(const EncoderDims&, uint64_t);   \
  template EncoderParams<S> zeros_like<S>(const EncoderParams<S>&);         \
  template void axpy_params<S>(EncoderParams<S>&, S,                        \
                               const EncoderParams<S>&);                    \
  template std::pair<EncoderOutput<S>, ForwardCache<S>> forward_cloud<S>(   \
      const EncoderParams<S>&, const PointCloud&, int32_t, bool);           \
  template std::pair<EncoderOutput<S>, ForwardCache<S>> forward<S>(         \
      const EncoderParams<S>&, const LabeledShape&, bool);                  \
  template EncoderParams<S> backward<S>(const EncoderParams<S>&,            \
                                        const ForwardCache<S>&,             \
                                        const OutputGrads<S>&);             \
  template VecX<S> global_feature<S>(const EncoderParams<S>&,               \
                                     const PointCloud&);

PARTMAT_INSTANTIATE_ENCODER(float)
PARTMAT_INSTANTIATE_ENCODER(double)

#undef PARTMAT_INSTANTIATE_ENCODER

template EncoderParams<double> cast_params<double, float>(
    const EncoderParams<float>&);
template EncoderParams<float> cast_params<float, double>(
    const EncoderParams<double>&);
template EncoderParams<float> cast_params<float, float>(
    const EncoderParams<float>&);
template EncoderParams<double> cast_params<double, double>(
    const EncoderParams<double>&);

}  // namespace partmat
