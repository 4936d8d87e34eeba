// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARTMAT_EMBEDDING_HPP_
#define PARTMAT_EMBEDDING_HPP_

#include <Eigen/Core>
#include <filesystem>

#include "partmat/types.hpp"

namespace partmat {

/// Row-normalized class-name -> D-dimensional embedding matrix. Frozen during
/// training and freely shareable across threads.
struct EmbeddingTable {
  LabelVocabulary names;
  Eigen::MatrixXd vectors;  // C x D, unit rows

  int32_t dim() const { return static_cast<int32_t>(vectors.cols()); }
};

/// Scales every row to unit Euclidean norm. Throws InvalidArgument naming the
/// row index when a row is zero.
Eigen::MatrixXd normalize_rows(Eigen::MatrixXd matrix);

/// Deterministic random unit embeddings. Row c is keyed by (seed, name of
/// class c), so the embedding of a given name is stable under vocabulary
/// reordering.
EmbeddingTable synth_embeddings(const LabelVocabulary& vocab, int32_t dim,
                                uint64_t seed);

/// Loads externally computed embeddings, JSON ({"name": [..], ...}) or binary
/// ("C3EM" magic). The file must cover the vocabulary exactly; rows are
/// renormalized and reordered to match the vocabulary.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               const LabelVocabulary& vocab);

enum class EmbeddingFormat { kBinary, kJson };

void save_embeddings(const EmbeddingTable& table,
                     const std::filesystem::path& path,
                     EmbeddingFormat format = EmbeddingFormat::kBinary);

}  // namespace partmat

#endif  // PARTMAT_EMBEDDING_HPP_
