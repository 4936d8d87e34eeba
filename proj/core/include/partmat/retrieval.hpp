// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0
//
// Compositional caption generation and text/shape retrieval in a shared
// embedding space. A caption lists a shape's most salient parts with their
// colors and materials; caption embeddings are normalized token means, shape
// embeddings come from a dedicated projection of the encoder's global
// feature, and retrieval ranks gallery shapes by cosine.

#ifndef PARTMAT_RETRIEVAL_HPP_
#define PARTMAT_RETRIEVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "partmat/colormap.hpp"
#include "partmat/embedding.hpp"
#include "partmat/encoder.hpp"
#include "partmat/types.hpp"

namespace partmat {

struct CaptionClause {
  std::string color;
  std::string material;
  std::string part;

  bool operator==(const CaptionClause&) const = default;
};

struct Caption {
  std::string shape_name;
  std::vector<CaptionClause> clauses;  // 1..6, most salient part first
  std::string rendered_text;

  bool operator==(const Caption&) const = default;
};

/// Renders "The {shape} is made of {color} {material} {part}" with further
/// clauses appended as ", {color} {material} {part}" and a final period.
std::string render_caption(const std::string& shape_name,
                           std::span<const CaptionClause> clauses);

/// Caption of the min(k_parts, parts present) largest parts by point count
/// (ties to the lowest part id), in descending point-count order. Each
/// part's material is the majority ground-truth material over its points.
Caption generate_caption(const LabeledShape& shape,
                         const LabelVocabulary& shape_vocab,
                         const LabelVocabulary& part_vocab,
                         const LabelVocabulary& material_vocab,
                         const ColorMap& colors, int32_t k_parts);

/// Inverse of render_caption against the given vocabularies. Multi-token
/// material names are resolved by longest vocabulary match.
Caption parse_caption(const std::string& text,
                      const LabelVocabulary& shape_vocab,
                      const LabelVocabulary& part_vocab,
                      const LabelVocabulary& material_vocab,
                      const ColorMap& colors);

struct CaptionTables {
  const EmbeddingTable& shape;
  const EmbeddingTable& part;
  const EmbeddingTable& material;
  const EmbeddingTable& color;
};

/// Unit-normalized mean of the shape-name row and every clause's color,
/// material and part rows. Throws InvalidArgument naming an unknown token.
Eigen::VectorXd embed_caption(const Caption& caption,
                              const CaptionTables& tables);

/// Unit-normalized projection of the encoder's global feature through the
/// retrieval head.
template <typename S>
VecX<S> embed_shape(const EncoderParams<S>& params, const PointCloud& cloud);

struct RetrievalGallery {
  Eigen::MatrixXd embeddings;  // M x D, unit rows
  std::vector<uint32_t> ids;   // unique
};

void validate_gallery(const RetrievalGallery& gallery);

/// All gallery ids sorted by descending cosine to the query; exact cosine
/// ties break toward the lower id.
std::vector<uint32_t> retrieve(const Eigen::VectorXd& query,
                               const RetrievalGallery& gallery);

/// Fraction of queries whose ground-truth id appears in the top k.
double recall_at_k(std::span<const std::vector<uint32_t>> rankings,
                   std::span<const uint32_t> gt, int32_t k);

/// True iff the ground-truth class is among the k classes whose caption
/// embeddings have the highest cosine to the shape embedding.
bool classify_top_k(const Eigen::VectorXd& shape_embedding,
                    const Eigen::MatrixXd& class_embeddings, int32_t gt_class,
                    int32_t k);

// Gallery file: "C3GL" magic, u32 M, u32 D, then M x (u32 id + D x f32).
void save_gallery(const RetrievalGallery& gallery,
                  const std::filesystem::path& path);
RetrievalGallery load_gallery(const std::filesystem::path& path);

struct CaptionRecord {
  uint32_t shape_id = 0;
  int32_t k_parts = 0;
  std::string text;
};

// Captions file: one JSON object per line {shape_id, k_parts, text}.
void write_captions(std::span<const CaptionRecord> records,
                    const std::filesystem::path& path);
std::vector<CaptionRecord> read_captions(const std::filesystem::path& path);

struct RetrievalTrainConfig {
  int32_t epochs = 40;
  int32_t batch_shapes = 32;
  double learning_rate = 0.05;
  double tau = 0.07;
  uint64_t seed = 0;
};

/// Fits the retrieval head (only) by contrastive alignment of each training
/// shape's embedding to its own caption embedding, with the batch's caption
/// embeddings as the class table. The trunk and all other heads are frozen.
/// caption_embeddings rows are parallel to train_indices.
template <typename S>
void train_retrieval_head(EncoderParams<S>& params, const Dataset& dataset,
                          std::span<const int32_t> train_indices,
                          const Eigen::MatrixXd& caption_embeddings,
                          const RetrievalTrainConfig& cfg);

}  // namespace partmat

#endif  // PARTMAT_RETRIEVAL_HPP_
