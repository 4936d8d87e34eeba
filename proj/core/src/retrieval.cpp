// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "partmat/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "partmat/binio.hpp"
#include "partmat/losses.hpp"
#include "partmat/rng.hpp"

namespace partmat {

std::string render_caption(const std::string& shape_name,
                           std::span<const CaptionClause> clauses) {
  if (clauses.empty()) {
    throw InvalidArgument("render_caption: caption needs at least one clause");
  }
  std::string text = "The " + shape_name + " is made of";
  for (size_t i = 0; i < clauses.size(); ++i) {
    text += i == 0 ? " " : ", ";
    text += clauses[i].color + " " + clauses[i].material + " " +
            clauses[i].part;
  }
  text += ".";
  return text;
}

Caption generate_caption(const LabeledShape& shape,
                         const LabelVocabulary& shape_vocab,
                         const LabelVocabulary& part_vocab,
                         const LabelVocabulary& material_vocab,
                         const ColorMap& colors, int32_t k_parts) {
  if (k_parts < 1 || k_parts > 6) {
    throw InvalidArgument("generate_caption: k_parts must be in [1, 6]");
  }
  if (shape.part_labels.empty()) {
    throw InvalidArgument("generate_caption: shape has no labeled points");
  }

  std::map<int32_t, int64_t> part_counts;
  std::map<int32_t, std::map<int32_t, int64_t>> material_votes;
  for (size_t i = 0; i < shape.part_labels.size(); ++i) {
    part_counts[shape.part_labels[i]] += 1;
    material_votes[shape.part_labels[i]][shape.material_labels[i]] += 1;
  }

  std::vector<std::pair<int32_t, int64_t>> order(part_counts.begin(),
                                                 part_counts.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  const size_t take = std::min<size_t>(static_cast<size_t>(k_parts),
                                       order.size());
  Caption caption;
  caption.shape_name = shape_vocab.name(shape.shape_class);
  for (size_t i = 0; i < take; ++i) {
    const int32_t part_id = order[i].first;
    int32_t material_id = -1;
    int64_t best = -1;
    for (const auto& [m, count] : material_votes[part_id]) {
      if (count > best) {
        material_id = m;
        best = count;
      }
    }
    const std::string& material_name = material_vocab.name(material_id);
    caption.clauses.push_back(CaptionClause{
        colors.color_of(material_name).word, material_name,
        part_vocab.name(part_id)});
  }
  caption.rendered_text = render_caption(caption.shape_name, caption.clauses);
  return caption;
}

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> words;
  std::istringstream in(s);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string join_words(std::span<const std::string> words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += " ";
    out += words[i];
  }
  return out;
}

}  // namespace

Caption parse_caption(const std::string& text,
                      const LabelVocabulary& shape_vocab,
                      const LabelVocabulary& part_vocab,
                      const LabelVocabulary& material_vocab,
                      const ColorMap& colors) {
  constexpr const char* kPrefix = "The ";
  constexpr const char* kVerb = " is made of ";
  if (text.rfind(kPrefix, 0) != 0) {
    throw InvalidArgument("parse_caption: missing 'The ' prefix");
  }
  const size_t verb_pos = text.find(kVerb);
  if (verb_pos == std::string::npos) {
    throw InvalidArgument("parse_caption: missing ' is made of '");
  }
  if (text.empty() || text.back() != '.') {
    throw InvalidArgument("parse_caption: missing final period");
  }

  Caption caption;
  caption.shape_name = text.substr(4, verb_pos - 4);
  if (!shape_vocab.find(caption.shape_name)) {
    throw InvalidArgument("parse_caption: unknown shape name '" +
                          caption.shape_name + "'");
  }

  const std::string body =
      text.substr(verb_pos + std::strlen(kVerb),
                  text.size() - verb_pos - std::strlen(kVerb) - 1);
  size_t start = 0;
  while (start <= body.size()) {
    size_t end = body.find(", ", start);
    if (end == std::string::npos) end = body.size();
    const std::string clause_text = body.substr(start, end - start);
    const std::vector<std::string> words = split_words(clause_text);
    if (words.size() < 3) {
      throw InvalidArgument("parse_caption: clause '" + clause_text +
                            "' too short");
    }
    CaptionClause clause;
    clause.color = words[0];
    const auto& palette_words = colors.color_words();
    if (std::find(palette_words.begin(), palette_words.end(), clause.color) ==
        palette_words.end()) {
      throw InvalidArgument("parse_caption: unknown color word '" +
                            clause.color + "'");
    }
    // Longest material match, leaving at least one word for the part.
    bool matched = false;
    for (size_t take = words.size() - 2; take >= 1 && !matched; --take) {
      const std::string candidate =
          join_words(std::span(words).subspan(1, take));
      if (material_vocab.find(candidate)) {
        clause.material = candidate;
        clause.part = join_words(std::span(words).subspan(1 + take));
        matched = true;
      }
    }
    if (!matched) {
      throw InvalidArgument("parse_caption: no material match in clause '" +
                            clause_text + "'");
    }
    if (!part_vocab.find(clause.part)) {
      throw InvalidArgument("parse_caption: unknown part name '" +
                            clause.part + "'");
    }
    caption.clauses.push_back(std::move(clause));
    start = end + 2;
  }
  if (caption.clauses.empty() || caption.clauses.size() > 6) {
    throw InvalidArgument("parse_caption: clause count out of range");
  }
  caption.rendered_text = text;
  return caption;
}

Eigen::VectorXd embed_caption(const Caption& caption,
                              const CaptionTables& tables) {
  const Eigen::Index dim = tables.shape.vectors.cols();
  if (tables.part.vectors.cols() != dim ||
      tables.material.vectors.cols() != dim ||
      tables.color.vectors.cols() != dim) {
    throw InvalidArgument("embed_caption: embedding tables disagree on dim");
  }
  if (caption.clauses.empty()) {
    throw InvalidArgument("embed_caption: caption has no clauses");
  }

  const auto row_of = [](const EmbeddingTable& table, const std::string& name,
                         const char* kind) {
    const auto id = table.names.find(name);
    if (!id) {
      throw InvalidArgument(std::string("embed_caption: unknown ") + kind +
                            " token '" + name + "'");
    }
    return table.vectors.row(*id);
  };

  Eigen::VectorXd sum =
      row_of(tables.shape, caption.shape_name, "shape").transpose();
  for (const CaptionClause& clause : caption.clauses) {
    sum += row_of(tables.color, clause.color, "color").transpose();
    sum += row_of(tables.material, clause.material, "material").transpose();
    sum += row_of(tables.part, clause.part, "part").transpose();
  }
  sum /= static_cast<double>(1 + 3 * caption.clauses.size());
  const double norm = sum.norm();
  if (norm == 0.0) {
    throw InvalidArgument("embed_caption: token mean is the zero vector");
  }
  return sum / norm;
}

template <typename S>
VecX<S> embed_shape(const EncoderParams<S>& params, const PointCloud& cloud) {
  const VecX<S> g = global_feature(params, cloud);
  VecX<S> v = params.retrieval_w * g + params.retrieval_b;
  const S norm = v.norm();
  if (norm == S(0)) {
    throw NumericError("embed_shape: zero embedding before normalization");
  }
  return v / norm;
}

void validate_gallery(const RetrievalGallery& gallery) {
  if (gallery.embeddings.rows() !=
      static_cast<Eigen::Index>(gallery.ids.size())) {
    throw InvalidArgument("gallery: id count does not match embedding rows");
  }
  std::vector<uint32_t> sorted = gallery.ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidArgument("gallery: duplicate shape id");
  }
}

std::vector<uint32_t> retrieve(const Eigen::VectorXd& query,
                               const RetrievalGallery& gallery) {
  if (gallery.ids.empty()) {
    throw InvalidArgument("retrieve: empty gallery");
  }
  if (gallery.embeddings.cols() != query.size()) {
    throw InvalidArgument("retrieve: query dim does not match gallery");
  }
  const Eigen::VectorXd scores = gallery.embeddings * query;
  std::vector<size_t> order(gallery.ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[static_cast<Eigen::Index>(a)] !=
        scores[static_cast<Eigen::Index>(b)]) {
      return scores[static_cast<Eigen::Index>(a)] >
             scores[static_cast<Eigen::Index>(b)];
    }
    return gallery.ids[a] < gallery.ids[b];
  });
  std::vector<uint32_t> ranked;
  ranked.reserve(order.size());
  for (size_t i : order) ranked.push_back(gallery.ids[i]);
  return ranked;
}

double recall_at_k(std::span<const std::vector<uint32_t>> rankings,
                   std::span<const uint32_t> gt, int32_t k) {
  if (k < 1) throw InvalidArgument("recall_at_k: k must be >= 1");
  if (rankings.size() != gt.size()) {
    throw InvalidArgument("recall_at_k: ranking/gt count mismatch");
  }
  if (rankings.empty()) {
    throw InvalidArgument("recall_at_k: no queries");
  }
  size_t hits = 0;
  for (size_t q = 0; q < rankings.size(); ++q) {
    const size_t top = std::min<size_t>(static_cast<size_t>(k),
                                        rankings[q].size());
    for (size_t i = 0; i < top; ++i) {
      if (rankings[q][i] == gt[q]) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

bool classify_top_k(const Eigen::VectorXd& shape_embedding,
                    const Eigen::MatrixXd& class_embeddings, int32_t gt_class,
                    int32_t k) {
  const Eigen::Index c = class_embeddings.rows();
  if (k < 1 || k > c) {
    throw InvalidArgument("classify_top_k: k out of range");
  }
  if (gt_class < 0 || gt_class >= c) {
    throw InvalidArgument("classify_top_k: gt class out of range");
  }
  if (class_embeddings.cols() != shape_embedding.size()) {
    throw InvalidArgument("classify_top_k: dimension mismatch");
  }
  const Eigen::VectorXd scores = class_embeddings * shape_embedding;
  const double gt_score = scores[gt_class];
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < c; ++i) {
    if (i == gt_class) continue;
    if (scores[i] > gt_score || (scores[i] == gt_score && i < gt_class)) {
      ++rank;
    }
  }
  return rank < k;
}

namespace {
constexpr char kGalleryMagic[4] = {'C', '3', 'G', 'L'};
}

void save_gallery(const RetrievalGallery& gallery,
                  const std::filesystem::path& path) {
  validate_gallery(gallery);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError(IoError::Code::kOpenFailed,
                  "cannot open " + path.string() + " for writing");
  }
  binio::write_magic(out, kGalleryMagic);
  binio::write_u32(out, static_cast<uint32_t>(gallery.ids.size()));
  binio::write_u32(out, static_cast<uint32_t>(gallery.embeddings.cols()));
  for (size_t i = 0; i < gallery.ids.size(); ++i) {
    binio::write_u32(out, gallery.ids[i]);
    for (Eigen::Index d = 0; d < gallery.embeddings.cols(); ++d) {
      binio::write_f32(out, static_cast<float>(
                                gallery.embeddings(
                                    static_cast<Eigen::Index>(i), d)));
    }
  }
}

RetrievalGallery load_gallery(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(IoError::Code::kOpenFailed,
                  "cannot open " + path.string() + " for reading");
  }
  binio::expect_magic(in, kGalleryMagic, "gallery");
  const uint32_t m = binio::read_u32(in, "gallery size");
  const uint32_t d = binio::read_u32(in, "gallery dim");
  RetrievalGallery gallery;
  gallery.embeddings.resize(m, d);
  gallery.ids.resize(m);
  for (uint32_t i = 0; i < m; ++i) {
    gallery.ids[i] = binio::read_u32(in, "gallery id");
    for (uint32_t j = 0; j < d; ++j) {
      gallery.embeddings(i, j) = binio::read_f32(in, "gallery value");
    }
    const double norm = gallery.embeddings.row(i).norm();
    if (norm == 0.0 || !std::isfinite(norm)) {
      throw IoError(IoError::Code::kNonFinite,
                    "gallery row " + std::to_string(i) + " not normalizable");
    }
    gallery.embeddings.row(i) /= norm;
  }
  validate_gallery(gallery);
  return gallery;
}

void write_captions(std::span<const CaptionRecord> records,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError(IoError::Code::kOpenFailed,
                  "cannot open " + path.string() + " for writing");
  }
  for (const CaptionRecord& rec : records) {
    nlohmann::ordered_json line;
    line["shape_id"] = rec.shape_id;
    line["k_parts"] = rec.k_parts;
    line["text"] = rec.text;
    out << line.dump() << '\n';
  }
}

std::vector<CaptionRecord> read_captions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError(IoError::Code::kOpenFailed,
                  "cannot open " + path.string() + " for reading");
  }
  std::vector<CaptionRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(IoError::Code::kMalformed,
                    path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
    CaptionRecord rec;
    rec.shape_id = doc.at("shape_id").get<uint32_t>();
    rec.k_parts = doc.at("k_parts").get<int32_t>();
    rec.text = doc.at("text").get<std::string>();
    records.push_back(std::move(rec));
  }
  return records;
}

template <typename S>
void train_retrieval_head(EncoderParams<S>& params, const Dataset& dataset,
                          std::span<const int32_t> train_indices,
                          const Eigen::MatrixXd& caption_embeddings,
                          const RetrievalTrainConfig& cfg) {
  const Eigen::Index n = static_cast<Eigen::Index>(train_indices.size());
  if (caption_embeddings.rows() != n) {
    throw InvalidArgument(
        "train_retrieval_head: caption rows do not match train indices");
  }
  if (caption_embeddings.cols() != params.dims.feature_dim) {
    throw InvalidArgument(
        "train_retrieval_head: caption dim does not match feature dim");
  }
  if (cfg.epochs < 0 || cfg.batch_shapes < 1 || cfg.learning_rate < 0.0) {
    throw InvalidArgument("train_retrieval_head: invalid config");
  }
  if (n == 0) return;

  // The trunk is frozen, so global features are computed once.
  MatX<S> globals(n, params.dims.h2);
  for (Eigen::Index i = 0; i < n; ++i) {
    globals.row(i) =
        global_feature(params, dataset.shapes[static_cast<size_t>(
                                   train_indices[static_cast<size_t>(i)])]
                                   .cloud)
            .transpose();
  }
  const MatX<S> targets = caption_embeddings.cast<S>();

  LossConfig loss_cfg;
  loss_cfg.tau = cfg.tau;
  loss_cfg.gamma = 0.0;

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_stream(cfg.seed, "retrieval-epoch",
                                  static_cast<uint64_t>(epoch)));
    for (size_t i = order.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(shuffle_rng.uniform_int(i));
      std::swap(order[i - 1], order[j]);
    }

    for (Eigen::Index start = 0; start < n; start += cfg.batch_shapes) {
      const Eigen::Index b =
          std::min<Eigen::Index>(cfg.batch_shapes, n - start);
      if (b < 2) continue;  // a singleton batch carries no contrast
      MatX<S> g_batch(b, params.dims.h2);
      MatX<S> table(b, params.dims.feature_dim);
      std::vector<int32_t> labels(static_cast<size_t>(b));
      for (Eigen::Index i = 0; i < b; ++i) {
        g_batch.row(i) = globals.row(order[static_cast<size_t>(start + i)]);
        table.row(i) = targets.row(order[static_cast<size_t>(start + i)]);
        labels[static_cast<size_t>(i)] = static_cast<int32_t>(i);
      }

      MatX<S> v = (g_batch * params.retrieval_w.transpose()).rowwise() +
                  params.retrieval_b.transpose();
      VecX<S> norms = v.rowwise().norm();
      for (Eigen::Index i = 0; i < b; ++i) {
        if (norms[i] == S(0)) {
          throw NumericError("train_retrieval_head: zero embedding", epoch,
                             static_cast<long>(start / cfg.batch_shapes));
        }
      }
      MatX<S> f = (v.array().colwise() / norms.array()).matrix();

      MatX<S> df = loss_gradient_wrt_features(f, table, labels, loss_cfg);
      const VecX<S> dots = (f.array() * df.array()).rowwise().sum();
      MatX<S> dv = df - (f.array().colwise() * dots.array()).matrix();
      dv = (dv.array().colwise() / norms.array()).matrix();

      params.retrieval_w.noalias() -=
          static_cast<S>(cfg.learning_rate) * (dv.transpose() * g_batch);
      params.retrieval_b -= static_cast<S>(cfg.learning_rate) *
                            dv.colwise().sum().transpose();
    }
  }
}

template VecX<float> embed_shape<float>(const EncoderParams<float>&,
                                        const PointCloud&);
template VecX<double> embed_shape<double>(const EncoderParams<double>&,
                                          const PointCloud&);
template void train_retrieval_head<float>(EncoderParams<float>&,
                                          const Dataset&,
                                          std::span<const int32_t>,
                                          const Eigen::MatrixXd&,
                                          const RetrievalTrainConfig&);
template void train_retrieval_head<double>(EncoderParams<double>&,
                                           const Dataset&,
                                           std::span<const int32_t>,
                                           const Eigen::MatrixXd&,
                                           const RetrievalTrainConfig&);

}  // namespace partmat
