// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "partmat/embedding.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "partmat/binio.hpp"
#include "partmat/rng.hpp"

namespace partmat {

namespace {
constexpr char kMagic[4] = {'C', '3', 'E', 'M'};
}

Eigen::MatrixXd normalize_rows(Eigen::MatrixXd matrix) {
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    const double norm = matrix.row(r).norm();
    if (norm == 0.0) {
      throw InvalidArgument("normalize_rows: row " + std::to_string(r) +
                            " is zero");
    }
    matrix.row(r) /= norm;
  }
  return matrix;
}

EmbeddingTable synth_embeddings(const LabelVocabulary& vocab, int32_t dim,
                                uint64_t seed) {
  if (dim < 2) throw InvalidArgument("synth_embeddings: dim must be >= 2");
  EmbeddingTable table;
  table.names = vocab;
  table.vectors.resize(vocab.size(), dim);
  for (int32_t c = 0; c < vocab.size(); ++c) {
    Rng rng(derive_stream(seed, vocab.name(c)));
    for (int32_t d = 0; d < dim; ++d) {
      table.vectors(c, d) = rng.normal();
    }
  }
  table.vectors = normalize_rows(std::move(table.vectors));
  return table;
}

namespace {

EmbeddingTable from_named_rows(
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& rows,
    const LabelVocabulary& vocab, const std::string& origin) {
  if (rows.empty()) {
    throw IoError(IoError::Code::kMalformed, origin + ": no embeddings");
  }
  const Eigen::Index dim = rows.front().second.size();
  if (dim < 1) {
    throw IoError(IoError::Code::kDimMismatch, origin + ": empty vector");
  }

  EmbeddingTable table;
  table.names = vocab;
  table.vectors.resize(vocab.size(), dim);
  std::vector<bool> seen(static_cast<size_t>(vocab.size()), false);
  for (const auto& [name, vec] : rows) {
    if (vec.size() != dim) {
      throw IoError(IoError::Code::kDimMismatch,
                    origin + ": dimension mismatch for '" + name + "' (" +
                        std::to_string(vec.size()) + " vs " +
                        std::to_string(dim) + ")");
    }
    if (!vec.allFinite()) {
      throw IoError(IoError::Code::kNonFinite,
                    origin + ": non-finite value in row '" + name + "'");
    }
    const auto id = vocab.find(name);
    if (!id) {
      throw IoError(IoError::Code::kMissingName,
                    origin + ": name '" + name + "' not in vocabulary");
    }
    if (seen[static_cast<size_t>(*id)]) {
      throw IoError(IoError::Code::kMalformed,
                    origin + ": duplicate row for '" + name + "'");
    }
    seen[static_cast<size_t>(*id)] = true;
    table.vectors.row(*id) = vec;
  }
  for (int32_t c = 0; c < vocab.size(); ++c) {
    if (!seen[static_cast<size_t>(c)]) {
      throw IoError(IoError::Code::kMissingName,
                    origin + ": missing embedding for '" + vocab.name(c) + "'");
    }
  }
  table.vectors = normalize_rows(std::move(table.vectors));
  return table;
}

EmbeddingTable load_binary(std::ifstream& in, const LabelVocabulary& vocab,
                           const std::string& origin) {
  binio::expect_magic(in, kMagic, "embedding");
  const uint32_t count = binio::read_u32(in, "embedding count");
  const uint32_t dim = binio::read_u32(in, "embedding dim");
  std::vector<std::pair<std::string, Eigen::VectorXd>> rows;
  rows.reserve(count);
  for (uint32_t c = 0; c < count; ++c) {
    std::string name = binio::read_string16(in, "embedding name");
    Eigen::VectorXd vec(dim);
    for (uint32_t d = 0; d < dim; ++d) {
      vec[d] = binio::read_f32(in, "embedding value");
    }
    rows.emplace_back(std::move(name), std::move(vec));
  }
  return from_named_rows(rows, vocab, origin);
}

EmbeddingTable load_json(const std::filesystem::path& path,
                         const LabelVocabulary& vocab,
                         const std::string& origin) {
  std::ifstream in(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(IoError::Code::kMalformed,
                  origin + ": JSON parse failure: " + e.what());
  }
  if (!doc.is_object()) {
    throw IoError(IoError::Code::kMalformed,
                  origin + ": expected a JSON object of name -> vector");
  }
  std::vector<std::pair<std::string, Eigen::VectorXd>> rows;
  for (const auto& [name, value] : doc.items()) {
    if (!value.is_array()) {
      throw IoError(IoError::Code::kMalformed,
                    origin + ": row '" + name + "' is not an array");
    }
    Eigen::VectorXd vec(value.size());
    for (size_t d = 0; d < value.size(); ++d) {
      if (!value[d].is_number()) {
        throw IoError(IoError::Code::kNonFinite,
                      origin + ": non-numeric value in row '" + name + "'");
      }
      vec[static_cast<Eigen::Index>(d)] = value[d].get<double>();
    }
    rows.emplace_back(name, std::move(vec));
  }
  return from_named_rows(rows, vocab, origin);
}

}  // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               const LabelVocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(IoError::Code::kOpenFailed,
                  "cannot open " + path.string() + " for reading");
  }
  char head[4] = {0, 0, 0, 0};
  in.read(head, 4);
  in.clear();
  in.seekg(0);
  const std::string origin = path.string();
  if (in.gcount() == 4 && head[0] == 'C' && head[1] == '3' && head[2] == 'E' &&
      head[3] == 'M') {
    return load_binary(in, vocab, origin);
  }
  in.close();
  return load_json(path, vocab, origin);
}

void save_embeddings(const EmbeddingTable& table,
                     const std::filesystem::path& path,
                     EmbeddingFormat format) {
  if (format == EmbeddingFormat::kJson) {
    nlohmann::ordered_json doc;
    for (int32_t c = 0; c < table.names.size(); ++c) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index d = 0; d < table.vectors.cols(); ++d) {
        row.push_back(table.vectors(c, d));
      }
      doc[table.names.name(c)] = row;
    }
    std::ofstream out(path);
    if (!out) {
      throw IoError(IoError::Code::kOpenFailed,
                    "cannot open " + path.string() + " for writing");
    }
    out << doc.dump(2) << '\n';
    return;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError(IoError::Code::kOpenFailed,
                  "cannot open " + path.string() + " for writing");
  }
  binio::write_magic(out, kMagic);
  binio::write_u32(out, static_cast<uint32_t>(table.names.size()));
  binio::write_u32(out, static_cast<uint32_t>(table.vectors.cols()));
  for (int32_t c = 0; c < table.names.size(); ++c) {
    binio::write_string16(out, table.names.name(c));
    for (Eigen::Index d = 0; d < table.vectors.cols(); ++d) {
      binio::write_f32(out, static_cast<float>(table.vectors(c, d)));
    }
  }
}

}  // namespace partmat
