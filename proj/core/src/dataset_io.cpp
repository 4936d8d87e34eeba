// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "partmat/dataset_io.hpp"

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "partmat/binio.hpp"

namespace partmat {

namespace {

constexpr char kMagic[4] = {'C', '3', 'D', 'S'};
constexpr uint16_t kVersion = 1;

void write_vocab(std::ostream& out, const LabelVocabulary& vocab) {
  binio::write_u32(out, static_cast<uint32_t>(vocab.size()));
  for (const std::string& name : vocab.names()) {
    binio::write_string16(out, name);
  }
}

LabelVocabulary read_vocab(std::istream& in, uint32_t expected_count,
                           const char* what) {
  const uint32_t count = binio::read_u32(in, what);
  if (count != expected_count) {
    throw IoError(IoError::Code::kMalformed,
                  std::string("vocabulary count mismatch for ") + what);
  }
  std::vector<std::string> names;
  names.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    names.push_back(binio::read_string16(in, what));
  }
  return LabelVocabulary(std::move(names));
}

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  validate_dataset(ds);
  if (ds.part_vocab.size() > UINT16_MAX || ds.material_vocab.size() > UINT16_MAX) {
    throw InvalidArgument("save_dataset: label vocabulary exceeds u16 range");
  }
  if (ds.shape_vocab.size() > UINT16_MAX + 1) {
    throw InvalidArgument("save_dataset: shape vocabulary exceeds u16 range");
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError(IoError::Code::kOpenFailed,
                  "cannot open " + path.string() + " for writing");
  }
  binio::write_magic(out, kMagic);
  binio::write_u16(out, kVersion);
  binio::write_u32(out, static_cast<uint32_t>(ds.shapes.size()));
  binio::write_u32(out, static_cast<uint32_t>(ds.part_vocab.size()));
  binio::write_u32(out, static_cast<uint32_t>(ds.material_vocab.size()));
  binio::write_u32(out, static_cast<uint32_t>(ds.shape_vocab.size()));
  write_vocab(out, ds.part_vocab);
  write_vocab(out, ds.material_vocab);
  write_vocab(out, ds.shape_vocab);

  for (size_t s = 0; s < ds.shapes.size(); ++s) {
    const LabeledShape& shape = ds.shapes[s];
    const Eigen::Index n = shape.cloud.size();
    binio::write_u32(out, static_cast<uint32_t>(n));
    binio::write_u8(out, static_cast<uint8_t>(ds.split_of[s]));
    binio::write_u16(out, static_cast<uint16_t>(shape.shape_class));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) {
        binio::write_f32(out, static_cast<float>(shape.cloud.coordinates(i, c)));
      }
      for (int c = 0; c < 3; ++c) {
        binio::write_f32(out, static_cast<float>(shape.cloud.colors(i, c)));
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      binio::write_u16(out, static_cast<uint16_t>(
                                shape.part_labels[static_cast<size_t>(i)]));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      binio::write_u16(
          out,
          static_cast<uint16_t>(shape.material_labels[static_cast<size_t>(i)]));
    }
  }
  if (!out) {
    throw IoError(IoError::Code::kOpenFailed,
                  "write failure on " + path.string());
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(IoError::Code::kOpenFailed,
                  "cannot open " + path.string() + " for reading");
  }
  binio::expect_magic(in, kMagic, "dataset");
  const uint16_t version = binio::read_u16(in, "version");
  if (version != kVersion) {
    throw IoError(IoError::Code::kBadVersion,
                  "unsupported dataset version " + std::to_string(version));
  }
  const uint32_t n_shapes = binio::read_u32(in, "shape count");
  const uint32_t c_part = binio::read_u32(in, "part class count");
  const uint32_t c_mat = binio::read_u32(in, "material class count");
  const uint32_t c_shape = binio::read_u32(in, "shape class count");

  Dataset ds;
  ds.part_vocab = read_vocab(in, c_part, "part vocabulary");
  ds.material_vocab = read_vocab(in, c_mat, "material vocabulary");
  ds.shape_vocab = read_vocab(in, c_shape, "shape vocabulary");

  ds.shapes.reserve(n_shapes);
  ds.split_of.reserve(n_shapes);
  for (uint32_t s = 0; s < n_shapes; ++s) {
    const uint32_t n = binio::read_u32(in, "point count");
    if (n == 0) {
      throw IoError(IoError::Code::kMalformed,
                    "shape " + std::to_string(s) + " has zero points");
    }
    const uint8_t split = binio::read_u8(in, "split tag");
    if (split > 2) {
      throw IoError(IoError::Code::kMalformed,
                    "shape " + std::to_string(s) + " has invalid split tag");
    }
    const uint16_t shape_class = binio::read_u16(in, "shape class");
    if (shape_class >= c_shape) {
      throw IoError(IoError::Code::kLabelOutOfRange,
                    "shape " + std::to_string(s) +
                        " class id out of vocabulary range");
    }

    LabeledShape shape;
    shape.shape_class = shape_class;
    shape.cloud.coordinates.resize(n, 3);
    shape.cloud.colors.resize(n, 3);
    for (uint32_t i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) {
        shape.cloud.coordinates(i, c) = binio::read_f32(in, "coordinate");
      }
      for (int c = 0; c < 3; ++c) {
        shape.cloud.colors(i, c) = binio::read_f32(in, "color");
      }
    }
    shape.part_labels.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
      const uint16_t label = binio::read_u16(in, "part label");
      if (label >= c_part) {
        throw IoError(IoError::Code::kLabelOutOfRange,
                      "shape " + std::to_string(s) +
                          " part label out of vocabulary range");
      }
      shape.part_labels[i] = label;
    }
    shape.material_labels.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
      const uint16_t label = binio::read_u16(in, "material label");
      if (label >= c_mat) {
        throw IoError(IoError::Code::kLabelOutOfRange,
                      "shape " + std::to_string(s) +
                          " material label out of vocabulary range");
      }
      shape.material_labels[i] = label;
    }
    ds.shapes.push_back(std::move(shape));
    ds.split_of.push_back(static_cast<Split>(split));
  }
  return ds;
}

void export_vocab_json(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto dump = [&](const LabelVocabulary& vocab, const char* file) {
    nlohmann::json arr = nlohmann::json::array();
    for (const std::string& name : vocab.names()) arr.push_back(name);
    std::ofstream out(dir / file);
    if (!out) {
      throw IoError(IoError::Code::kOpenFailed,
                    "cannot open " + (dir / file).string() + " for writing");
    }
    out << arr.dump(2) << '\n';
  };
  dump(ds.part_vocab, "parts.json");
  dump(ds.material_vocab, "materials.json");
  dump(ds.shape_vocab, "classes.json");
}

}  // namespace partmat
