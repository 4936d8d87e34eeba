// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "partmat/generator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "partmat/colormap.hpp"
#include "partmat/rng.hpp"

namespace partmat {

namespace {

constexpr int32_t kMinPointsPerPart = 8;
constexpr int32_t kMaxPartsPerTemplate = 6;
constexpr double kColorNoise = 0.05;

std::string padded_name(const char* prefix, int32_t id, int32_t count) {
  int width = 1;
  for (int32_t v = count - 1; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(id);
  return std::string(prefix) + "_" +
         std::string(static_cast<size_t>(width) - digits.size(), '0') + digits;
}

LabelVocabulary make_vocab(const char* prefix, int32_t count) {
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(count));
  for (int32_t i = 0; i < count; ++i) {
    names.push_back(padded_name(prefix, i, count));
  }
  return LabelVocabulary(std::move(names));
}

/// Largest-remainder apportionment of `total` over non-negative quotas.
/// Ties in the fractional part go to the lower index.
std::vector<int32_t> apportion(const std::vector<double>& quotas,
                               int32_t total) {
  const size_t k = quotas.size();
  std::vector<int32_t> counts(k);
  std::vector<std::pair<double, size_t>> fracs(k);
  int32_t assigned = 0;
  for (size_t i = 0; i < k; ++i) {
    counts[i] = static_cast<int32_t>(std::floor(quotas[i]));
    assigned += counts[i];
    fracs[i] = {quotas[i] - std::floor(quotas[i]), i};
  }
  std::stable_sort(fracs.begin(), fracs.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  for (int32_t r = 0; r < total - assigned; ++r) {
    counts[fracs[static_cast<size_t>(r) % k].second] += 1;
  }
  return counts;
}

/// Weighted sampling without replacement; weights need not be normalized.
std::vector<int32_t> sample_without_replacement(
    Rng& rng, std::vector<std::pair<int32_t, double>> pool, int32_t n) {
  std::vector<int32_t> out;
  out.reserve(static_cast<size_t>(n));
  for (int32_t draw = 0; draw < n && !pool.empty(); ++draw) {
    double total = 0.0;
    for (const auto& [id, w] : pool) total += w;
    double u = rng.uniform() * total;
    size_t pick = pool.size() - 1;
    for (size_t i = 0; i < pool.size(); ++i) {
      u -= pool[i].second;
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    out.push_back(pool[pick].first);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

int32_t sample_weighted(Rng& rng, const std::vector<int32_t>& ids,
                        const std::vector<double>& weights) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.uniform() * total;
  for (size_t i = 0; i < ids.size(); ++i) {
    u -= weights[i];
    if (u <= 0.0) return ids[i];
  }
  return ids.back();
}

enum class Primitive { kBox, kCylinder, kSphereCap };

struct PartTemplate {
  int32_t part_id;
  Primitive primitive;
  Eigen::Vector3d offset;
  std::array<double, 3> size;  // interpretation depends on primitive
  double cap_angle;            // sphere cap half-angle, radians
};

double surface_area(const PartTemplate& p) {
  switch (p.primitive) {
    case Primitive::kBox:
      return 8.0 * (p.size[0] * p.size[1] + p.size[1] * p.size[2] +
                    p.size[2] * p.size[0]);
    case Primitive::kCylinder: {
      const double r = p.size[0], h = p.size[1];
      return 2.0 * std::numbers::pi * r * (h + r);
    }
    case Primitive::kSphereCap: {
      const double r = p.size[0];
      return 2.0 * std::numbers::pi * r * r * (1.0 - std::cos(p.cap_angle));
    }
  }
  return 0.0;
}

Eigen::Vector3d sample_box_surface(Rng& rng, const std::array<double, 3>& he) {
  // Face picked by area; the face pair is +/- along the picked axis.
  const double areas[3] = {he[1] * he[2], he[0] * he[2], he[0] * he[1]};
  const double total = areas[0] + areas[1] + areas[2];
  double u = rng.uniform() * total;
  int axis = 2;
  for (int a = 0; a < 3; ++a) {
    u -= areas[a];
    if (u <= 0.0) {
      axis = a;
      break;
    }
  }
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  Eigen::Vector3d p;
  p[axis] = sign * he[static_cast<size_t>(axis)];
  const int u_axis = (axis + 1) % 3;
  const int v_axis = (axis + 2) % 3;
  p[u_axis] = rng.uniform(-he[static_cast<size_t>(u_axis)],
                          he[static_cast<size_t>(u_axis)]);
  p[v_axis] = rng.uniform(-he[static_cast<size_t>(v_axis)],
                          he[static_cast<size_t>(v_axis)]);
  return p;
}

Eigen::Vector3d sample_cylinder_surface(Rng& rng, double r, double h) {
  const double side = 2.0 * std::numbers::pi * r * h;
  const double caps = 2.0 * std::numbers::pi * r * r;
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  if (rng.uniform() * (side + caps) < side) {
    const double z = rng.uniform(-h / 2.0, h / 2.0);
    return {r * std::cos(phi), r * std::sin(phi), z};
  }
  const double rho = r * std::sqrt(rng.uniform());
  const double z = rng.uniform() < 0.5 ? -h / 2.0 : h / 2.0;
  return {rho * std::cos(phi), rho * std::sin(phi), z};
}

Eigen::Vector3d sample_sphere_cap(Rng& rng, double r, double cap_angle) {
  // cos(theta) uniform over the zone gives area-uniform samples.
  const double cos_theta = rng.uniform(std::cos(cap_angle), 1.0);
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return {r * sin_theta * std::cos(phi), r * sin_theta * std::sin(phi),
          r * cos_theta};
}

Eigen::Vector3d sample_primitive(Rng& rng, const PartTemplate& p) {
  Eigen::Vector3d local;
  switch (p.primitive) {
    case Primitive::kBox:
      local = sample_box_surface(rng, p.size);
      break;
    case Primitive::kCylinder:
      local = sample_cylinder_surface(rng, p.size[0], p.size[1]);
      break;
    case Primitive::kSphereCap:
      local = sample_sphere_cap(rng, p.size[0], p.cap_angle);
      break;
  }
  return p.offset + local;
}

void validate_config(const GeneratorConfig& cfg) {
  if (cfg.n_shape_classes < 1) {
    throw InvalidArgument("generator: n_shape_classes must be >= 1");
  }
  if (cfg.n_part_classes < 2) {
    throw InvalidArgument("generator: n_part_classes must be >= 2");
  }
  if (cfg.n_material_classes < 2) {
    throw InvalidArgument("generator: n_material_classes must be >= 2");
  }
  if (cfg.shapes_total < cfg.n_shape_classes) {
    throw InvalidArgument(
        "generator: shapes_total too small to give every class >= 1 shape");
  }
  if (cfg.points_per_shape < 2 * kMinPointsPerPart) {
    throw InvalidArgument("generator: points_per_shape must be >= " +
                          std::to_string(2 * kMinPointsPerPart));
  }
  if (cfg.zipf_exponent < 0.0 || !std::isfinite(cfg.zipf_exponent)) {
    throw InvalidArgument("generator: zipf_exponent must be >= 0 and finite");
  }
  if (cfg.compositions_per_shape < 1) {
    throw InvalidArgument("generator: compositions_per_shape must be >= 1");
  }
}

}  // namespace

std::vector<int32_t> zipf_class_counts(int32_t n_classes, double exponent,
                                       int32_t total) {
  if (n_classes < 1) throw InvalidArgument("zipf_class_counts: no classes");
  if (total < n_classes) {
    throw InvalidArgument(
        "zipf_class_counts: total too small to give every class >= 1 shape");
  }
  std::vector<double> mass(static_cast<size_t>(n_classes));
  double norm = 0.0;
  for (int32_t r = 1; r <= n_classes; ++r) {
    mass[static_cast<size_t>(r - 1)] = std::pow(static_cast<double>(r), -exponent);
    norm += mass[static_cast<size_t>(r - 1)];
  }
  std::vector<double> quotas(static_cast<size_t>(n_classes));
  for (size_t i = 0; i < quotas.size(); ++i) {
    quotas[i] = static_cast<double>(total) * mass[i] / norm;
  }
  std::vector<int32_t> counts = apportion(quotas, total);
  for (int32_t c : counts) {
    if (c < 1) {
      throw InvalidArgument(
          "zipf_class_counts: total too small to give every class >= 1 shape "
          "at this exponent");
    }
  }
  return counts;
}

Dataset generate_synthetic_dataset(const GeneratorConfig& cfg) {
  validate_config(cfg);

  Dataset ds;
  ds.shape_vocab = make_vocab("class", cfg.n_shape_classes);
  ds.part_vocab = make_vocab("part", cfg.n_part_classes);
  ds.material_vocab = make_vocab("material", cfg.n_material_classes);
  const ColorMap colors = ColorMap::for_materials(ds.material_vocab);

  const std::vector<int32_t> class_counts =
      zipf_class_counts(cfg.n_shape_classes, cfg.zipf_exponent, cfg.shapes_total);

  // Per-part material compatibility, fixed at generation time.
  std::vector<std::vector<int32_t>> compat(
      static_cast<size_t>(cfg.n_part_classes));
  for (int32_t p = 0; p < cfg.n_part_classes; ++p) {
    Rng rng(derive_stream(cfg.seed, "compat", static_cast<uint64_t>(p)));
    const int32_t max_size = std::min<int32_t>(6, cfg.n_material_classes);
    const int32_t size =
        2 + static_cast<int32_t>(rng.uniform_int(
                static_cast<uint64_t>(max_size - 1)));
    std::vector<std::pair<int32_t, double>> pool;
    for (int32_t m = 0; m < cfg.n_material_classes; ++m) pool.push_back({m, 1.0});
    auto subset = sample_without_replacement(rng, std::move(pool), size);
    std::sort(subset.begin(), subset.end());
    compat[static_cast<size_t>(p)] = std::move(subset);
  }

  // Class templates: part set, primitive geometry, and per-part offsets are
  // fixed per class so same-class shapes share layout.
  const int32_t max_parts =
      std::min<int32_t>({kMaxPartsPerTemplate, cfg.n_part_classes,
                         cfg.points_per_shape / kMinPointsPerPart});
  std::vector<std::vector<PartTemplate>> templates(
      static_cast<size_t>(cfg.n_shape_classes));
  for (int32_t k = 0; k < cfg.n_shape_classes; ++k) {
    Rng rng(derive_stream(cfg.seed, "template", static_cast<uint64_t>(k)));
    const int32_t n_parts =
        2 + static_cast<int32_t>(
                rng.uniform_int(static_cast<uint64_t>(max_parts - 1)));
    std::vector<std::pair<int32_t, double>> pool;
    for (int32_t p = 0; p < cfg.n_part_classes; ++p) {
      pool.push_back({p, std::pow(static_cast<double>(p + 1),
                                  -cfg.zipf_exponent)});
    }
    const std::vector<int32_t> parts =
        sample_without_replacement(rng, std::move(pool), n_parts);

    std::vector<PartTemplate>& tmpl = templates[static_cast<size_t>(k)];
    for (int32_t part_id : parts) {
      PartTemplate pt;
      pt.part_id = part_id;
      pt.primitive = static_cast<Primitive>(rng.uniform_int(3));
      pt.offset = {rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6),
                   rng.uniform(-0.6, 0.6)};
      switch (pt.primitive) {
        case Primitive::kBox:
          pt.size = {rng.uniform(0.08, 0.35), rng.uniform(0.08, 0.35),
                     rng.uniform(0.08, 0.35)};
          pt.cap_angle = 0.0;
          break;
        case Primitive::kCylinder:
          pt.size = {rng.uniform(0.06, 0.25), rng.uniform(0.15, 0.7), 0.0};
          pt.cap_angle = 0.0;
          break;
        case Primitive::kSphereCap:
          pt.size = {rng.uniform(0.1, 0.3), 0.0, 0.0};
          pt.cap_angle = rng.uniform(std::numbers::pi / 4.0, std::numbers::pi);
          break;
      }
      tmpl.push_back(pt);
    }
  }

  // Point budget per part: proportional to surface area, floor of
  // kMinPointsPerPart, exact total.
  std::vector<std::vector<int32_t>> class_part_points(
      static_cast<size_t>(cfg.n_shape_classes));
  for (int32_t k = 0; k < cfg.n_shape_classes; ++k) {
    const auto& tmpl = templates[static_cast<size_t>(k)];
    std::vector<double> areas;
    double total_area = 0.0;
    for (const auto& pt : tmpl) {
      areas.push_back(surface_area(pt));
      total_area += areas.back();
    }
    std::vector<double> quotas;
    for (double a : areas) {
      quotas.push_back(static_cast<double>(cfg.points_per_shape) * a /
                       total_area);
    }
    std::vector<int32_t> counts = apportion(quotas, cfg.points_per_shape);
    // Rebalance up to the minimum from the currently largest part.
    for (size_t i = 0; i < counts.size(); ++i) {
      while (counts[i] < kMinPointsPerPart) {
        size_t largest = 0;
        for (size_t j = 1; j < counts.size(); ++j) {
          if (counts[j] > counts[largest]) largest = j;
        }
        counts[largest] -= 1;
        counts[i] += 1;
      }
    }
    class_part_points[static_cast<size_t>(k)] = std::move(counts);
  }

  const int64_t compositions = cfg.compositions_per_shape;
  ds.shapes.reserve(static_cast<size_t>(cfg.shapes_total * compositions));
  int64_t geometry_index = 0;
  for (int32_t k = 0; k < cfg.n_shape_classes; ++k) {
    const auto& tmpl = templates[static_cast<size_t>(k)];
    const auto& part_points = class_part_points[static_cast<size_t>(k)];
    for (int32_t rep = 0; rep < class_counts[static_cast<size_t>(k)]; ++rep) {
      // Geometry is drawn once per shape index; each composition re-draws
      // materials and colors on the same points.
      Rng geom_rng(derive_stream(cfg.seed, "shape-geom",
                                 static_cast<uint64_t>(geometry_index)));
      PointCloud cloud;
      cloud.coordinates.resize(cfg.points_per_shape, 3);
      std::vector<int32_t> part_labels(
          static_cast<size_t>(cfg.points_per_shape));
      std::vector<std::pair<int32_t, int32_t>> part_ranges;  // [begin, end)
      int32_t row = 0;
      for (size_t pi = 0; pi < tmpl.size(); ++pi) {
        const int32_t begin = row;
        for (int32_t j = 0; j < part_points[pi]; ++j, ++row) {
          cloud.coordinates.row(row) = sample_primitive(geom_rng, tmpl[pi]);
          part_labels[static_cast<size_t>(row)] = tmpl[pi].part_id;
        }
        part_ranges.push_back({begin, row});
      }

      for (int64_t comp = 0; comp < compositions; ++comp) {
        Rng style_rng(derive_stream(
            cfg.seed, "shape-style",
            static_cast<uint64_t>(geometry_index * compositions + comp)));
        LabeledShape shape;
        shape.shape_class = k;
        shape.part_labels = part_labels;
        shape.material_labels.resize(
            static_cast<size_t>(cfg.points_per_shape));
        shape.cloud.coordinates = cloud.coordinates;
        shape.cloud.colors.resize(cfg.points_per_shape, 3);
        for (size_t pi = 0; pi < tmpl.size(); ++pi) {
          const auto& subset = compat[static_cast<size_t>(tmpl[pi].part_id)];
          std::vector<double> weights;
          for (int32_t m : subset) {
            weights.push_back(
                std::pow(static_cast<double>(m + 1), -cfg.zipf_exponent));
          }
          const int32_t material = sample_weighted(style_rng, subset, weights);
          const auto& rgb = colors.color_of_id(material).rgb;
          for (int32_t r = part_ranges[pi].first; r < part_ranges[pi].second;
               ++r) {
            shape.material_labels[static_cast<size_t>(r)] = material;
            for (int c = 0; c < 3; ++c) {
              const double noisy =
                  rgb[static_cast<size_t>(c)] +
                  style_rng.uniform(-kColorNoise, kColorNoise);
              shape.cloud.colors(r, c) = std::clamp(noisy, 0.0, 1.0);
            }
          }
        }
        shape.cloud = normalize_cloud(shape.cloud);
        ds.shapes.push_back(std::move(shape));
      }
      ++geometry_index;
    }
  }

  ds.split_of.assign(ds.shapes.size(), Split::kTrain);
  return ds;
}

Dataset split_dataset(Dataset ds, double train_frac, double valid_frac,
                      double test_frac, uint64_t seed) {
  if (train_frac < 0.0 || valid_frac < 0.0 || test_frac < 0.0) {
    throw InvalidArgument("split_dataset: fractions must be >= 0");
  }
  if (std::abs(train_frac + valid_frac + test_frac - 1.0) > 1e-9) {
    throw InvalidArgument("split_dataset: fractions must sum to 1");
  }

  std::vector<std::vector<int32_t>> by_class(
      static_cast<size_t>(ds.shape_vocab.size()));
  for (size_t i = 0; i < ds.shapes.size(); ++i) {
    by_class[static_cast<size_t>(ds.shapes[i].shape_class)].push_back(
        static_cast<int32_t>(i));
  }

  for (size_t k = 0; k < by_class.size(); ++k) {
    auto& members = by_class[k];
    if (members.empty()) continue;
    Rng rng(derive_stream(seed, "split", static_cast<uint64_t>(k)));
    for (size_t i = members.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(rng.uniform_int(i));
      std::swap(members[i - 1], members[j]);
    }
    const int32_t n = static_cast<int32_t>(members.size());
    std::vector<int32_t> counts =
        apportion({train_frac * n, valid_frac * n, test_frac * n}, n);
    // Every non-empty class contributes at least one training shape.
    while (counts[0] < 1) {
      if (counts[1] >= counts[2] && counts[1] > 0) {
        counts[1] -= 1;
      } else {
        counts[2] -= 1;
      }
      counts[0] += 1;
    }
    int32_t pos = 0;
    for (int32_t s = 0; s < 3; ++s) {
      for (int32_t j = 0; j < counts[static_cast<size_t>(s)]; ++j, ++pos) {
        ds.split_of[static_cast<size_t>(members[static_cast<size_t>(pos)])] =
            static_cast<Split>(s);
      }
    }
  }
  return ds;
}

}  // namespace partmat
