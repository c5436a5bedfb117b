// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#include "raydf/ray_fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>

#include "raydf/error.hpp"

namespace raydf {

IntersectionSet::IntersectionSet(std::vector<double> hits) : hits_(std::move(hits)) {
  for (std::size_t i = 0; i < hits_.size(); ++i) {
    if (!std::isfinite(hits_[i]) || hits_[i] < 0.0)
      throw DataError("intersection parameters must be finite and non-negative");
    if (i > 0 && !(hits_[i] > hits_[i - 1]))
      throw DataError("intersection parameters must be strictly increasing");
  }
}

FieldKind FieldKind::orf(double r) {
  if (!(r > 0.0)) throw UsageError("ORF radius must be positive");
  return {Type::Orf, r};
}

FieldKind FieldKind::parse(const std::string& text) {
  if (text == "udf") return scene_udf();
  if (text == "urdf") return urdf();
  if (text == "srdf") return srdf();
  if (text == "drdf") return drdf();
  if (text.rfind("orf:", 0) == 0) {
    double r = 0.0;
    try {
      std::size_t used = 0;
      r = std::stod(text.substr(4), &used);
      if (used != text.size() - 4) throw std::invalid_argument(text);
    } catch (const std::logic_error&) {
      throw UsageError("bad ORF radius in '" + text + "'");
    }
    return orf(r);
  }
  throw UsageError("unknown field kind '" + text + "' (expected udf|urdf|srdf|drdf|orf:R)");
}

std::string FieldKind::name() const {
  switch (type) {
    case Type::SceneUdf: return "udf";
    case Type::Urdf: return "urdf";
    case Type::Srdf: return "srdf";
    case Type::Drdf: return "drdf";
    case Type::Orf: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "orf:%.9g", radius);
      return buf;
    }
  }
  return "?";
}

namespace {

void require_hits(std::span<const double> hits) {
  if (hits.empty()) throw DataError("no intersections on ray");
}

}  // namespace

double urdf_at(std::span<const double> hits, double z) {
  require_hits(hits);
  const auto it = std::lower_bound(hits.begin(), hits.end(), z);
  double best = std::numeric_limits<double>::infinity();
  if (it != hits.end()) best = *it - z;
  if (it != hits.begin()) best = std::min(best, z - *(it - 1));
  return best;
}

double srdf_at(std::span<const double> hits, double z) {
  const double magnitude = urdf_at(hits, z);
  if (magnitude == 0.0) return 0.0;
  const auto at_or_before = std::upper_bound(hits.begin(), hits.end(), z) - hits.begin();
  return (at_or_before % 2 == 1) ? -magnitude : magnitude;
}

double drdf_at(std::span<const double> hits, double z) {
  require_hits(hits);
  const auto it = std::lower_bound(hits.begin(), hits.end(), z);
  if (it == hits.end()) return hits.back() - z;
  if (it == hits.begin()) return *it - z;
  const double ahead = *it - z;
  const double behind = z - *(it - 1);
  return (behind < ahead) ? -behind : ahead;
}

double orf_at(std::span<const double> hits, double z, double r) {
  if (!(r > 0.0)) throw UsageError("ORF radius must be positive");
  if (hits.empty()) return 0.0;
  const auto it = std::lower_bound(hits.begin(), hits.end(), z);
  if (it != hits.end() && *it - z < r) return 1.0;
  if (it != hits.begin() && z - *(it - 1) < r) return 1.0;
  return 0.0;
}

double ray_field_at(const FieldKind& kind, std::span<const double> hits, double z) {
  switch (kind.type) {
    case FieldKind::Type::Urdf: return urdf_at(hits, z);
    case FieldKind::Type::Srdf: return srdf_at(hits, z);
    case FieldKind::Type::Drdf: return drdf_at(hits, z);
    case FieldKind::Type::Orf: return orf_at(hits, z, kind.radius);
    case FieldKind::Type::SceneUdf: break;
  }
  throw UsageError("scene UDF is not a ray function");
}

double scene_udf_at(const Bvh& bvh, const Vec3& p) { return nearest_point(bvh, p).distance; }

Truncation Truncation::parse(const std::string& text) {
  if (text == "none") return none();
  Mode mode = Mode::Hard;
  std::string number = text;
  if (text.rfind("hard:", 0) == 0) {
    number = text.substr(5);
  } else if (text.rfind("log:", 0) == 0) {
    mode = Mode::Log;
    number = text.substr(4);
  }
  double b = 0.0;
  try {
    std::size_t used = 0;
    b = std::stod(number, &used);
    if (used != number.size()) throw std::invalid_argument(number);
  } catch (const std::logic_error&) {
    throw UsageError("bad truncation '" + text + "' (expected none|B|hard:B|log:B)");
  }
  if (!(b > 0.0)) throw UsageError("truncation bound must be positive");
  return {mode, b};
}

double truncate(double d, const Truncation& t) {
  if (t.mode == Truncation::Mode::None) return d;
  if (!(t.bound > 0.0)) throw UsageError("truncation bound must be positive");
  const double a = std::abs(d);
  if (a <= t.bound) return d;
  const double clipped =
      (t.mode == Truncation::Mode::Hard) ? t.bound : t.bound * (1.0 + std::log(a / t.bound));
  return std::copysign(std::min(a, clipped), d);
}

double miss_value(const FieldKind& kind, const Truncation& t, const Camera& camera) {
  switch (kind.type) {
    case FieldKind::Type::Orf:
    case FieldKind::Type::Srdf: return 0.0;
    default: break;
  }
  return t.mode == Truncation::Mode::None ? camera.far : t.bound;
}

std::vector<std::vector<double>> grid_intersections(const Bvh& bvh, const FrustumGrid& grid,
                                                    double t_max) {
  std::vector<std::vector<double>> out(grid.num_rays());
  const auto n = static_cast<std::int64_t>(grid.num_rays());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) out[i] = ray_intersections(bvh, grid.rays[i], t_max);
  return out;
}

namespace {

// Fills the D values of one ray. ORF is an indicator and is never truncated.
void fill_ray(const Bvh& bvh, const Ray& ray, std::span<const double> depths,
              const FieldKind& kind, const Truncation& truncation, const Camera& camera,
              double* out) {
  const std::size_t d = depths.size();
  const auto hits = ray_intersections(bvh, ray, camera.far);
  // The scene UDF does not depend on the ray's own hits.
  if (hits.empty() && kind.is_ray_function()) {
    std::fill(out, out + d, miss_value(kind, truncation, camera));
    return;
  }
  for (std::size_t k = 0; k < d; ++k) {
    switch (kind.type) {
      case FieldKind::Type::SceneUdf:
        out[k] = truncate(scene_udf_at(bvh, ray.at(depths[k])), truncation);
        break;
      case FieldKind::Type::Orf:
        out[k] = orf_at(hits, depths[k], kind.radius);
        break;
      default:
        out[k] = truncate(ray_field_at(kind, hits, depths[k]), truncation);
    }
  }
}

FieldVolume make_volume(const Camera& camera, const FrustumGrid& grid, const FieldKind& kind,
                        const Truncation& truncation) {
  FieldVolume vol;
  vol.kind = kind;
  vol.camera = camera;
  vol.rows = grid.rows;
  vol.cols = grid.cols;
  vol.depths = grid.depths;
  vol.truncation = truncation;
  vol.values.resize(grid.num_rays() * grid.depths.size());
  return vol;
}

}  // namespace

FieldVolume evaluate_field(const Bvh& bvh, const Camera& camera, int rows, int cols, int depths,
                           const FieldKind& kind, const Truncation& truncation) {
  const FrustumGrid grid = frustum_grid(camera, rows, cols, depths);
  FieldVolume vol = make_volume(camera, grid, kind, truncation);
  const auto n = static_cast<std::int64_t>(grid.num_rays());
  const std::size_t d = grid.depths.size();
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i)
    fill_ray(bvh, grid.rays[i], grid.depths, kind, truncation, camera, vol.values.data() + i * d);
  return vol;
}

FieldVolume evaluate_field_serial(const Bvh& bvh, const Camera& camera, int rows, int cols,
                                  int depths, const FieldKind& kind,
                                  const Truncation& truncation) {
  const FrustumGrid grid = frustum_grid(camera, rows, cols, depths);
  FieldVolume vol = make_volume(camera, grid, kind, truncation);
  const std::size_t d = grid.depths.size();
  for (std::size_t i = 0; i < grid.num_rays(); ++i)
    fill_ray(bvh, grid.rays[i], grid.depths, kind, truncation, camera, vol.values.data() + i * d);
  return vol;
}

std::vector<TrainingSample> sample_training_points(const Ray& ray, const IntersectionSet& hits,
                                                   double t_max, const FieldKind& kind,
                                                   std::uint64_t seed) {
  if (hits.empty()) throw DataError("no intersections on ray");
  if (!(t_max > 0.0)) throw UsageError("t_max must be positive");
  if (!kind.is_ray_function()) throw UsageError("training targets require a ray function");
  std::mt19937_64 rng(seed);
  std::vector<TrainingSample> out;
  out.reserve(hits.size() * kSamplesPerHit + kUniformSamples);
  auto push = [&](double depth) {
    out.push_back({ray.at(depth), depth, ray_field_at(kind, hits.hits(), depth)});
  };
  for (double h : hits.hits()) {
    std::normal_distribution<double> around(h, kHitSampleSigma);
    for (int i = 0; i < kSamplesPerHit; ++i) push(std::clamp(around(rng), 0.0, t_max));
  }
  std::uniform_real_distribution<double> uniform(0.0, t_max);
  for (int i = 0; i < kUniformSamples; ++i) push(uniform(rng));
  return out;
}

std::vector<std::uint64_t> hit_histogram(const Bvh& bvh, std::span<const Ray> rays, double t_max) {
  std::vector<std::size_t> counts(rays.size());
  const auto n = static_cast<std::int64_t>(rays.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) counts[i] = ray_intersections(bvh, rays[i], t_max).size();
  std::size_t max_hits = 0;
  for (auto c : counts) max_hits = std::max(max_hits, c);
  std::vector<std::uint64_t> hist(max_hits + 1, 0);
  for (auto c : counts) ++hist[c];
  return hist;
}

namespace {

template <typename DefiningPoint>
ReceptiveSpread spread_impl(const Camera& camera, const Ray& ray, double pu, double pv,
                            std::span<const double> depths, DefiningPoint&& defining) {
  ReceptiveSpread out;
  for (double z : depths) {
    const auto q = defining(ray.at(z), z);
    if (!q) continue;
    ++out.samples;
    const Vec3 pc = camera.pose.to_camera(*q);
    if (!(pc.z > 0.0)) {
      ++out.behind_camera;
      continue;
    }
    const Projection proj = camera.project(*q);
    out.max_pixels = std::max(out.max_pixels, std::hypot(proj.u - pu, proj.v - pv));
  }
  return out;
}

}  // namespace

ReceptiveSpread receptive_spread(const Bvh& bvh, const Camera& camera, const Ray& ray,
                                 double pixel_u, double pixel_v,
                                 std::span<const double> sample_depths) {
  return spread_impl(camera, ray, pixel_u, pixel_v, sample_depths,
                     [&](const Vec3& p, double) -> std::optional<Vec3> {
                       return nearest_point(bvh, p).point;
                     });
}

ReceptiveSpread ray_receptive_spread(const Bvh& bvh, const Camera& camera, const Ray& ray,
                                     double pixel_u, double pixel_v,
                                     std::span<const double> sample_depths) {
  const auto hits = ray_intersections(bvh, ray, camera.far);
  return spread_impl(camera, ray, pixel_u, pixel_v, sample_depths,
                     [&](const Vec3&, double z) -> std::optional<Vec3> {
                       if (hits.empty()) return std::nullopt;
                       // Nearest hit on the ray defines every ray distance function at z.
                       const double d = drdf_at(hits, z);
                       return ray.at(z + d);
                     });
}

}  // namespace raydf
