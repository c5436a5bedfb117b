// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "raydf/decoding.hpp"
#include "raydf/geometry.hpp"

namespace raydf {

struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  /// Throws DataError on a non-finite coordinate.
  void validate() const;
};

/// Uniform hash grid over a fixed point set for exact nearest-neighbour
/// distance queries.
class PointGrid {
 public:
  /// cell_size <= 0 picks a size giving a few points per occupied cell.
  explicit PointGrid(std::span<const Vec3> points, double cell_size = 0.0);

  /// Euclidean distance to the nearest stored point; +inf when empty.
  double nearest_distance(const Vec3& q) const;
  double cell_size() const { return cell_; }

 private:
  struct Key {
    std::int64_t x, y, z;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  Key key_of(const Vec3& p) const;

  std::span<const Vec3> points_;
  double cell_ = 1.0;
  Key lo_{0, 0, 0};
  Key hi_{-1, -1, -1};
  std::vector<std::uint32_t> order_;
  std::unordered_map<Key, std::pair<std::uint32_t, std::uint32_t>, KeyHash> cells_;
};

/// For every query point, the distance to the nearest point of `targets`.
std::vector<double> nearest_distances(std::span<const Vec3> queries, std::span<const Vec3> targets);
std::vector<double> nearest_distances_serial(std::span<const Vec3> queries,
                                             std::span<const Vec3> targets);

/// Symmetric Chamfer-L1: mean of the two directed mean nearest distances.
/// Throws DataError("empty point set") when either cloud is empty.
double chamfer_l1(const PointCloud& pred, const PointCloud& gt);

/// Fraction of scenes with error strictly below each threshold.
std::vector<std::pair<double, double>> chamfer_curve(std::span<const double> per_scene_errors,
                                                     std::span<const double> thresholds);

/// Evenly spaced thresholds on [0, 1] m.
std::vector<double> default_curve_thresholds(int count = 101);

struct Prf {
  double acc = 0.0;  // percent
  double cmp = 0.0;  // percent
  double f1 = 0.0;   // percent
  double t = 0.0;    // meters
};

/// Harmonic mean of two percentages, 0 when both are 0.
double f1_score(double acc, double cmp);

/// Accuracy, completeness and F1 of point clouds at distance threshold t.
Prf scene_prf(const PointCloud& pred, const PointCloud& gt, double t);

enum class RayMode { All, Occluded };
RayMode parse_ray_mode(const std::string& text);

/// Mean per-ray Acc/Cmp/F1 with 1-D depth matching. Occluded mode drops the
/// first hit of every ray on both sides. Throws UsageError on grid mismatch.
Prf ray_prf(const SurfaceSet& pred, const SurfaceSet& gt, double t, RayMode mode);

/// One point per (ray, depth) of the surface set, rays laid out as frustum_rays.
PointCloud surface_points(const SurfaceSet& surfaces, const Camera& camera);

/// Uniform subsample without replacement, order preserved; returns the input
/// when it has at most `count` points.
PointCloud subsample(const PointCloud& cloud, std::size_t count, std::uint64_t seed);

inline constexpr std::size_t kChamferPoints = 30000;

struct MetricsReport {
  double chamfer_mean = 0.0;
  std::vector<std::pair<double, double>> chamfer_curve;
  Prf scene;
  Prf ray_all;
  Prf ray_occluded;
};

/// Full report for one scene: both surface sets are lifted with `camera`,
/// subsampled to kChamferPoints and compared.
MetricsReport evaluate_surfaces(const SurfaceSet& pred, const SurfaceSet& gt, const Camera& camera,
                                double scene_t, double ray_t, std::uint64_t seed);

}  // namespace raydf
