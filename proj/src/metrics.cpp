// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#include "raydf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "raydf/error.hpp"

namespace raydf {

void PointCloud::validate() const {
  for (const auto& p : points)
    if (!is_finite(p)) throw DataError("point cloud has a non-finite coordinate");
}

std::size_t PointGrid::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
  h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
  h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
  return static_cast<std::size_t>(h);
}

PointGrid::Key PointGrid::key_of(const Vec3& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x / cell_)),
          static_cast<std::int64_t>(std::floor(p.y / cell_)),
          static_cast<std::int64_t>(std::floor(p.z / cell_))};
}

PointGrid::PointGrid(std::span<const Vec3> points, double cell_size) : points_(points) {
  if (points.empty()) return;
  if (points.size() > std::numeric_limits<std::uint32_t>::max())
    throw UsageError("point set too large for the grid");
  Aabb box;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      throw DataError("non-finite point in cloud");
    box.extend(p);
  }
  if (cell_size > 0.0) {
    cell_ = cell_size;
  } else {
    // About two points per cell for a surface-like distribution.
    const Vec3 ext = box.hi - box.lo;
    const double area = ext.x * ext.y + ext.y * ext.z + ext.z * ext.x;
    const double diag = length(ext);
    cell_ = area > 0.0 ? std::sqrt(2.0 * area / static_cast<double>(points.size())) : diag;
    if (!(cell_ > 0.0)) cell_ = 1.0;
    cell_ = std::max(cell_, diag * 1e-6);
  }
  lo_ = key_of(box.lo);
  hi_ = key_of(box.hi);

  std::vector<Key> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) keys[i] = key_of(points[i]);
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), 0u);
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    const Key& ka = keys[a];
    const Key& kb = keys[b];
    if (ka.x != kb.x) return ka.x < kb.x;
    if (ka.y != kb.y) return ka.y < kb.y;
    if (ka.z != kb.z) return ka.z < kb.z;
    return a < b;
  };
  std::sort(order_.begin(), order_.end(), less);
  std::uint32_t begin = 0;
  for (std::uint32_t i = 1; i <= order_.size(); ++i) {
    if (i == order_.size() || !(keys[order_[i]] == keys[order_[begin]])) {
      cells_.emplace(keys[order_[begin]], std::make_pair(begin, i));
      begin = i;
    }
  }
}

double PointGrid::nearest_distance(const Vec3& q) const {
  if (points_.empty()) return std::numeric_limits<double>::infinity();
  if (!std::isfinite(q.x) || !std::isfinite(q.y) || !std::isfinite(q.z))
    throw DataError("non-finite query point");
  const Key c = key_of(q);
  // Rings beyond this radius contain no cells of the occupied box.
  const std::int64_t max_ring = std::max({std::abs(c.x - lo_.x), std::abs(c.x - hi_.x),
                                          std::abs(c.y - lo_.y), std::abs(c.y - hi_.y),
                                          std::abs(c.z - lo_.z), std::abs(c.z - hi_.z)});
  // Rings below this radius miss the occupied box entirely.
  const std::int64_t first_ring = std::max({std::int64_t{0}, lo_.x - c.x, c.x - hi_.x, lo_.y - c.y,
                                            c.y - hi_.y, lo_.z - c.z, c.z - hi_.z});
  double best2 = std::numeric_limits<double>::infinity();
  auto visit = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    const auto it = cells_.find({x, y, z});
    if (it == cells_.end()) return;
    for (std::uint32_t i = it->second.first; i < it->second.second; ++i) {
      const Vec3 d = points_[order_[i]] - q;
      best2 = std::min(best2, dot(d, d));
    }
  };
  for (std::int64_t r = first_ring; r <= max_ring; ++r) {
    const std::int64_t x0 = std::max(c.x - r, lo_.x), x1 = std::min(c.x + r, hi_.x);
    const std::int64_t y0 = std::max(c.y - r, lo_.y), y1 = std::min(c.y + r, hi_.y);
    const std::int64_t z0 = std::max(c.z - r, lo_.z), z1 = std::min(c.z + r, hi_.z);
    for (std::int64_t x = x0; x <= x1; ++x) {
      const bool x_edge = x == c.x - r || x == c.x + r;
      for (std::int64_t y = y0; y <= y1; ++y) {
        const bool xy_edge = x_edge || y == c.y - r || y == c.y + r;
        if (xy_edge) {
          for (std::int64_t z = z0; z <= z1; ++z) visit(x, y, z);
        } else {
          if (c.z - r >= z0) visit(x, y, c.z - r);
          if (r > 0 && c.z + r <= z1) visit(x, y, c.z + r);
        }
      }
    }
    // Every unvisited cell is at least r cell widths away from q.
    const double reach = static_cast<double>(r) * cell_;
    if (best2 <= reach * reach) break;
  }
  return std::sqrt(best2);
}

std::vector<double> nearest_distances(std::span<const Vec3> queries,
                                      std::span<const Vec3> targets) {
  const PointGrid grid(targets);
  std::vector<double> out(queries.size());
  const auto n = static_cast<std::int64_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < n; ++i) out[i] = grid.nearest_distance(queries[i]);
  return out;
}

std::vector<double> nearest_distances_serial(std::span<const Vec3> queries,
                                             std::span<const Vec3> targets) {
  const PointGrid grid(targets);
  std::vector<double> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = grid.nearest_distance(queries[i]);
  return out;
}

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double percent_within(const std::vector<double>& d, double t) {
  std::size_t k = 0;
  for (double x : d) k += x <= t ? 1 : 0;
  return 100.0 * static_cast<double>(k) / static_cast<double>(d.size());
}

}  // namespace

double chamfer_l1(const PointCloud& pred, const PointCloud& gt) {
  if (pred.empty() || gt.empty()) throw DataError("empty point set");
  pred.validate();
  gt.validate();
  const auto a = nearest_distances(pred.points, gt.points);
  const auto b = nearest_distances(gt.points, pred.points);
  return 0.5 * (mean(a) + mean(b));
}

std::vector<std::pair<double, double>> chamfer_curve(std::span<const double> per_scene_errors,
                                                     std::span<const double> thresholds) {
  std::vector<double> sorted(per_scene_errors.begin(), per_scene_errors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> ts(thresholds.begin(), thresholds.end());
  std::sort(ts.begin(), ts.end());
  std::vector<std::pair<double, double>> curve;
  curve.reserve(ts.size());
  for (double t : ts) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    const double frac =
        sorted.empty() ? 0.0 : static_cast<double>(below) / static_cast<double>(sorted.size());
    curve.emplace_back(t, frac);
  }
  return curve;
}

std::vector<double> default_curve_thresholds(int count) {
  if (count < 2) throw UsageError("threshold count must be >= 2");
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = static_cast<double>(i) / (count - 1);
  return t;
}

double f1_score(double acc, double cmp) {
  if (acc + cmp <= 0.0) return 0.0;
  return 2.0 * acc * cmp / (acc + cmp);
}

Prf scene_prf(const PointCloud& pred, const PointCloud& gt, double t) {
  if (!(t > 0.0)) throw UsageError("threshold must be positive");
  Prf out;
  out.t = t;
  pred.validate();
  gt.validate();
  if (pred.empty() && gt.empty()) {
    out.acc = out.cmp = out.f1 = 100.0;
    return out;
  }
  out.acc = pred.empty() || gt.empty() ? 0.0 : percent_within(nearest_distances(pred.points, gt.points), t);
  out.cmp = pred.empty() || gt.empty() ? 0.0 : percent_within(nearest_distances(gt.points, pred.points), t);
  out.f1 = f1_score(out.acc, out.cmp);
  return out;
}

RayMode parse_ray_mode(const std::string& text) {
  if (text == "all") return RayMode::All;
  if (text == "occluded") return RayMode::Occluded;
  throw UsageError("unknown ray mode '" + text + "' (expected all|occluded)");
}

namespace {

// Percentage of `from` within t of some element of sorted `to`.
double matched_percent(const std::vector<double>& from, const std::vector<double>& to, double t) {
  if (from.empty()) return to.empty() ? 100.0 : 0.0;
  std::size_t k = 0;
  for (double h : from) {
    const auto it = std::lower_bound(to.begin(), to.end(), h);
    bool hit = false;
    if (it != to.end() && *it - h <= t) hit = true;
    if (it != to.begin() && h - *std::prev(it) <= t) hit = true;
    k += hit ? 1 : 0;
  }
  return 100.0 * static_cast<double>(k) / static_cast<double>(from.size());
}

std::vector<double> prepared(const std::vector<double>& hits, RayMode mode) {
  std::vector<double> v = hits;
  std::sort(v.begin(), v.end());
  if (mode == RayMode::Occluded && !v.empty()) v.erase(v.begin());
  return v;
}

}  // namespace

Prf ray_prf(const SurfaceSet& pred, const SurfaceSet& gt, double t, RayMode mode) {
  if (pred.rows != gt.rows || pred.cols != gt.cols || pred.num_rays() != gt.num_rays())
    throw UsageError("surface sets do not share a ray grid");
  if (!(t >= 0.0)) throw UsageError("threshold must be non-negative");
  Prf out;
  out.t = t;
  const std::size_t n = gt.num_rays();
  if (n == 0) {
    out.acc = out.cmp = out.f1 = 100.0;
    return out;
  }
  double sa = 0.0, sc = 0.0, sf = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = prepared(pred.hits[i], mode);
    const auto g = prepared(gt.hits[i], mode);
    const double a = matched_percent(p, g, t);
    const double c = matched_percent(g, p, t);
    sa += a;
    sc += c;
    sf += f1_score(a, c);
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.acc = sa * inv;
  out.cmp = sc * inv;
  out.f1 = sf * inv;
  return out;
}

PointCloud surface_points(const SurfaceSet& surfaces, const Camera& camera) {
  PointCloud cloud;
  if (surfaces.num_rays() == 0) return cloud;
  if (surfaces.num_rays() != static_cast<std::size_t>(surfaces.rows) * surfaces.cols)
    throw UsageError("surface set size does not match its grid");
  const FrustumGrid grid = frustum_rays(camera, surfaces.rows, surfaces.cols);
  for (std::size_t i = 0; i < surfaces.num_rays(); ++i)
    for (double d : surfaces.hits[i]) cloud.points.push_back(grid.rays[i].at(d));
  return cloud;
}

PointCloud subsample(const PointCloud& cloud, std::size_t count, std::uint64_t seed) {
  if (cloud.size() <= count) return cloud;
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> idx(cloud.size());
  std::iota(idx.begin(), idx.end(), 0u);
  // Partial Fisher-Yates over the first `count` slots.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  PointCloud out;
  out.points.reserve(count);
  for (auto i : idx) out.points.push_back(cloud.points[i]);
  return out;
}

MetricsReport evaluate_surfaces(const SurfaceSet& pred, const SurfaceSet& gt, const Camera& camera,
                                double scene_t, double ray_t, std::uint64_t seed) {
  MetricsReport r;
  const PointCloud p = subsample(surface_points(pred, camera), kChamferPoints, seed);
  const PointCloud g = subsample(surface_points(gt, camera), kChamferPoints, seed + 1);
  if (p.empty() || g.empty()) {
    // No Chamfer distance exists; treat the scene as failing every threshold.
    r.chamfer_mean = p.empty() && g.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    r.chamfer_mean = chamfer_l1(p, g);
  }
  const double err[] = {r.chamfer_mean};
  r.chamfer_curve = chamfer_curve(err, default_curve_thresholds());
  r.scene = scene_prf(p, g, scene_t);
  r.ray_all = ray_prf(pred, gt, ray_t, RayMode::All);
  r.ray_occluded = ray_prf(pred, gt, ray_t, RayMode::Occluded);
  return r;
}

}  // namespace raydf
