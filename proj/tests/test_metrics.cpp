// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "raydf/error.hpp"
#include "raydf/metrics.hpp"

using namespace raydf;

namespace {

PointCloud random_cloud(std::mt19937_64& rng, int n, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  PointCloud c;
  for (int i = 0; i < n; ++i) c.points.push_back({u(rng), u(rng), u(rng)});
  return c;
}

double brute_nn(const Vec3& q, const PointCloud& c) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& p : c.points) best = std::min(best, length(p - q));
  return best;
}

double brute_chamfer(const PointCloud& a, const PointCloud& b) {
  double sa = 0, sb = 0;
  for (const Vec3& p : a.points) sa += brute_nn(p, b);
  for (const Vec3& p : b.points) sb += brute_nn(p, a);
  return 0.5 * (sa / a.size() + sb / b.size());
}

SurfaceSet one_ray(std::vector<double> hits) {
  SurfaceSet s = SurfaceSet::empty_grid(1, 1);
  s.hits[0] = std::move(hits);
  return s;
}

}  // namespace

TEST(PointGrid, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    // Clustered targets stress the ring search across empty cells.
    PointCloud targets = random_cloud(rng, 100, trial % 2 ? 0.1 : 3.0);
    const PointCloud queries = random_cloud(rng, 100, 4.0);
    const auto fast = nearest_distances(queries.points, targets.points);
    const auto slow = nearest_distances_serial(queries.points, targets.points);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      EXPECT_EQ(fast[i], slow[i]);
      EXPECT_EQ(fast[i], brute_nn(queries.points[i], targets));
    }
  }
}

TEST(PointGrid, EmptyAndExplicitCell) {
  const std::vector<Vec3> none;
  EXPECT_TRUE(std::isinf(PointGrid(none).nearest_distance({0, 0, 0})));
  const std::vector<Vec3> pts = {{0, 0, 0}, {10, 0, 0}};
  const PointGrid g(pts, 0.5);
  EXPECT_DOUBLE_EQ(g.cell_size(), 0.5);
  EXPECT_DOUBLE_EQ(g.nearest_distance({6, 0, 0}), 4.0);
  EXPECT_DOUBLE_EQ(g.nearest_distance({-100, 0, 0}), 100.0);
}

TEST(Chamfer, ExamplesAndErrors) {
  const PointCloud a{{{0, 0, 0}}}, b{{{1, 0, 0}}};
  EXPECT_DOUBLE_EQ(chamfer_l1(a, b), 1.0);
  EXPECT_DOUBLE_EQ(chamfer_l1(a, a), 0.0);
  try {
    chamfer_l1(PointCloud{}, b);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "empty point set");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(chamfer_l1(PointCloud{{{nan, 0, 0}}}, b), DataError);
}

TEST(Chamfer, BruteForceAndSymmetry) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud a = random_cloud(rng, 100, 1.0), b = random_cloud(rng, 80, 1.5);
    EXPECT_NEAR(chamfer_l1(a, b), brute_chamfer(a, b), 1e-12);
    EXPECT_EQ(chamfer_l1(a, b), chamfer_l1(b, a));
  }
}

TEST(ChamferCurve, CountsStrictlyBelow) {
  const std::vector<double> e = {0.1, 0.3};
  const std::vector<double> t = {0.0, 0.1, 0.2, 1.0};
  const auto c = chamfer_curve(e, t);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_DOUBLE_EQ(c[0].second, 0.0);
  EXPECT_DOUBLE_EQ(c[1].second, 0.0);
  EXPECT_DOUBLE_EQ(c[2].second, 0.5);
  EXPECT_DOUBLE_EQ(c[3].second, 1.0);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> errs(10);
  for (double& x : errs) x = u(rng);
  const auto grid = default_curve_thresholds();
  EXPECT_EQ(grid.size(), 101u);
  EXPECT_DOUBLE_EQ(grid.back(), 1.0);
  const auto curve = chamfer_curve(errs, grid);
  double prev = 0.0;
  for (const auto& [thr, frac] : curve) {
    int below = 0;
    for (double x : errs) below += x < thr;
    EXPECT_DOUBLE_EQ(frac, below / 10.0);
    EXPECT_GE(frac, prev);
    prev = frac;
  }
}

TEST(ScenePrf, Examples) {
  const PointCloud o{{{0, 0, 0}}}, near{{{0.4, 0, 0}}};
  const Prf a = scene_prf(o, near, 0.5);
  EXPECT_DOUBLE_EQ(a.acc, 100);
  EXPECT_DOUBLE_EQ(a.f1, 100);
  const PointCloud two{{{0, 0, 0}, {5, 0, 0}}};
  const Prf b = scene_prf(two, o, 0.01);
  EXPECT_DOUBLE_EQ(b.acc, 50);
  EXPECT_DOUBLE_EQ(b.cmp, 100);
  EXPECT_NEAR(b.f1, 200.0 / 3.0, 1e-12);
  // Threshold is inclusive.
  EXPECT_DOUBLE_EQ(scene_prf(o, PointCloud{{{0.5, 0, 0}}}, 0.5).acc, 100);
  EXPECT_THROW(scene_prf(o, o, 0.0), UsageError);
}

TEST(ScenePrf, EmptyConventions) {
  const PointCloud o{{{0, 0, 0}}};
  const Prf both = scene_prf(PointCloud{}, PointCloud{}, 0.5);
  EXPECT_DOUBLE_EQ(both.f1, 100);
  const Prf no_pred = scene_prf(PointCloud{}, o, 0.5);
  EXPECT_DOUBLE_EQ(no_pred.acc, 0);
  EXPECT_DOUBLE_EQ(no_pred.f1, 0);
  EXPECT_DOUBLE_EQ(scene_prf(o, PointCloud{}, 0.5).cmp, 0);
  EXPECT_DOUBLE_EQ(f1_score(0, 0), 0);
}

TEST(ScenePrf, BruteForceOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud a = random_cloud(rng, 100, 1.0), b = random_cloud(rng, 100, 1.0);
    int ia = 0, ib = 0;
    for (const Vec3& p : a.points) ia += brute_nn(p, b) <= 0.2;
    for (const Vec3& p : b.points) ib += brute_nn(p, a) <= 0.2;
    const Prf r = scene_prf(a, b, 0.2);
    EXPECT_DOUBLE_EQ(r.acc, 100.0 * ia / 100);
    EXPECT_DOUBLE_EQ(r.cmp, 100.0 * ib / 100);
    EXPECT_DOUBLE_EQ(scene_prf(a, a, 0.01).f1, 100);
  }
}

TEST(RayPrf, OccludedWorkedExample) {
  const Prf r = ray_prf(one_ray({1, 2.04, 3.5}), one_ray({1, 2, 3}), 0.1, RayMode::Occluded);
  EXPECT_DOUBLE_EQ(r.acc, 50);
  EXPECT_DOUBLE_EQ(r.cmp, 50);
  EXPECT_DOUBLE_EQ(r.f1, 50);
  const Prf all = ray_prf(one_ray({1, 2.04, 3.5}), one_ray({1, 2, 3}), 0.1, RayMode::All);
  EXPECT_NEAR(all.acc, 200.0 / 3, 1e-12);
}

TEST(RayPrf, ConventionsAndPermutation) {
  const Prf miss = ray_prf(one_ray({}), one_ray({1}), 0.1, RayMode::All);
  EXPECT_DOUBLE_EQ(miss.acc, 0);
  EXPECT_DOUBLE_EQ(miss.cmp, 0);
  EXPECT_DOUBLE_EQ(miss.f1, 0);
  // Single-hit rays become empty-empty in occluded mode and count as perfect.
  EXPECT_DOUBLE_EQ(ray_prf(one_ray({1}), one_ray({4}), 0.1, RayMode::Occluded).f1, 100);
  EXPECT_EQ(ray_prf(one_ray({3.5, 1, 2.04}), one_ray({3, 2, 1}), 0.1, RayMode::Occluded).f1, 50);
  EXPECT_THROW(ray_prf(SurfaceSet::empty_grid(2, 2), SurfaceSet::empty_grid(1, 4), 0.1, RayMode::All),
               UsageError);
  EXPECT_EQ(parse_ray_mode("occluded"), RayMode::Occluded);
  EXPECT_THROW(parse_ray_mode("first"), UsageError);
}

TEST(RayPrf, MeanOverRays) {
  SurfaceSet gt = SurfaceSet::empty_grid(1, 2), pred = SurfaceSet::empty_grid(1, 2);
  gt.hits = {{1.0}, {2.0}};
  pred.hits = {{1.0}, {}};
  const Prf r = ray_prf(pred, gt, 0.1, RayMode::All);
  EXPECT_DOUBLE_EQ(r.acc, 50);
  EXPECT_DOUBLE_EQ(r.f1, 50);
}

TEST(SurfacePoints, LiftAndProjectBack) {
  const Camera cam = Camera::from_fov(8, 8, std::numbers::pi / 3, 0.0, 8.0, Pose::look_at({1, 1, 1}, {0, 0, 5}));
  SurfaceSet s = SurfaceSet::empty_grid(4, 4);
  s.hits[5] = {2.0, 3.0};
  s.hits[10] = {1.5};
  const PointCloud pc = surface_points(s, cam);
  ASSERT_EQ(pc.size(), 3u);
  const auto grid = frustum_rays(cam, 4, 4);
  const Projection p = cam.project(pc.points[0]);
  EXPECT_NEAR(p.u, grid.pixels[5][0], 1e-9);
  EXPECT_NEAR(p.v, grid.pixels[5][1], 1e-9);
  EXPECT_NEAR(p.depth, 2.0, 1e-12);
  EXPECT_NEAR(length(pc.points[2] - cam.center()), 1.5, 1e-12);
}

TEST(Subsample, ExactCountAndDeterministic) {
  std::mt19937_64 rng(9);
  const PointCloud big = random_cloud(rng, 100000, 1.0);
  const PointCloud a = subsample(big, kChamferPoints, 3), b = subsample(big, kChamferPoints, 3);
  EXPECT_EQ(a.size(), 30000u);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.points[i], b.points[i]);
  EXPECT_NE(subsample(big, 10, 4).points[0], subsample(big, 10, 3).points[0]);
  EXPECT_EQ(subsample(big, 200000, 3).size(), big.size());
}

TEST(Evaluate, PerfectPredictionAndEmptySides) {
  const Camera cam = Camera::from_fov(8, 8, std::numbers::pi / 3, 0.0, 8.0);
  SurfaceSet gt = SurfaceSet::empty_grid(4, 4);
  for (auto& h : gt.hits) h = {2.0, 4.0};
  const MetricsReport r = evaluate_surfaces(gt, gt, cam, 0.5, 0.1, 1);
  EXPECT_DOUBLE_EQ(r.chamfer_mean, 0.0);
  EXPECT_DOUBLE_EQ(r.scene.f1, 100);
  EXPECT_DOUBLE_EQ(r.ray_all.f1, 100);
  EXPECT_DOUBLE_EQ(r.ray_occluded.f1, 100);
  EXPECT_EQ(r.chamfer_curve.back().second, 1.0);
  const MetricsReport empty = evaluate_surfaces(SurfaceSet::empty_grid(4, 4), gt, cam, 0.5, 0.1, 1);
  EXPECT_TRUE(std::isinf(empty.chamfer_mean));
  EXPECT_DOUBLE_EQ(empty.scene.f1, 0);
  EXPECT_EQ(empty.chamfer_curve.back().second, 0.0);
}
