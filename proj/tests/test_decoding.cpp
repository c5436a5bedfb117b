// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "raydf/decoding.hpp"
#include "raydf/error.hpp"
#include "raydf/expectation.hpp"
#include "raydf/scene_io.hpp"

using namespace raydf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Sampled {
  std::vector<double> depths, values;
  RaySamples view() const { return {depths, values}; }
};

Sampled sample(const std::function<double(double)>& f, double lo, double hi, int count) {
  Sampled s;
  for (int i = 0; i < count; ++i) {
    const double z = lo + (hi - lo) * i / (count - 1);
    s.depths.push_back(z);
    s.values.push_back(f(z));
  }
  return s;
}

// Expected field around a hit at 1.0 with the next surface 1 m behind it,
// sampled every 0.01 m on (0, 3].
Sampled expected_ray(const FieldKind& kind, double sigma) {
  const NoiseModel m{1.0, sigma, 1.0};
  Sampled s;
  for (int i = 1; i <= 300; ++i) {
    s.depths.push_back(0.01 * i);
    s.values.push_back(expected_field(kind, 0.01 * i, m));
  }
  return s;
}

double hit_error(const std::vector<double>& hits, double truth) {
  double best = kInf;
  for (double h : hits) best = std::min(best, std::abs(h - truth));
  return best;
}

void expect_hits(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << i;
}

}  // namespace

TEST(RaySamples, Validate) {
  const std::vector<double> d = {0, 1, 2}, bad = {0, 2, 1}, v = {1, 0, -1}, short_v = {1};
  EXPECT_NO_THROW((RaySamples{d, v}.validate()));
  EXPECT_THROW((RaySamples{bad, v}.validate()), UsageError);
  EXPECT_THROW((RaySamples{d, short_v}.validate()), UsageError);
  EXPECT_THROW((RaySamples{short_v, short_v}.validate()), UsageError);
}

TEST(Drdf, TrueFieldRecoversHits) {
  const std::vector<double> hits = {1.0, 2.5};
  const auto s = sample([&](double z) { return drdf_at(hits, z); }, 0.0, 4.0, 128);
  const double step = 4.0 / 127;
  expect_hits(decode_drdf(s.view()), hits, 0.5 * step);
  EXPECT_TRUE(decode_drdf(sample([](double) { return 0.3; }, 0, 1, 8).view()).empty());
}

TEST(Drdf, ExactZeroEmittedOnce) {
  const std::vector<double> d = {0, 1, 2, 3}, v = {1, 0, -1, -2};
  expect_hits(decode_drdf({d, v}), {1.0}, 0.0);
  // Negative to positive is the midpoint discontinuity, not a surface.
  const std::vector<double> w = {-1, 1, 0.5, -0.5};
  expect_hits(decode_drdf({d, w}), {2.5}, 1e-15);
}

TEST(Drdf, ExpectedFieldWithinOneCentimetre) {
  const auto s = expected_ray(FieldKind::drdf(), 0.1);
  const auto hits = decode_drdf(s.view());
  ASSERT_EQ(hits.size(), 2u);  // the second surface at 2.0 is decoded too
  EXPECT_NEAR(hits[0], 1.0, 0.01);
}

TEST(Drdf, InvariantToPositiveRescaling) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1), scale(0.01, 100);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = sample([&](double) { return u(rng); }, 0, 5, 40);
    Sampled t = s;
    const double k = scale(rng);
    for (double& x : t.values) x *= k;
    EXPECT_EQ(decode_drdf(s.view()).size(), decode_drdf(t.view()).size());
    const auto a = decode_drdf(s.view()), b = decode_drdf(t.view());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(LocalMinima, VShapeAndMonotone) {
  const auto v = sample([](double z) { return std::abs(z - 2.0); }, 0.0, 4.0, 41);
  expect_hits(decode_udf_local_minima(v.view(), 1.0), {2.0}, 1e-12);
  const auto down = sample([](double z) { return 5.0 - z; }, 0.0, 4.0, 41);
  EXPECT_TRUE(decode_udf_local_minima(down.view(), 1.0).empty());
  EXPECT_THROW(decode_udf_local_minima(v.view(), 0.0), UsageError);
}

TEST(LocalMinima, TrueUrdfAndPlateau) {
  const std::vector<double> hits = {1.0, 3.0};
  const auto s = sample([&](double z) { return urdf_at(hits, z); }, 0.0, 4.0, 128);
  expect_hits(decode_udf_local_minima(s.view(), 1.0), hits, 0.5 * 4.0 / 127);
  const std::vector<double> d = {0, 1, 2, 3, 4, 5}, p = {3, 1, 0, 0, 1, 3};
  expect_hits(decode_udf_local_minima({d, p}, 1.0), {2.5}, 0.0);
}

TEST(LocalMinima, WindowSuppressesShallowNeighbour) {
  // Minima at 1 (value 0.2) and 1.4 (value 0): the window of 1 m keeps the deeper one only.
  const std::vector<double> d = {0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
  const std::vector<double> v = {1, 0.8, 0.6, 0.4, 0.3, 0.2, 0.3, 0.0, 0.3, 0.6, 0.9};
  const auto wide = decode_udf_local_minima({d, v}, 1.0);
  ASSERT_EQ(wide.size(), 1u);
  EXPECT_NEAR(wide[0], 1.4, 0.1);
  EXPECT_EQ(decode_udf_local_minima({d, v}, 0.2).size(), 2u);
}

TEST(Nms, ComponentsAndStrictThreshold) {
  const std::vector<double> hits = {1.0, 3.0};
  const auto s = sample([&](double z) { return urdf_at(hits, z); }, 0.0, 4.0, 128);
  expect_hits(decode_urdf_nms(s.view(), 0.25), hits, 0.5 * 4.0 / 127);
  EXPECT_TRUE(decode_urdf_nms(sample([](double) { return 0.25; }, 0, 4, 10).view(), 0.25).empty());
  const auto e = expected_ray(FieldKind::urdf(), 0.2);
  EXPECT_TRUE(decode_urdf_nms(e.view(), 0.15).empty());
  const std::vector<double> d = {0, 1, 2, 3}, tie = {1, 0.1, 0.1, 1};
  expect_hits(decode_urdf_nms({d, tie}, 0.5), {1.0}, 0.0);
  EXPECT_THROW(decode_urdf_nms(s.view(), -1), UsageError);
}

TEST(Threshold, EnumeratesSamples) {
  const std::vector<double> hit = {2.0};
  const auto s = sample([&](double z) { return urdf_at(hit, z); }, 0.0, 4.0, 81);  // step 0.05
  const auto out = decode_urdf_threshold(s.view(), 0.1);
  // 1.9 and 2.1 sit on the threshold up to rounding of the grid depths.
  ASSERT_GE(out.size(), 3u);
  ASSERT_LE(out.size(), 5u);
  for (double x : out) EXPECT_LE(std::abs(x - 2.0), 0.1 + 1e-12);
  EXPECT_NE(std::find(out.begin(), out.end(), 2.0), out.end());
  expect_hits(decode_urdf_threshold(s.view(), 0.0), {2.0}, 1e-12);
  EXPECT_TRUE(decode_urdf_threshold(sample([](double) { return 1.0; }, 0, 1, 5).view(), 0.5).empty());
}

TEST(Gradient, VertexAndBluntMinimum) {
  const auto v = sample([](double z) { return std::abs(z - 2.05); }, 0.0, 4.0, 41);
  expect_hits(decode_urdf_gradient(v.view()), {2.05}, 0.05);
  EXPECT_TRUE(decode_urdf_gradient(sample([](double z) { return -z; }, 0, 4, 41).view()).empty());
  // Single-hit expected URDF: the derivative 2 Phi(z) - 1 ramps through zero
  // instead of jumping, yet the crossing still sits at 0.
  const double sigma = 0.2;
  const NoiseModel m{0.0, sigma, kInf};
  const auto e = sample([&](double z) { return expected_urdf(z, m); }, -1.0, 1.0, 201);
  expect_hits(decode_urdf_gradient(e.view()), {0.0}, 1e-9);
  double flat = 0.0;
  for (double z = -1.0; z <= 1.0; z += 0.001)
    if (std::abs(expected_derivative(FieldKind::urdf(), z, m)) < 0.1) flat += 0.001;
  EXPECT_GT(flat, 0.2 * sigma);
}

TEST(Orf, PairsOnsetAndOffset) {
  const auto bump = sample([](double z) { return std::abs(z - 2.0) < 0.2 ? 1.0 : 0.0; }, 0, 4, 401);
  expect_hits(decode_orf(bump.view(), 0.5, 0.5), {2.0}, 0.01);
  const auto tail = sample([](double z) { return z > 3.5 ? 1.0 : 0.0; }, 0, 4, 401);
  expect_hits(decode_orf(tail.view(), 0.5, 0.5), {3.505}, 0.01);
  const double sigma = 0.1;
  const NoiseModel m{1.0, sigma, kInf};
  const auto weak = sample([&](double z) { return expected_orf(z, sigma / 2, m); }, 0, 3, 301);
  EXPECT_TRUE(decode_orf(weak.view(), 0.5, 1.0).empty());
  EXPECT_THROW(decode_orf(bump.view(), 1.0, 0.5), UsageError);
  EXPECT_THROW(decode_orf(bump.view(), 0.5, 0.0), UsageError);
}

TEST(Sal, BothDirections) {
  const std::vector<double> two = {2.0, 4.0};
  const auto srdf = sample([&](double z) { return srdf_at(two, z); }, 0, 5, 128);
  expect_hits(decode_sal(srdf.view()), two, 0.5 * 5.0 / 127);
  const std::vector<double> hits = {1.0, 3.0};
  const auto drdf = sample([&](double z) { return drdf_at(hits, z); }, 0, 4, 128);
  const auto out = decode_sal(drdf.view());
  expect_hits(out, {1.0, 2.0, 3.0}, 0.5 * 4.0 / 127);
  expect_hits(decode_drdf(drdf.view()), hits, 0.5 * 4.0 / 127);
  EXPECT_TRUE(decode_sal(sample([](double) { return 1.0; }, 0, 1, 5).view()).empty());
}

TEST(Ldi, ConfidenceFilter) {
  const std::vector<double> d = {1, 2, 3, 4}, c = {0.9, 0.6, 0.4, 0.1}, ones = {1, 1, 1, 1};
  EXPECT_EQ(decode_ldi(d, c, 0.5), (std::vector<double>{1, 2}));
  EXPECT_EQ(decode_ldi(d, ones, 0.5), d);
  EXPECT_EQ(decode_ldi(d, c, 0.0), d);
  const std::vector<double> unsorted = {3, 1, 2};
  const std::vector<double> c3 = {1, 1, 1};
  EXPECT_EQ(decode_ldi(unsorted, c3, 0.5), (std::vector<double>{1, 2, 3}));
  EXPECT_THROW(decode_ldi(d, c3, 0.5), UsageError);
}

TEST(DecoderKind, ParseNameAccepts) {
  for (const char* text : {"drdf", "udf-minima:0.5", "urdf-nms:0.25", "urdf-th:0.1", "urdf-grad",
                           "orf:0.5:0.3", "sal", "ldi:0.5"})
    EXPECT_EQ(DecoderKind::parse(text).name(), text);
  EXPECT_THROW(DecoderKind::parse("urdf-nms:0"), UsageError);
  EXPECT_THROW(DecoderKind::parse("orf:1.5:0.3"), UsageError);
  EXPECT_THROW(DecoderKind::parse("mesh"), UsageError);
  EXPECT_TRUE(DecoderKind::drdf().accepts(FieldKind::drdf()));
  EXPECT_FALSE(DecoderKind::orf_pairing(0.5, 0.5).accepts(FieldKind::drdf()));
  EXPECT_TRUE(DecoderKind::sal().accepts(FieldKind::srdf()));
  EXPECT_TRUE(DecoderKind::urdf_nms(0.1).accepts(FieldKind::scene_udf()));
}

TEST(Volume, ParallelMatchesSerialAndRejectsMismatch) {
  const Scene scene = builtin_or_file_scene("box-room");
  const Bvh bvh(scene.mesh);
  const FieldVolume vol = evaluate_field(bvh, scene.camera, 16, 16, 128, FieldKind::drdf(), Truncation::hard(1.0));
  const SurfaceSet a = decode_volume(vol, DecoderKind::drdf());
  const SurfaceSet b = decode_volume_serial(vol, DecoderKind::drdf());
  EXPECT_EQ(a.hits, b.hits);
  EXPECT_EQ(a.rows, 16);
  for (const auto& h : a.hits) {
    EXPECT_TRUE(std::is_sorted(h.begin(), h.end()));
    for (double x : h) {
      EXPECT_GE(x, vol.depths.front());
      EXPECT_LE(x, vol.depths.back());
    }
  }
  try {
    decode_volume(vol, DecoderKind::orf_pairing(0.5, 0.5));
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_STREQ(e.what(), "decoder incompatible with field kind");
  }
  FieldVolume broken = vol;
  broken.values.pop_back();
  EXPECT_THROW(decode_volume(broken, DecoderKind::drdf()), DataError);
  EXPECT_THROW(decode_ray(RaySamples{vol.depths, vol.ray_values(0)}, DecoderKind::ldi(0.5)), UsageError);
}

TEST(RoundTrip, NoiselessRandomRooms) {
  for (std::uint64_t seed = 100; seed < 103; ++seed) {
    const Scene scene = random_room_scene(seed);
    const Bvh bvh(scene.mesh);
    const FrustumGrid grid = frustum_grid(scene.camera, 32, 32, 128);
    const double step = grid.depths[1] - grid.depths[0];
    const auto drdf = evaluate_field(bvh, scene.camera, 32, 32, 128, FieldKind::drdf(), Truncation::hard(1.0));
    const auto urdf = evaluate_field(bvh, scene.camera, 32, 32, 128, FieldKind::urdf(), Truncation::hard(1.0));
    const auto srdf = evaluate_field(bvh, scene.camera, 32, 32, 128, FieldKind::srdf(), Truncation::hard(1.0));
    const auto d = decode_volume(drdf, DecoderKind::drdf());
    const auto u = decode_volume(urdf, DecoderKind::urdf_nms(2 * step));
    const auto m = decode_volume(urdf, DecoderKind::udf_local_minima(1.0));
    const auto s = decode_volume(srdf, DecoderKind::sal());
    for (std::size_t r = 0; r < grid.num_rays(); ++r) {
      auto truth = ray_intersections(bvh, grid.rays[r], scene.camera.far);
      // Hits closer than half a step to either end of the grid are not bracketed.
      std::erase_if(truth, [&](double t) { return t < grid.depths.front() || t > grid.depths.back() - step; });
      for (const auto* got : {&d.hits[r], &u.hits[r], &m.hits[r], &s.hits[r]}) {
        ASSERT_EQ(got->size(), truth.size()) << "seed " << seed << " ray " << r;
        for (std::size_t k = 0; k < truth.size(); ++k) EXPECT_LE(std::abs((*got)[k] - truth[k]), 0.5 * step + 1e-9);
      }
    }
  }
}

// Decoded-hit error of the DRDF zero crossing against the URDF baselines on
// expected fields, compared at 1e-4 m (1% of the 0.01 m sampling step). At sigma = 0.2 the expected DRDF crossing has drifted to
// 1.0068 while the URDF gradient zero sits at 1.0033, so this ordering does
// not hold there.
class RobustnessOrdering : public ::testing::TestWithParam<double> {};

TEST_P(RobustnessOrdering, DrdfNoWorseThanUrdfBaselines) {
  const double sigma = GetParam();
  const double drdf = hit_error(decode_drdf(expected_ray(FieldKind::drdf(), sigma).view()), 1.0);
  const auto urdf = expected_ray(FieldKind::urdf(), sigma);
  const double grad = hit_error(decode_urdf_gradient(urdf.view()), 1.0);
  const double nms = hit_error(decode_urdf_nms(urdf.view(), 0.25), 1.0);
  constexpr double kResolution = 1e-4;
  EXPECT_LE(drdf, 0.01);
  EXPECT_LE(drdf, nms + kResolution) << "drdf " << drdf << " vs urdf nms " << nms;
  EXPECT_LE(drdf, grad + kResolution) << "drdf " << drdf << " vs urdf gradient " << grad;
}

INSTANTIATE_TEST_SUITE_P(Sigmas, RobustnessOrdering, ::testing::Values(0.05, 0.1, 0.2));
