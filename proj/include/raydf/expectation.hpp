// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "raydf/ray_fields.hpp"
#include "raydf/vec3.hpp"

namespace raydf {

/// Gaussian uncertainty about an intersection: S ~ N(mu, sigma^2), with the
/// next intersection at S + n. n = +inf models a single intersection.
struct NoiseModel {
  double mu = 0.0;
  double sigma = 0.1;
  double n = 1.0;

  /// Throws UsageError unless sigma > 0 and n > 0.
  void validate() const;
  bool single_hit() const { return n == std::numeric_limits<double>::infinity(); }
};

// Closed-form expectations E_S[d(z; S)] for the exact two-hit ray functions
// with hits {S, S + n}.

double expected_srdf(double z, const NoiseModel& model);
double expected_urdf(double z, const NoiseModel& model);
double expected_orf(double z, double r, const NoiseModel& model);
double expected_drdf(double z, const NoiseModel& model);

/// Dispatch on a ray-function kind (SceneUdf throws UsageError).
double expected_field(const FieldKind& kind, double z, const NoiseModel& model);

/// d/dz of the expectation for SRDF, URDF and DRDF. ORF throws
/// UsageError("use density form"); see expected_orf_derivative.
double expected_derivative(const FieldKind& kind, double z, const NoiseModel& model);
double expected_orf_derivative(double z, double r, const NoiseModel& model);

/// Smallest root of n Phi(z - n/2) - z on [-n/4, n/2). Throws
/// NumericError("crossing lost") when the bracket has no sign change.
double drdf_zero_crossing(const NoiseModel& model);

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Monte-Carlo oracle: averages d(z; S) over S ~ N(mu, sigma^2) using the
/// ray-function implementations on hits {S, S + n}. Each z index draws from
/// its own stream derived from `seed`, so results are schedule independent.
std::vector<McEstimate> mc_expected(const FieldKind& kind, std::span<const double> z,
                                    const NoiseModel& model, std::size_t num_samples,
                                    std::uint64_t seed);

/// Several kinds on the same draws; result[k] equals mc_expected(kinds[k], ...).
std::vector<std::vector<McEstimate>> mc_expected(std::span<const FieldKind> kinds,
                                                 std::span<const double> z,
                                                 const NoiseModel& model,
                                                 std::size_t num_samples, std::uint64_t seed);

std::vector<std::vector<McEstimate>> mc_expected_serial(std::span<const FieldKind> kinds,
                                                        std::span<const double> z,
                                                        const NoiseModel& model,
                                                        std::size_t num_samples,
                                                        std::uint64_t seed);

/// Per-z sample median of d(z; S), same streams as mc_expected.
std::vector<double> mc_median(const FieldKind& kind, std::span<const double> z,
                              const NoiseModel& model, std::size_t num_samples,
                              std::uint64_t seed);

/// Independent Gaussian intersections S_i ~ N(means[i], sigmas[i]^2), sorted
/// per draw. Used for the depth-dependent median-vs-mean experiment.
struct HitDistribution {
  std::vector<double> means;
  std::vector<double> sigmas;
};

struct McMeanMedian {
  std::vector<McEstimate> mean;
  std::vector<double> median;
};

McMeanMedian mc_mean_median(const FieldKind& kind, std::span<const double> z,
                            const HitDistribution& hits, std::size_t num_samples,
                            std::uint64_t seed);

/// Expected unsigned distance to the plane normal . x + offset = 0 when the
/// plane is displaced by isotropic N(0, sigma^2 I) noise.
double expected_plane_udf(const Vec3& p, const Vec3& normal, double offset, double sigma);

/// Expected field along a ray with several intersections, each uncertain by
/// sigma. In the cell of hit i (nearest-hit partition, ties to the later
/// hit) the two-hit model centred at hits[i] with n = hits[i+1] - hits[i] is
/// used; SRDF is sign-corrected by parity.
double expected_along_ray(const FieldKind& kind, std::span<const double> hits, double sigma,
                          double z);

struct ExpectationCurve {
  FieldKind kind;
  NoiseModel model;
  std::vector<double> z;
  std::vector<double> analytic;
  std::vector<double> derivative;  // density form for ORF
  std::vector<double> mc;          // empty without MC
  std::vector<double> mc_se;
};

/// Analytic curve on `count` points over [z_lo, z_hi]; adds MC columns when
/// mc_samples > 0.
ExpectationCurve expectation_curve(const FieldKind& kind, const NoiseModel& model, double z_lo,
                                   double z_hi, int count, std::size_t mc_samples,
                                   std::uint64_t seed);

/// SplitMix64 step; derives independent stream seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace raydf
