// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>

namespace raydf::gaussian {

/// Density of N(0, sigma^2) at x.
inline double pdf(double x, double sigma) {
  if (std::isinf(x)) return 0.0;
  const double u = x / sigma;
  return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// CDF of N(0, sigma^2). Uses erfc on both tails so small probabilities keep
/// full relative precision.
inline double cdf(double x, double sigma) {
  return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
}

/// Upper tail 1 - cdf(x), accurate for large x.
inline double sf(double x, double sigma) {
  return 0.5 * std::erfc(x / (sigma * std::numbers::sqrt2));
}

/// P(a < S < b) for S ~ N(0, sigma^2), a <= b (infinite bounds allowed).
inline double mass(double a, double b, double sigma) {
  if (!(a < b)) return 0.0;
  if (a >= 0.0) return sf(a, sigma) - sf(b, sigma);
  return cdf(b, sigma) - cdf(a, sigma);
}

/// Integral of s * p(s) over (a, b) = sigma^2 * (p(a) - p(b)).
inline double partial_moment(double a, double b, double sigma) {
  if (!(a < b)) return 0.0;
  return sigma * sigma * (pdf(a, sigma) - pdf(b, sigma));
}

/// Integral of |s - w| p(s) over (a, b).
inline double partial_abs_moment(double a, double b, double w, double sigma) {
  if (!(a < b)) return 0.0;
  auto signed_part = [&](double lo, double hi) {
    return partial_moment(lo, hi, sigma) - w * mass(lo, hi, sigma);
  };
  if (w <= a) return signed_part(a, b);
  if (w >= b) return -signed_part(a, b);
  return -signed_part(a, w) + signed_part(w, b);
}

}  // namespace raydf::gaussian
