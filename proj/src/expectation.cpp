// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#include "raydf/expectation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "raydf/error.hpp"
#include "raydf/gaussian.hpp"

namespace raydf {

namespace g = gaussian;

void NoiseModel::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw UsageError("noise sigma must be positive");
  if (!(n > 0.0)) throw UsageError("next-intersection gap n must be positive");
}

double expected_srdf(double z, const NoiseModel& model) {
  model.validate();
  const double zc = z - model.mu;
  if (model.single_hit()) return -zc;
  const double s = model.sigma;
  const double t = zc - 0.5 * model.n;
  return -zc + (2.0 * zc - model.n) * g::cdf(t, s) + 2.0 * s * s * g::pdf(t, s);
}

double expected_urdf(double z, const NoiseModel& model) {
  model.validate();
  const double zc = z - model.mu;
  const double s = model.sigma;
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (model.single_hit()) return g::partial_abs_moment(-inf, inf, zc, s);
  // Nearest hit is S while S > z - n/2, otherwise S + n.
  const double t = zc - 0.5 * model.n;
  return g::partial_abs_moment(t, inf, zc, s) + g::partial_abs_moment(-inf, t, zc - model.n, s);
}

double expected_orf(double z, double r, const NoiseModel& model) {
  model.validate();
  if (!(r > 0.0)) throw UsageError("ORF radius must be positive");
  const double zc = z - model.mu;
  const double s = model.sigma;
  const double near_part = g::mass(zc - r, zc + r, s);
  if (model.single_hit()) return near_part;
  if (model.n >= 2.0 * r) return near_part + g::mass(zc - model.n - r, zc - model.n + r, s);
  return g::mass(zc - model.n - r, zc + r, s);
}

double expected_drdf(double z, const NoiseModel& model) {
  model.validate();
  const double zc = z - model.mu;
  if (model.single_hit()) return -zc;
  return model.n * g::cdf(zc - 0.5 * model.n, model.sigma) - zc;
}

double expected_field(const FieldKind& kind, double z, const NoiseModel& model) {
  switch (kind.type) {
    case FieldKind::Type::Srdf: return expected_srdf(z, model);
    case FieldKind::Type::Urdf: return expected_urdf(z, model);
    case FieldKind::Type::Drdf: return expected_drdf(z, model);
    case FieldKind::Type::Orf: return expected_orf(z, kind.radius, model);
    case FieldKind::Type::SceneUdf: break;
  }
  throw UsageError("scene UDF has no ray expectation; use expected_plane_udf");
}

double expected_derivative(const FieldKind& kind, double z, const NoiseModel& model) {
  model.validate();
  const double zc = z - model.mu;
  const double s = model.sigma;
  const bool single = model.single_hit();
  const double t = zc - 0.5 * model.n;
  switch (kind.type) {
    case FieldKind::Type::Srdf: return single ? -1.0 : -1.0 + 2.0 * g::cdf(t, s);
    case FieldKind::Type::Urdf: {
      const double base = 2.0 * g::cdf(zc, s) - 1.0;
      if (single) return base;
      return base - 2.0 * g::cdf(t, s) + 2.0 * g::cdf(zc - model.n, s);
    }
    case FieldKind::Type::Drdf: return single ? -1.0 : model.n * g::pdf(t, s) - 1.0;
    case FieldKind::Type::Orf: throw UsageError("use density form");
    case FieldKind::Type::SceneUdf: break;
  }
  throw UsageError("scene UDF has no ray expectation");
}

double expected_orf_derivative(double z, double r, const NoiseModel& model) {
  model.validate();
  if (!(r > 0.0)) throw UsageError("ORF radius must be positive");
  const double zc = z - model.mu;
  const double s = model.sigma;
  const double near_part = g::pdf(zc + r, s) - g::pdf(zc - r, s);
  if (model.single_hit()) return near_part;
  const double zn = zc - model.n;
  if (model.n >= 2.0 * r) return near_part + g::pdf(zn + r, s) - g::pdf(zn - r, s);
  return g::pdf(zc + r, s) - g::pdf(zn - r, s);
}

double drdf_zero_crossing(const NoiseModel& model) {
  model.validate();
  if (model.single_hit()) return model.mu;
  const double n = model.n;
  auto f = [&](double z) { return n * g::cdf(z - 0.5 * n, model.sigma) - z; };
  double lo = -0.25 * n;
  double hi = 0.5 * n - 1e-9 * n;
  if (!(f(lo) > 0.0 && f(hi) < 0.0)) throw NumericError("crossing lost");
  // f is convex on the bracket, so the sign change is unique.
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * n; ++it) {
    mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) break;
    (fm > 0.0 ? lo : hi) = mid;
  }
  return model.mu + mid;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + (stream + 1) * 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

namespace {

// Running mean/variance (Welford).
struct Accumulator {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  McEstimate estimate() const {
    if (count < 2) return {mean, 0.0};
    const double var = m2 / static_cast<double>(count - 1);
    return {mean, std::sqrt(var / static_cast<double>(count))};
  }
};

void check_mc_args(std::span<const FieldKind> kinds, const NoiseModel& model,
                   std::size_t num_samples) {
  model.validate();
  if (num_samples < 2) throw UsageError("Monte-Carlo needs at least 2 samples");
  for (const auto& k : kinds)
    if (!k.is_ray_function()) throw UsageError("Monte-Carlo oracle needs a ray function");
}

// All kinds at one z, one stream.
void mc_one_z(std::span<const FieldKind> kinds, double z, const NoiseModel& model,
              std::size_t num_samples, std::uint64_t stream_seed, McEstimate* out,
              std::size_t stride) {
  std::mt19937_64 rng(stream_seed);
  std::normal_distribution<double> normal(model.mu, model.sigma);
  std::vector<Accumulator> acc(kinds.size());
  const bool single = model.single_hit();
  std::array<double, 2> hits{};
  for (std::size_t i = 0; i < num_samples; ++i) {
    hits[0] = normal(rng);
    hits[1] = hits[0] + model.n;
    const std::span<const double> h(hits.data(), single ? 1 : 2);
    for (std::size_t k = 0; k < kinds.size(); ++k) acc[k].add(ray_field_at(kinds[k], h, z));
  }
  for (std::size_t k = 0; k < kinds.size(); ++k) out[k * stride] = acc[k].estimate();
}

std::vector<std::vector<McEstimate>> unflatten(const std::vector<McEstimate>& flat,
                                               std::size_t kinds, std::size_t nz) {
  std::vector<std::vector<McEstimate>> out(kinds);
  for (std::size_t k = 0; k < kinds; ++k)
    out[k].assign(flat.begin() + k * nz, flat.begin() + (k + 1) * nz);
  return out;
}

}  // namespace

std::vector<std::vector<McEstimate>> mc_expected(std::span<const FieldKind> kinds,
                                                 std::span<const double> z,
                                                 const NoiseModel& model,
                                                 std::size_t num_samples, std::uint64_t seed) {
  check_mc_args(kinds, model, num_samples);
  const std::size_t nz = z.size();
  std::vector<McEstimate> flat(kinds.size() * nz);
  const auto n = static_cast<std::int64_t>(nz);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i)
    mc_one_z(kinds, z[i], model, num_samples, derive_seed(seed, static_cast<std::uint64_t>(i)),
             flat.data() + i, nz);
  return unflatten(flat, kinds.size(), nz);
}

std::vector<std::vector<McEstimate>> mc_expected_serial(std::span<const FieldKind> kinds,
                                                        std::span<const double> z,
                                                        const NoiseModel& model,
                                                        std::size_t num_samples,
                                                        std::uint64_t seed) {
  check_mc_args(kinds, model, num_samples);
  const std::size_t nz = z.size();
  std::vector<McEstimate> flat(kinds.size() * nz);
  for (std::size_t i = 0; i < nz; ++i)
    mc_one_z(kinds, z[i], model, num_samples, derive_seed(seed, i), flat.data() + i, nz);
  return unflatten(flat, kinds.size(), nz);
}

std::vector<McEstimate> mc_expected(const FieldKind& kind, std::span<const double> z,
                                    const NoiseModel& model, std::size_t num_samples,
                                    std::uint64_t seed) {
  const std::array<FieldKind, 1> kinds{kind};
  return mc_expected(kinds, z, model, num_samples, seed)[0];
}

namespace {

double median_in_place(std::vector<double>& values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

std::vector<double> mc_median(const FieldKind& kind, std::span<const double> z,
                              const NoiseModel& model, std::size_t num_samples,
                              std::uint64_t seed) {
  const std::array<FieldKind, 1> kinds{kind};
  check_mc_args(kinds, model, num_samples);
  std::vector<double> out(z.size());
  const auto n = static_cast<std::int64_t>(z.size());
  const bool single = model.single_hit();
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> normal(model.mu, model.sigma);
    std::vector<double> values(num_samples);
    std::array<double, 2> hits{};
    for (auto& v : values) {
      hits[0] = normal(rng);
      hits[1] = hits[0] + model.n;
      v = ray_field_at(kind, std::span<const double>(hits.data(), single ? 1 : 2), z[i]);
    }
    out[i] = median_in_place(values);
  }
  return out;
}

McMeanMedian mc_mean_median(const FieldKind& kind, std::span<const double> z,
                            const HitDistribution& dist, std::size_t num_samples,
                            std::uint64_t seed) {
  if (!kind.is_ray_function()) throw UsageError("Monte-Carlo oracle needs a ray function");
  if (dist.means.empty() || dist.means.size() != dist.sigmas.size())
    throw UsageError("hit distribution needs matching, non-empty means and sigmas");
  for (double s : dist.sigmas)
    if (!(s > 0.0)) throw UsageError("noise sigma must be positive");
  if (num_samples < 2) throw UsageError("Monte-Carlo needs at least 2 samples");
  McMeanMedian out;
  out.mean.resize(z.size());
  out.median.resize(z.size());
  const auto n = static_cast<std::int64_t>(z.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<double> values(num_samples);
    std::vector<double> hits(dist.means.size());
    Accumulator acc;
    for (auto& v : values) {
      for (std::size_t h = 0; h < hits.size(); ++h)
        hits[h] = dist.means[h] + dist.sigmas[h] * unit(rng);
      std::sort(hits.begin(), hits.end());
      v = ray_field_at(kind, hits, z[i]);
      acc.add(v);
    }
    out.mean[i] = acc.estimate();
    out.median[i] = median_in_place(values);
  }
  return out;
}

double expected_plane_udf(const Vec3& p, const Vec3& normal, double offset, double sigma) {
  if (std::abs(length(normal) - 1.0) > 1e-9) throw UsageError("plane normal must be unit length");
  if (!(sigma > 0.0)) throw UsageError("noise sigma must be positive");
  const double q = std::abs(dot(normal, p) + offset);
  constexpr double inf = std::numeric_limits<double>::infinity();
  return g::partial_abs_moment(-inf, inf, q, sigma);
}

double expected_along_ray(const FieldKind& kind, std::span<const double> hits, double sigma,
                          double z) {
  if (hits.empty()) throw DataError("no intersections on ray");
  // Nearest hit, ties to the later one (same partition as drdf_at).
  auto it = std::lower_bound(hits.begin(), hits.end(), z);
  std::size_t i = 0;
  if (it == hits.end()) {
    i = hits.size() - 1;
  } else if (it == hits.begin()) {
    i = 0;
  } else {
    const auto j = static_cast<std::size_t>(it - hits.begin());
    i = (z - hits[j - 1] < hits[j] - z) ? j - 1 : j;
  }
  NoiseModel model;
  model.mu = hits[i];
  model.sigma = sigma;
  model.n = (i + 1 < hits.size()) ? hits[i + 1] - hits[i] : std::numeric_limits<double>::infinity();
  const double v = expected_field(kind, z, model);
  if (kind.type == FieldKind::Type::Srdf && i % 2 == 1) return -v;
  return v;
}

ExpectationCurve expectation_curve(const FieldKind& kind, const NoiseModel& model, double z_lo,
                                   double z_hi, int count, std::size_t mc_samples,
                                   std::uint64_t seed) {
  if (count < 2 || !(z_hi > z_lo)) throw UsageError("curve needs count >= 2 and z_hi > z_lo");
  ExpectationCurve c;
  c.kind = kind;
  c.model = model;
  c.z.resize(count);
  for (int i = 0; i < count; ++i) c.z[i] = z_lo + (z_hi - z_lo) * i / (count - 1);
  c.analytic.resize(count);
  for (int i = 0; i < count; ++i) c.analytic[i] = expected_field(kind, c.z[i], model);
  if (kind.type != FieldKind::Type::Orf) {
    c.derivative.resize(count);
    for (int i = 0; i < count; ++i) c.derivative[i] = expected_derivative(kind, c.z[i], model);
  } else {
    c.derivative.resize(count);
    for (int i = 0; i < count; ++i)
      c.derivative[i] = expected_orf_derivative(c.z[i], kind.radius, model);
  }
  if (mc_samples > 0) {
    const auto est = mc_expected(kind, c.z, model, mc_samples, seed);
    for (const auto& e : est) {
      c.mc.push_back(e.mean);
      c.mc_se.push_back(e.standard_error);
    }
  }
  return c;
}

}  // namespace raydf
