// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "raydf/geometry.hpp"

namespace raydf {

/// Sorted ray parameters where a ray meets the scene.
class IntersectionSet {
 public:
  IntersectionSet() = default;
  /// Throws DataError unless hits are finite, >= 0 and strictly increasing.
  explicit IntersectionSet(std::vector<double> hits);

  std::span<const double> hits() const { return hits_; }
  std::size_t size() const { return hits_.size(); }
  bool empty() const { return hits_.empty(); }
  double operator[](std::size_t i) const { return hits_[i]; }

 private:
  std::vector<double> hits_;
};

/// Which function a volume or sample stores.
struct FieldKind {
  enum class Type : std::uint32_t { SceneUdf = 0, Urdf = 1, Srdf = 2, Drdf = 3, Orf = 4 };

  Type type = Type::Drdf;
  double radius = 0.0;  // ORF only

  static FieldKind scene_udf() { return {Type::SceneUdf, 0.0}; }
  static FieldKind urdf() { return {Type::Urdf, 0.0}; }
  static FieldKind srdf() { return {Type::Srdf, 0.0}; }
  static FieldKind drdf() { return {Type::Drdf, 0.0}; }
  /// Throws UsageError unless r > 0.
  static FieldKind orf(double r);

  /// Parses "udf", "urdf", "srdf", "drdf" or "orf:R".
  static FieldKind parse(const std::string& text);
  std::string name() const;

  bool is_ray_function() const { return type != Type::SceneUdf; }
  bool operator==(const FieldKind&) const = default;
};

// Pointwise ray functions. `hits` must be sorted ascending; values may be
// negative (centered coordinates are used by the expectation module).
// The distance functions throw DataError("no intersections on ray") on empty hits.

double urdf_at(std::span<const double> hits, double z);
/// Parity sign: negative iff an odd number of hits lie at or before z.
double srdf_at(std::span<const double> hits, double z);
/// Positive before the nearest hit, negative after it. Exact midpoints
/// between two hits belong to the later hit.
double drdf_at(std::span<const double> hits, double z);
/// 1 iff some hit lies strictly within r of z.
double orf_at(std::span<const double> hits, double z, double r);

/// Dispatch on kind. SceneUdf is not a ray function and throws UsageError.
double ray_field_at(const FieldKind& kind, std::span<const double> hits, double z);

inline double urdf_at(const IntersectionSet& h, double z) { return urdf_at(h.hits(), z); }
inline double srdf_at(const IntersectionSet& h, double z) { return srdf_at(h.hits(), z); }
inline double drdf_at(const IntersectionSet& h, double z) { return drdf_at(h.hits(), z); }
inline double orf_at(const IntersectionSet& h, double z, double r) { return orf_at(h.hits(), z, r); }

/// Unsigned distance from p to the nearest point of the scene.
double scene_udf_at(const Bvh& bvh, const Vec3& p);

struct Truncation {
  enum class Mode { None, Hard, Log };
  Mode mode = Mode::Hard;
  double bound = 1.0;

  static Truncation none() { return {Mode::None, 0.0}; }
  static Truncation hard(double b) { return {Mode::Hard, b}; }
  static Truncation log(double b) { return {Mode::Log, b}; }
  /// Parses "none", "B" / "hard:B" or "log:B".
  static Truncation parse(const std::string& text);
};

/// Hard: sign(d) min(|d|, b). Log: |d| > b maps to b (1 + ln(|d| / b)).
double truncate(double d, const Truncation& t);

/// Dense field over a frustum grid. values[(row * W + col) * D + k].
struct FieldVolume {
  FieldKind kind;
  Camera camera;
  int rows = 0;
  int cols = 0;
  std::vector<double> depths;
  std::vector<double> values;
  Truncation truncation = Truncation::none();

  int num_depths() const { return static_cast<int>(depths.size()); }
  std::size_t ray_index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(col);
  }
  std::span<const double> ray_values(std::size_t ray) const {
    return std::span<const double>(values).subspan(ray * depths.size(), depths.size());
  }
  double at(int row, int col, int k) const { return values[ray_index(row, col) * depths.size() + k]; }
};

/// Value stored for rays that never hit the scene.
double miss_value(const FieldKind& kind, const Truncation& t, const Camera& camera);

/// Evaluates `kind` on every cell of an H x W x D frustum grid. Parallel over
/// rays (OpenMP); output does not depend on the schedule.
FieldVolume evaluate_field(const Bvh& bvh, const Camera& camera, int rows, int cols, int depths,
                           const FieldKind& kind, const Truncation& truncation);

/// Single-threaded reference for evaluate_field.
FieldVolume evaluate_field_serial(const Bvh& bvh, const Camera& camera, int rows, int cols,
                                  int depths, const FieldKind& kind, const Truncation& truncation);

/// Per-ray intersections for every grid ray (t_max = camera.far).
std::vector<std::vector<double>> grid_intersections(const Bvh& bvh, const FrustumGrid& grid,
                                                    double t_max);

struct TrainingSample {
  Vec3 point;
  double depth = 0.0;
  double target = 0.0;
};

/// 512 depths ~ N(hit, 0.1) per hit (clamped to [0, t_max]) followed by 512
/// uniform depths on [0, t_max]; targets are `kind` evaluated at each depth.
std::vector<TrainingSample> sample_training_points(const Ray& ray, const IntersectionSet& hits,
                                                   double t_max, const FieldKind& kind,
                                                   std::uint64_t seed);

inline constexpr int kSamplesPerHit = 512;
inline constexpr int kUniformSamples = 512;
inline constexpr double kHitSampleSigma = 0.1;

/// counts[k] = number of rays with exactly k hits.
std::vector<std::uint64_t> hit_histogram(const Bvh& bvh, std::span<const Ray> rays, double t_max);

struct ReceptiveSpread {
  double max_pixels = 0.0;     // max pixel offset over valid samples
  std::size_t behind_camera = 0;  // nearest points excluded from the max
  std::size_t samples = 0;
};

/// Largest image-plane distance between a camera ray's pixel and the
/// projections of the scene points that define the scene UDF along the ray.
ReceptiveSpread receptive_spread(const Bvh& bvh, const Camera& camera, const Ray& ray,
                                 double pixel_u, double pixel_v,
                                 std::span<const double> sample_depths);

/// Same statistic for a ray distance function: the defining point of each
/// sample is its nearest intersection on the ray itself.
ReceptiveSpread ray_receptive_spread(const Bvh& bvh, const Camera& camera, const Ray& ray,
                                     double pixel_u, double pixel_v,
                                     std::span<const double> sample_depths);

}  // namespace raydf
