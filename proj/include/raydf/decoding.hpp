// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "raydf/ray_fields.hpp"

namespace raydf {

/// Field values sampled at increasing depths along one ray.
struct RaySamples {
  std::span<const double> depths;
  std::span<const double> values;

  /// Throws UsageError unless sizes match, size >= 2 and depths increase.
  void validate() const;
};

/// Decoded (or ground-truth) hit depths per grid ray.
struct SurfaceSet {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<double>> hits;  // rows * cols entries, each sorted

  std::size_t num_rays() const { return hits.size(); }
  /// Empty grid with rows * cols rays.
  static SurfaceSet empty_grid(int rows, int cols);
};

struct DecoderKind {
  enum class Type {
    DrdfZeroCross,
    UdfLocalMinima,
    UrdfNms,
    UrdfThreshold,
    UrdfGradientZero,
    OrfPairing,
    SalZeroCross,
    LdiConfidence,
  };

  Type type = Type::DrdfZeroCross;
  double window = 1.0;    // UdfLocalMinima, meters
  double tau = 0.25;      // UrdfNms / UrdfThreshold, meters
  double level = 0.5;     // OrfPairing / LdiConfidence
  double pair_gap = 0.5;  // OrfPairing, meters

  static DecoderKind drdf() { return {}; }
  static DecoderKind udf_local_minima(double window);
  static DecoderKind urdf_nms(double tau);
  static DecoderKind urdf_threshold(double tau);
  static DecoderKind urdf_gradient();
  static DecoderKind orf_pairing(double level, double pair_gap);
  static DecoderKind sal();
  static DecoderKind ldi(double level);

  /// Parses "drdf", "udf-minima:W", "urdf-nms:T", "urdf-th:T", "urdf-grad",
  /// "orf:LEVEL:GAP", "sal", "ldi:LEVEL".
  static DecoderKind parse(const std::string& text);
  std::string name() const;

  /// Whether this decoder can read a volume of `field`.
  bool accepts(const FieldKind& field) const;
};

/// Positive-to-negative zero crossings, linearly interpolated. Negative to
/// positive crossings (the midpoint jumps) are ignored.
std::vector<double> decode_drdf(const RaySamples& s);

/// Interior samples that are minima of every sample within +-window/2.
/// Single-sample minima are refined with a parabola; plateaus emit their centre.
std::vector<double> decode_udf_local_minima(const RaySamples& s, double window);

/// Connected runs of samples below tau; each emits the depth of its minimum
/// (earliest on ties).
std::vector<double> decode_urdf_nms(const RaySamples& s, double tau);

/// Every sample depth with value <= tau.
std::vector<double> decode_urdf_threshold(const RaySamples& s, double tau);

/// Negative-to-positive crossings of the central-difference gradient.
std::vector<double> decode_urdf_gradient(const RaySamples& s);

/// Level crossings of an occupancy probability. Each onset is paired with the
/// next offset when they are within pair_gap and replaced by their midpoint;
/// unpaired crossings are kept.
std::vector<double> decode_orf(const RaySamples& s, double level, double pair_gap);

/// All zero crossings in both directions.
std::vector<double> decode_sal(const RaySamples& s);

/// Layers whose confidence is >= level, sorted by depth.
std::vector<double> decode_ldi(std::span<const double> layer_depths,
                               std::span<const double> confidences, double level);

/// Runs the per-ray decoder (LdiConfidence is not a volume decoder).
std::vector<double> decode_ray(const RaySamples& s, const DecoderKind& kind);

/// Decodes every ray of the volume. Throws UsageError("decoder incompatible
/// with field kind") on a mismatch.
SurfaceSet decode_volume(const FieldVolume& vol, const DecoderKind& kind);
SurfaceSet decode_volume_serial(const FieldVolume& vol, const DecoderKind& kind);

}  // namespace raydf
