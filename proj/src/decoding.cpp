// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#include "raydf/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>

#include "raydf/error.hpp"

namespace raydf {

void RaySamples::validate() const {
  if (depths.size() != values.size()) throw UsageError("depths and values differ in length");
  if (depths.size() < 2) throw UsageError("need at least 2 samples per ray");
  for (std::size_t i = 1; i < depths.size(); ++i)
    if (!(depths[i] > depths[i - 1])) throw UsageError("sample depths must be strictly increasing");
}

SurfaceSet SurfaceSet::empty_grid(int rows, int cols) {
  SurfaceSet s;
  s.rows = rows;
  s.cols = cols;
  s.hits.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  return s;
}

DecoderKind DecoderKind::udf_local_minima(double window) {
  if (!(window > 0.0)) throw UsageError("window must be positive");
  DecoderKind k;
  k.type = Type::UdfLocalMinima;
  k.window = window;
  return k;
}

DecoderKind DecoderKind::urdf_nms(double tau) {
  if (!(tau > 0.0)) throw UsageError("tau must be positive");
  DecoderKind k;
  k.type = Type::UrdfNms;
  k.tau = tau;
  return k;
}

DecoderKind DecoderKind::urdf_threshold(double tau) {
  if (!(tau >= 0.0)) throw UsageError("tau must be non-negative");
  DecoderKind k;
  k.type = Type::UrdfThreshold;
  k.tau = tau;
  return k;
}

DecoderKind DecoderKind::urdf_gradient() {
  DecoderKind k;
  k.type = Type::UrdfGradientZero;
  return k;
}

DecoderKind DecoderKind::orf_pairing(double level, double pair_gap) {
  if (!(level > 0.0 && level < 1.0)) throw UsageError("level must lie in (0, 1)");
  if (!(pair_gap > 0.0)) throw UsageError("pair_gap must be positive");
  DecoderKind k;
  k.type = Type::OrfPairing;
  k.level = level;
  k.pair_gap = pair_gap;
  return k;
}

DecoderKind DecoderKind::sal() {
  DecoderKind k;
  k.type = Type::SalZeroCross;
  return k;
}

DecoderKind DecoderKind::ldi(double level) {
  if (!(level >= 0.0 && level <= 1.0)) throw UsageError("level must lie in [0, 1]");
  DecoderKind k;
  k.type = Type::LdiConfidence;
  k.level = level;
  return k;
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_number(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw UsageError("bad number '" + s + "' in decoder spec '" + context + "'");
}

}  // namespace

DecoderKind DecoderKind::parse(const std::string& text) {
  const auto parts = split(text, ':');
  const std::string& head = parts[0];
  auto arg = [&](std::size_t i) {
    if (parts.size() <= i) throw UsageError("decoder spec '" + text + "' is missing a parameter");
    return parse_number(parts[i], text);
  };
  auto expect_args = [&](std::size_t n) {
    if (parts.size() != n + 1) throw UsageError("decoder spec '" + text + "' has wrong arity");
  };
  if (head == "drdf") return expect_args(0), drdf();
  if (head == "sal") return expect_args(0), sal();
  if (head == "urdf-grad") return expect_args(0), urdf_gradient();
  if (head == "udf-minima") return expect_args(1), udf_local_minima(arg(1));
  if (head == "urdf-nms") return expect_args(1), urdf_nms(arg(1));
  if (head == "urdf-th") return expect_args(1), urdf_threshold(arg(1));
  if (head == "ldi") return expect_args(1), ldi(arg(1));
  if (head == "orf") return expect_args(2), orf_pairing(arg(1), arg(2));
  throw UsageError("unknown decoder '" + text + "'");
}

std::string DecoderKind::name() const {
  char buf[96];
  switch (type) {
    case Type::DrdfZeroCross: return "drdf";
    case Type::SalZeroCross: return "sal";
    case Type::UrdfGradientZero: return "urdf-grad";
    case Type::UdfLocalMinima: std::snprintf(buf, sizeof(buf), "udf-minima:%.9g", window); break;
    case Type::UrdfNms: std::snprintf(buf, sizeof(buf), "urdf-nms:%.9g", tau); break;
    case Type::UrdfThreshold: std::snprintf(buf, sizeof(buf), "urdf-th:%.9g", tau); break;
    case Type::LdiConfidence: std::snprintf(buf, sizeof(buf), "ldi:%.9g", level); break;
    case Type::OrfPairing:
      std::snprintf(buf, sizeof(buf), "orf:%.9g:%.9g", level, pair_gap);
      break;
  }
  return buf;
}

bool DecoderKind::accepts(const FieldKind& field) const {
  using F = FieldKind::Type;
  switch (type) {
    case Type::DrdfZeroCross: return field.type == F::Drdf;
    case Type::UdfLocalMinima:
    case Type::UrdfNms:
    case Type::UrdfThreshold:
    case Type::UrdfGradientZero: return field.type == F::Urdf || field.type == F::SceneUdf;
    case Type::OrfPairing: return field.type == F::Orf;
    case Type::SalZeroCross: return field.type == F::Srdf || field.type == F::Drdf;
    case Type::LdiConfidence: return false;
  }
  return false;
}

namespace {

// Depth where the segment (d0, v0) -> (d1, v1) reaches `level`.
double interpolate(double d0, double v0, double d1, double v1, double level) {
  if (v1 == v0) return d0;
  const double t = (level - v0) / (v1 - v0);
  return d0 + std::clamp(t, 0.0, 1.0) * (d1 - d0);
}

// Sorted, strictly increasing copy.
std::vector<double> finish(std::vector<double> out) {
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::vector<double> decode_drdf(const RaySamples& s) {
  s.validate();
  std::vector<double> out;
  const auto& d = s.depths;
  const auto& v = s.values;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i] > 0.0 && v[i + 1] <= 0.0) out.push_back(interpolate(d[i], v[i], d[i + 1], v[i + 1], 0.0));
  return finish(std::move(out));
}

std::vector<double> decode_sal(const RaySamples& s) {
  s.validate();
  std::vector<double> out;
  const auto& d = s.depths;
  const auto& v = s.values;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const bool down = v[i] > 0.0 && v[i + 1] <= 0.0;
    const bool up = v[i] < 0.0 && v[i + 1] >= 0.0;
    if (down || up) out.push_back(interpolate(d[i], v[i], d[i + 1], v[i + 1], 0.0));
  }
  return finish(std::move(out));
}

namespace {

// Vertex of the parabola through three points, clamped to [x0, x2].
double parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
  const double a = (x1 - x0) * (y1 - y2);
  const double b = (x1 - x2) * (y1 - y0);
  const double denom = a - b;
  if (denom == 0.0) return x1;
  const double x = x1 - 0.5 * ((x1 - x0) * a - (x1 - x2) * b) / denom;
  return std::clamp(x, x0, x2);
}

}  // namespace

std::vector<double> decode_udf_local_minima(const RaySamples& s, double window) {
  s.validate();
  if (!(window > 0.0)) throw UsageError("window must be positive");
  const auto& d = s.depths;
  const auto& v = s.values;
  const std::size_t n = v.size();
  const double half = 0.5 * window;
  std::vector<double> out;
  std::size_t a = 0;
  while (a < n) {
    std::size_t b = a;
    while (b + 1 < n && v[b + 1] == v[a]) ++b;
    const std::size_t next = b + 1;
    if (a == 0 || b == n - 1) {
      a = next;
      continue;
    }
    bool is_min = true;
    for (std::size_t j = a; j-- > 0 && d[a] - d[j] <= half;)
      if (!(v[j] > v[a])) {
        is_min = false;
        break;
      }
    if (is_min && !(v[a - 1] > v[a])) is_min = false;
    for (std::size_t j = b + 1; is_min && j < n && (d[j] - d[b] <= half || j == b + 1); ++j)
      if (!(v[j] > v[a])) is_min = false;
    if (is_min) {
      if (a == b)
        out.push_back(parabola_vertex(d[a - 1], v[a - 1], d[a], v[a], d[a + 1], v[a + 1]));
      else
        out.push_back(0.5 * (d[a] + d[b]));
    }
    a = next;
  }
  return finish(std::move(out));
}

std::vector<double> decode_urdf_nms(const RaySamples& s, double tau) {
  s.validate();
  if (!(tau > 0.0)) throw UsageError("tau must be positive");
  std::vector<double> out;
  const auto& v = s.values;
  std::size_t i = 0;
  while (i < v.size()) {
    if (!(v[i] < tau)) {
      ++i;
      continue;
    }
    std::size_t best = i;
    while (i < v.size() && v[i] < tau) {
      if (v[i] < v[best]) best = i;
      ++i;
    }
    out.push_back(s.depths[best]);
  }
  return finish(std::move(out));
}

std::vector<double> decode_urdf_threshold(const RaySamples& s, double tau) {
  s.validate();
  std::vector<double> out;
  for (std::size_t i = 0; i < s.values.size(); ++i)
    if (s.values[i] <= tau) out.push_back(s.depths[i]);
  return out;
}

std::vector<double> decode_urdf_gradient(const RaySamples& s) {
  s.validate();
  const auto& d = s.depths;
  const auto& v = s.values;
  const std::size_t n = v.size();
  std::vector<double> out;
  if (n < 4) return out;
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) g[i] = (v[i + 1] - v[i - 1]) / (d[i + 1] - d[i - 1]);
  for (std::size_t i = 1; i + 2 < n; ++i)
    if (g[i] < 0.0 && g[i + 1] >= 0.0) out.push_back(interpolate(d[i], g[i], d[i + 1], g[i + 1], 0.0));
  return finish(std::move(out));
}

std::vector<double> decode_orf(const RaySamples& s, double level, double pair_gap) {
  s.validate();
  if (!(level > 0.0 && level < 1.0)) throw UsageError("level must lie in (0, 1)");
  if (!(pair_gap > 0.0)) throw UsageError("pair_gap must be positive");
  struct Crossing {
    double depth;
    bool onset;
  };
  std::vector<Crossing> crossings;
  const auto& d = s.depths;
  const auto& v = s.values;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i] < level && v[i + 1] >= level)
      crossings.push_back({interpolate(d[i], v[i], d[i + 1], v[i + 1], level), true});
    else if (v[i] >= level && v[i + 1] < level)
      crossings.push_back({interpolate(d[i], v[i], d[i + 1], v[i + 1], level), false});
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < crossings.size(); ++i) {
    const auto& c = crossings[i];
    if (c.onset && i + 1 < crossings.size() && !crossings[i + 1].onset &&
        crossings[i + 1].depth - c.depth <= pair_gap) {
      out.push_back(0.5 * (c.depth + crossings[i + 1].depth));
      ++i;
    } else {
      out.push_back(c.depth);
    }
  }
  return finish(std::move(out));
}

std::vector<double> decode_ldi(std::span<const double> layer_depths,
                               std::span<const double> confidences, double level) {
  if (layer_depths.size() != confidences.size())
    throw UsageError("layer depths and confidences differ in length");
  std::vector<double> out;
  for (std::size_t i = 0; i < layer_depths.size(); ++i)
    if (confidences[i] >= level) out.push_back(layer_depths[i]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> decode_ray(const RaySamples& s, const DecoderKind& kind) {
  using T = DecoderKind::Type;
  switch (kind.type) {
    case T::DrdfZeroCross: return decode_drdf(s);
    case T::UdfLocalMinima: return decode_udf_local_minima(s, kind.window);
    case T::UrdfNms: return decode_urdf_nms(s, kind.tau);
    case T::UrdfThreshold: return decode_urdf_threshold(s, kind.tau);
    case T::UrdfGradientZero: return decode_urdf_gradient(s);
    case T::OrfPairing: return decode_orf(s, kind.level, kind.pair_gap);
    case T::SalZeroCross: return decode_sal(s);
    case T::LdiConfidence: break;
  }
  throw UsageError("LDI decoding works on layers, not sampled rays");
}

namespace {

SurfaceSet prepare(const FieldVolume& vol, const DecoderKind& kind) {
  if (!kind.accepts(vol.kind)) throw UsageError("decoder incompatible with field kind");
  if (vol.values.size() != vol.depths.size() * static_cast<std::size_t>(vol.rows) * vol.cols)
    throw DataError("volume value count does not match its grid");
  return SurfaceSet::empty_grid(vol.rows, vol.cols);
}

}  // namespace

SurfaceSet decode_volume(const FieldVolume& vol, const DecoderKind& kind) {
  SurfaceSet out = prepare(vol, kind);
  const auto n = static_cast<std::int64_t>(out.num_rays());
#pragma omp parallel for schedule(dynamic, 32)
  for (std::int64_t i = 0; i < n; ++i)
    out.hits[i] = decode_ray({vol.depths, vol.ray_values(static_cast<std::size_t>(i))}, kind);
  return out;
}

SurfaceSet decode_volume_serial(const FieldVolume& vol, const DecoderKind& kind) {
  SurfaceSet out = prepare(vol, kind);
  for (std::size_t i = 0; i < out.num_rays(); ++i)
    out.hits[i] = decode_ray({vol.depths, vol.ray_values(i)}, kind);
  return out;
}

}  // namespace raydf
