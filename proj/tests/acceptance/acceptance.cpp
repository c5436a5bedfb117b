// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "raydf/cli.hpp"
#include "raydf/decoding.hpp"
#include "raydf/expectation.hpp"
#include "raydf/gaussian.hpp"
#include "raydf/metrics.hpp"
#include "raydf/scene_io.hpp"

using namespace raydf;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

const double kSigmas[] = {0.05, 0.1, 0.2, 0.3};

// 1. Minimum of the expected URDF.
Outcome urdf_minimum() {
  Outcome o;
  for (double s : kSigmas) {
    const NoiseModel m{0.0, s, 1.0};
    const double v = expected_urdf(0.0, m);
    const double target = s * std::sqrt(2.0 / std::numbers::pi);
    const double err = std::abs(v - target);
    const bool ok = err <= 1e-4;
    o.pass = o.pass && ok;
    o.detail += "s=" + fmt("%.2f", s) + " E=" + fmt("%.6f", v) + " err=" + fmt("%.2e", err) +
                (ok ? "" : "(!)") + " ";
  }
  // Single-hit reference, not part of the verdict.
  const NoiseModel single{0.0, 0.3, std::numeric_limits<double>::infinity()};
  o.detail += "| single-hit s=0.30 err=" +
              fmt("%.1e", std::abs(expected_urdf(0.0, single) - 0.3 * std::sqrt(2.0 / std::numbers::pi)));
  return o;
}

// 2. ORF peak at r = sigma/2.
Outcome orf_peak() {
  Outcome o;
  for (double s : {0.05, 0.1, 0.2}) {
    const NoiseModel m{0.0, s, 1.0};
    const double v = expected_orf(0.0, s / 2, m);
    const bool ok = std::abs(v - 0.3829) <= 1e-3;
    o.pass = o.pass && ok;
    o.detail += "s=" + fmt("%.2f", s) + " peak=" + fmt("%.5f", v) + (ok ? " " : "(!) ");
  }
  return o;
}

// 3. DRDF zero-crossing thresholds.
Outcome zero_crossing() {
  Outcome o;
  double first01 = NAN, first05 = NAN;
  for (int i = 1; i <= 3900; ++i) {
    const double s = i * 1e-4;
    const double z = drdf_zero_crossing({0.0, s, 1.0});
    if (std::isnan(first01) && z > 0.01) first01 = s;
    if (std::isnan(first05) && z > 0.05) first05 = s;
  }
  o.pass = std::abs(first01 - 0.21) <= 0.01 && std::abs(first05 - 0.27) <= 0.01;
  o.detail = "z_hat>0.01 first at s=" + fmt("%.4f", first01) + ", z_hat>0.05 first at s=" +
             fmt("%.4f", first05);
  return o;
}

// 4. Analytic expectations against Monte-Carlo.
Outcome analytic_vs_mc() {
  Outcome o;
  const std::vector<FieldKind> kinds = {FieldKind::srdf(), FieldKind::urdf(), FieldKind::orf(0.25),
                                        FieldKind::drdf()};
  const auto z = linspace(-1.0, 2.0, 101);
  const std::size_t N = 1000000;
  std::size_t bad = 0, total = 0;
  double worst = 0.0;
  for (double s : kSigmas) {
    const NoiseModel m{0.0, s, 1.0};
    const auto mc = mc_expected(kinds, z, m, N, derive_seed(4, static_cast<std::uint64_t>(s * 1000)));
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double a = expected_field(kinds[k], z[i], m);
        // 1/N floor covers points where every draw gives the same value.
        const double se = std::max(mc[k][i].standard_error, 1.0 / N);
        const double zs = std::abs(a - mc[k][i].mean) / se;
        worst = std::max(worst, zs);
        ++total;
        if (zs > 4.0) ++bad;
      }
    }
  }
  o.pass = bad == 0;
  o.detail = std::to_string(total - bad) + "/" + std::to_string(total) +
             " points within 4 SE, worst " + fmt("%.2f", worst) + " SE";
  return o;
}

// 5. Median versus mean of the single-hit URDF.
Outcome median_vs_mean() {
  Outcome o;
  const FieldKind urdf = FieldKind::urdf();
  struct Case {
    double sigma, target, tol;
  };
  for (const Case c : {Case{1.0, 0.135, 0.01}, Case{0.5, 0.067, 0.005}}) {
    const NoiseModel m{0.0, c.sigma, std::numeric_limits<double>::infinity()};
    const auto z = linspace(-3 * c.sigma, 3 * c.sigma, 241);
    const std::size_t N = 400000;
    const auto mean = mc_expected(urdf, z, m, N, 55);
    const auto med = mc_median(urdf, z, m, N, 55);
    double gap = 0.0, at = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double g = std::abs(mean[i].mean - med[i]);
      if (g > gap) gap = g, at = z[i];
    }
    const bool ok = std::abs(gap - c.target) <= c.tol;
    o.pass = o.pass && ok;
    o.detail += "s=" + fmt("%.1f", c.sigma) + " max gap " + fmt("%.4f", gap) + " at z=" +
                fmt("%.3f", at) + (ok ? " " : "(!) ");
  }
  return o;
}

// 6. Derivative identities and finite differences.
Outcome derivatives() {
  Outcome o;
  const auto z = linspace(-1.0, 2.0, 301);
  const double h = 1e-5;
  double worst_identity = 0.0, worst_fd = 0.0;
  // Relative error with denominator max(|x|, 1).
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1.0); };
  for (double s : kSigmas) {
    const NoiseModel two{0.0, s, 1.0};
    const NoiseModel single{0.0, s, std::numeric_limits<double>::infinity()};
    for (double zi : z) {
      // URDF identity 2 Phi(z) - 1 holds for the single-hit model.
      worst_identity = std::max(worst_identity, rel(expected_derivative(FieldKind::urdf(), zi, single),
                                                    2.0 * gaussian::cdf(zi, s) - 1.0));
      worst_identity = std::max(worst_identity, rel(expected_derivative(FieldKind::drdf(), zi, two),
                                                    two.n * gaussian::pdf(zi - two.n / 2, s) - 1.0));
      for (const auto& kind : {FieldKind::srdf(), FieldKind::urdf(), FieldKind::drdf()}) {
        for (const auto& m : {two, single}) {
          const double fd =
              (expected_field(kind, zi + h, m) - expected_field(kind, zi - h, m)) / (2 * h);
          worst_fd = std::max(worst_fd, rel(fd, expected_derivative(kind, zi, m)));
        }
      }
      const double fd_orf =
          (expected_orf(zi + h, 0.25, two) - expected_orf(zi - h, 0.25, two)) / (2 * h);
      worst_fd = std::max(worst_fd, rel(fd_orf, expected_orf_derivative(zi, 0.25, two)));
    }
  }
  o.pass = worst_identity <= 1e-5 && worst_fd <= 1e-5;
  o.detail = "identity max rel err " + fmt("%.2e", worst_identity) + ", finite-difference max rel err " +
             fmt("%.2e", worst_fd);
  return o;
}

// 7. Noiseless round trip on random rooms.
Outcome round_trip() {
  Outcome o;
  const int H = 64, W = 64, D = 128;
  double min_gap = std::numeric_limits<double>::infinity();
  double worst[3] = {100, 100, 100};
  std::size_t total_hits = 0, multi = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomRoomParams params;
    params.width = W;
    params.height = H;
    const Scene scene = random_room_scene(seed, params);
    const Bvh bvh(scene.mesh);
    const double step = scene.camera.far / D;
    SurfaceSet gt;
    gt.rows = H;
    gt.cols = W;
    gt.hits = grid_intersections(bvh, frustum_rays(scene.camera, H, W), scene.camera.far);
    for (const auto& h : gt.hits) {
      total_hits += h.size();
      multi += h.size() > 1;
      for (std::size_t i = 1; i < h.size(); ++i) min_gap = std::min(min_gap, h[i] - h[i - 1]);
    }
    struct Pair {
      FieldKind field;
      DecoderKind dec;
    };
    const Pair pairs[] = {{FieldKind::drdf(), DecoderKind::drdf()},
                          {FieldKind::urdf(), DecoderKind::udf_local_minima(4 * step)},
                          {FieldKind::srdf(), DecoderKind::sal()}};
    for (int p = 0; p < 3; ++p) {
      const FieldVolume vol =
          evaluate_field(bvh, scene.camera, H, W, D, pairs[p].field, Truncation::none());
      const SurfaceSet pred = decode_volume(vol, pairs[p].dec);
      const Prf r = ray_prf(pred, gt, step, RayMode::All);
      worst[p] = std::min(worst[p], r.f1);
    }
  }
  o.pass = worst[0] == 100.0 && worst[1] == 100.0 && worst[2] == 100.0;
  o.detail = "min ray-all F1 drdf " + fmt("%.4f", worst[0]) + ", urdf+minima " + fmt("%.4f", worst[1]) +
             ", srdf+sal " + fmt("%.4f", worst[2]) + "; " + std::to_string(total_hits) + " hits, " +
             std::to_string(multi) + " multi-hit rays, min gap " + fmt("%.3f", min_gap) + " m (4 steps = 0.25 m)";
  if (!(min_gap > 0.25)) o.pass = false;
  return o;
}

// 8. Robustness ordering on expected fields.
Outcome robustness() {
  Outcome o;
  std::vector<double> depths;
  for (int k = 1; k <= 300; ++k) depths.push_back(0.01 * k);
  auto sample = [&](auto f) {
    std::vector<double> v;
    for (double d : depths) v.push_back(f(d));
    return v;
  };
  double worst_drdf = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const NoiseModel m{1.0, 0.01 * i, 1.0};
    const auto v = sample([&](double z) { return expected_drdf(z, m); });
    const auto hits = decode_drdf({depths, v});
    double err = std::numeric_limits<double>::infinity();
    for (double h : hits) err = std::min(err, std::abs(h - 1.0));
    worst_drdf = std::max(worst_drdf, err);
  }
  bool nms_empty = true;
  const NoiseModel m02{1.0, 0.2, 1.0};
  const auto urdf = sample([&](double z) { return expected_urdf(z, m02); });
  const double urdf_min = *std::min_element(urdf.begin(), urdf.end());
  for (double tau : {0.05, 0.1, 0.15}) nms_empty = nms_empty && decode_urdf_nms({depths, urdf}, tau).empty();
  bool orf_empty = true;
  for (double s : {0.05, 0.1, 0.2}) {
    const NoiseModel m{1.0, s, 1.0};
    const auto orf = sample([&](double z) { return expected_orf(z, s / 2, m); });
    orf_empty = orf_empty && decode_orf({depths, orf}, 0.5, 1.5 * s).empty();
  }
  o.pass = worst_drdf <= 0.01 && nms_empty && orf_empty;
  o.detail = "drdf max error over s<=0.2: " + fmt("%.4f", worst_drdf) + "; nms(tau<=0.15) at s=0.2 " +
             (nms_empty ? "empty" : "NOT empty") + " (sampled min " + fmt("%.4f", urdf_min) + "); orf@0.5 " +
             (orf_empty ? "empty" : "NOT empty");
  return o;
}

// 9. SAL phantom crossing on a true DRDF.
Outcome sal_phantom() {
  Outcome o;
  const std::vector<double> hits = {1.0, 3.0};
  std::vector<double> depths, v;
  for (int k = 1; k <= 80; ++k) {
    depths.push_back(0.05 * k);
    v.push_back(drdf_at(hits, 0.05 * k));
  }
  const auto sal = decode_sal({depths, v});
  const auto drdf = decode_drdf({depths, v});
  const double tol = 0.05;
  o.pass = sal.size() == 3 && std::abs(sal[1] - 2.0) <= tol && drdf.size() == 2 &&
           std::abs(drdf[0] - 1.0) <= tol && std::abs(drdf[1] - 3.0) <= tol;
  std::ostringstream ss;
  ss << "sal {";
  for (double x : sal) ss << ' ' << fmt("%.3f", x);
  ss << " } drdf {";
  for (double x : drdf) ss << ' ' << fmt("%.3f", x);
  ss << " }";
  o.detail = ss.str();
  return o;
}

// 10. Metrics against brute force.
Outcome metrics_oracles() {
  Outcome o;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto cloud = [&] {
    PointCloud c;
    for (int i = 0; i < 100; ++i) c.points.push_back({u(rng), u(rng), u(rng)});
    return c;
  };
  auto brute = [](const PointCloud& a, const PointCloud& b) {
    std::vector<double> d;
    for (const auto& p : a.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : b.points) best = std::min(best, length(p - q));
      d.push_back(best);
    }
    return d;
  };
  int mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const PointCloud a = cloud(), b = cloud();
    const auto da = brute(a, b), db = brute(b, a);
    double sa = 0, sb = 0;
    for (double x : da) sa += x;
    for (double x : db) sb += x;
    const double ch = 0.5 * (sa / da.size() + sb / db.size());
    if (chamfer_l1(a, b) != ch) ++mismatches;
    for (double t : {0.1, 0.2, 0.4}) {
      const double acc = 100.0 * std::count_if(da.begin(), da.end(), [&](double x) { return x <= t; }) / 100.0;
      const double cmp = 100.0 * std::count_if(db.begin(), db.end(), [&](double x) { return x <= t; }) / 100.0;
      const double f1 = acc + cmp > 0 ? 2 * acc * cmp / (acc + cmp) : 0.0;
      const Prf p = scene_prf(a, b, t);
      if (p.acc != acc || p.cmp != cmp || p.f1 != f1) ++mismatches;
    }
  }
  SurfaceSet gt = SurfaceSet::empty_grid(1, 1), pred = SurfaceSet::empty_grid(1, 1);
  gt.hits[0] = {1, 2, 3};
  pred.hits[0] = {1, 2.04, 3.5};
  const Prf r = ray_prf(pred, gt, 0.1, RayMode::Occluded);
  const bool worked = std::abs(r.acc - 50) < 1e-12 && std::abs(r.cmp - 50) < 1e-12 && std::abs(r.f1 - 50) < 1e-12;
  o.pass = mismatches == 0 && worked;
  o.detail = std::to_string(mismatches) + " mismatches on 50 cloud pairs; occluded example " +
             fmt("%.2f", r.acc) + "/" + fmt("%.2f", r.cmp) + "/" + fmt("%.2f", r.f1);
  return o;
}

// 11. Receptive-field spread: scene UDF versus ray distance.
Outcome receptive() {
  Outcome o;
  SceneSpec spec;
  Plane near_plane;
  near_plane.normal = {0, 0, 1};
  near_plane.offset = -2.0;
  near_plane.extent = 1.0;
  near_plane.center = {0.3, 0.2, 2.0};
  Plane far_plane;
  far_plane.normal = {0, 0, 1};
  far_plane.offset = -4.0;
  far_plane.extent = 8.0;
  spec.primitives = {near_plane, far_plane};
  const TriangleMesh mesh = gen_scene(spec);
  const Bvh bvh(mesh);
  const Camera cam = Camera::from_fov(64, 64, std::numbers::pi / 3, 0.0, 8.0);
  std::vector<double> depths;
  for (int k = 1; k <= 32; ++k) depths.push_back(0.25 * k);
  double min_scene = std::numeric_limits<double>::infinity(), max_ray = 0.0;
  const double pixels[][2] = {{8.5, 8.5}, {56.5, 32.5}, {32.5, 52.5}, {20.5, 40.5}, {44.5, 12.5}};
  for (const auto& px : pixels) {
    const Ray ray = cam.pixel_ray(px[0], px[1]);
    min_scene = std::min(min_scene, receptive_spread(bvh, cam, ray, px[0], px[1], depths).max_pixels);
    max_ray = std::max(max_ray, ray_receptive_spread(bvh, cam, ray, px[0], px[1], depths).max_pixels);
  }
  // Reprojecting a point on the ray reproduces its pixel up to rounding.
  o.pass = min_scene > 0.0 && max_ray <= 1e-9;
  o.detail = "scene-UDF spread min over rays " + fmt("%.3f", min_scene) + " px, ray-distance max " +
             fmt("%.2e", max_ray) + " px";
  return o;
}

// 12. Determinism of the demo command.
Outcome determinism() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "raydf_acceptance_demo";
  fs::remove_all(base);
  std::ostringstream out, err;
  for (const char* run : {"a", "b"}) {
    const int code = cli::run({"--seed", "12", "--out", (base / run).string(), "demo"}, out, err);
    if (code != 0) {
      o.pass = false;
      o.detail = "demo exited " + std::to_string(code) + ": " + err.str();
      return o;
    }
  }
  int same = 0, files = 0;
  for (const char* name : {"demo_table.csv", "demo.json", "config.json"}) {
    ++files;
    same += read_file(base / "a" / name) == read_file(base / "b" / name);
  }
  fs::remove_all(base);
  o.pass = same == files;
  o.detail = std::to_string(same) + "/" + std::to_string(files) + " output files byte-identical";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> all = {
      {1, "expected-URDF minimum", 1, urdf_minimum},
      {2, "ORF peak", 1, orf_peak},
      {3, "DRDF zero-crossing curve", 1, zero_crossing},
      {4, "analytic vs Monte-Carlo", 60, analytic_vs_mc},
      {5, "median vs mean", 60, median_vs_mean},
      {6, "derivative identities", 1e9, derivatives},
      {7, "noiseless round trip", 120, round_trip},
      {8, "robustness ordering", 1e9, robustness},
      {9, "SAL phantom crossing", 1e9, sal_phantom},
      {10, "metrics oracles", 1e9, metrics_oracles},
      {11, "receptive-field spread", 1e9, receptive},
      {12, "demo determinism", 1e9, determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += " [over budget]";
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] criterion %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
