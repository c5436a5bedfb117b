// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "raydf/cli.hpp"
#include "raydf/error.hpp"
#include "raydf/expectation.hpp"

namespace raydf::cli {

namespace {

double hit_error(const SurfaceSet& pred, const SurfaceSet& gt) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < gt.num_rays(); ++r) {
    const auto& p = pred.hits[r];
    for (double h : gt.hits[r]) {
      double best = 1.0;
      const auto it = std::lower_bound(p.begin(), p.end(), h);
      if (it != p.end()) best = std::min(best, *it - h);
      if (it != p.begin()) best = std::min(best, h - *std::prev(it));
      total += best;
      ++count;
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

FieldVolume expected_volume(const FieldKind& kind, const Camera& cam, const FrustumGrid& grid,
                            const SurfaceSet& gt, double sigma) {
  FieldVolume vol;
  vol.kind = kind;
  vol.camera = cam;
  vol.rows = grid.rows;
  vol.cols = grid.cols;
  vol.depths = grid.depths;
  vol.truncation = Truncation::none();
  const std::size_t D = grid.depths.size();
  vol.values.resize(grid.num_rays() * D);
  const double miss = miss_value(kind, vol.truncation, cam);
  const auto n = static_cast<std::int64_t>(grid.num_rays());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& hits = gt.hits[i];
    for (std::size_t k = 0; k < D; ++k)
      vol.values[i * D + k] = hits.empty() ? miss : expected_along_ray(kind, hits, sigma, grid.depths[k]);
  }
  return vol;
}

}  // namespace

std::vector<DemoRow> run_demo(const DemoOptions& opt) {
  if (opt.sigmas.empty()) throw UsageError("demo needs at least one sigma");
  for (double s : opt.sigmas)
    if (!(s > 0.0)) throw UsageError("sigma must be positive");
  const Scene scene = builtin_or_file_scene(opt.scene);
  const Camera& cam = scene.camera;
  const Bvh bvh(scene.mesh);
  const auto [H, W, D] = opt.grid;
  const FrustumGrid grid = frustum_grid(cam, H, W, D);
  SurfaceSet gt;
  gt.rows = H;
  gt.cols = W;
  gt.hits = grid_intersections(bvh, grid, cam.far);

  const double step = cam.far / D;
  struct Plan {
    FieldKind kind;
    std::vector<DecoderKind> decoders;
  };
  const std::vector<Plan> plans = {
      {FieldKind::urdf(),
       {DecoderKind::udf_local_minima(4 * step), DecoderKind::urdf_nms(2 * step),
        DecoderKind::urdf_threshold(step), DecoderKind::urdf_gradient()}},
      {FieldKind::srdf(), {DecoderKind::sal()}},
      {FieldKind::drdf(), {DecoderKind::drdf(), DecoderKind::sal()}},
      {FieldKind::orf(2 * step), {DecoderKind::orf_pairing(0.5, 6 * step)}},
  };

  std::vector<DemoRow> rows;
  for (double sigma : opt.sigmas) {
    for (const auto& plan : plans) {
      const FieldVolume vol = expected_volume(plan.kind, cam, grid, gt, sigma);
      for (const auto& dec : plan.decoders) {
        DemoRow row;
        row.sigma = sigma;
        row.field = plan.kind.name();
        row.decoder = dec.name();
        const SurfaceSet pred = decode_volume(vol, dec);
        row.hit_error = hit_error(pred, gt);
        row.report = evaluate_surfaces(pred, gt, cam, opt.t, opt.t, opt.seed);
        rows.push_back(std::move(row));
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const DemoRow& a, const DemoRow& b) {
    if (a.sigma != b.sigma) return a.sigma < b.sigma;
    return a.hit_error < b.hit_error;
  });
  return rows;
}

CsvTable demo_table(const std::vector<DemoRow>& rows) {
  CsvTable t;
  t.header = {"sigma",       "field",        "decoder",        "hit_error", "ray_all_acc",
              "ray_all_cmp", "ray_all_f1",   "ray_occluded_f1", "scene_f1", "chamfer"};
  for (const auto& r : rows) {
    t.rows.push_back({format_number(r.sigma), r.field, r.decoder, format_number(r.hit_error),
                      format_number(r.report.ray_all.acc), format_number(r.report.ray_all.cmp),
                      format_number(r.report.ray_all.f1), format_number(r.report.ray_occluded.f1),
                      format_number(r.report.scene.f1), format_number(r.report.chamfer_mean)});
  }
  return t;
}

}  // namespace raydf::cli
