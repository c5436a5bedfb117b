// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#include "raydf/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "raydf/error.hpp"
#include "raydf/expectation.hpp"

namespace raydf::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::array<int, 3> parse_grid(const std::string& text, bool need_depth) {
  std::array<int, 3> g{0, 0, 0};
  std::size_t pos = 0;
  int parts = 0;
  while (parts < 3) {
    const auto x = text.find('x', pos);
    const std::string tok = text.substr(pos, x == std::string::npos ? std::string::npos : x - pos);
    try {
      std::size_t used = 0;
      g[parts] = std::stoi(tok, &used);
      if (used != tok.size() || g[parts] <= 0) throw std::invalid_argument("bad");
    } catch (const std::logic_error&) {
      throw UsageError("bad grid '" + text + "' (expected HxW" + (need_depth ? "xD)" : ")"));
    }
    ++parts;
    if (x == std::string::npos) break;
    pos = x + 1;
  }
  if (parts != (need_depth ? 3 : 2) && !(parts == 3 && !need_depth))
    throw UsageError("bad grid '" + text + "' (expected HxW" + (need_depth ? "xD)" : ")"));
  return g;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw UsageError("bad " + what + " '" + text + "'");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const auto c = text.find(',', pos);
    out.push_back(parse_double(text.substr(pos, c == std::string::npos ? std::string::npos : c - pos),
                               "number"));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  return out;
}

namespace {

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto c = text.find(',', pos);
    out.push_back(text.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  return out;
}

struct Globals {
  std::uint64_t seed = 0;
  std::string out = ".";
  int threads = 0;
};

struct SceneInput {
  TriangleMesh mesh;
  Camera camera;
};

SceneInput load_input(const std::string& mesh, const std::string& scene, const std::string& camera) {
  if (mesh.empty() == scene.empty()) throw UsageError("give exactly one of --mesh or --scene");
  SceneInput in;
  if (!scene.empty()) {
    Scene s = builtin_or_file_scene(scene);
    in.mesh = std::move(s.mesh);
    in.camera = s.camera;
  } else {
    if (camera.empty()) throw UsageError("--mesh requires --camera");
    in.mesh = load_obj(mesh);
  }
  if (!camera.empty()) {
    try {
      in.camera = camera_from_json(nlohmann::json::parse(read_file(camera)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(camera + ": " + e.what());
    }
  }
  if (in.mesh.empty()) throw DataError("scene has no triangles");
  return in;
}

nlohmann::json load_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

ojson options_json(const CLI::App* sub) {
  ojson j = ojson::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.empty() || name == "--help" || name == "-h,--help") continue;
    std::string key = opt->get_single_name();
    if (opt->get_expected_max() == 0) {
      j[key] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& res = opt->results();
      if (res.size() == 1) j[key] = res[0];
      else j[key] = res;
    } else {
      j[key] = opt->get_default_str();
    }
  }
  return j;
}

void write_config(const Globals& g, const CLI::App* sub) {
  ojson j;
  j["command"] = sub->get_name();
  j["seed"] = g.seed;
  j["threads"] = g.threads;
  j["options"] = options_json(sub);
  export_json(j, fs::path(g.out) / "config.json");
}

int exit_code(const Error& e) {
  switch (e.category()) {
    case Error::Category::Usage: return kUsage;
    case Error::Category::Data: return kData;
    case Error::Category::Numeric: return kNumeric;
  }
  return kData;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ray distance fields: intersections, fields, expectations, decoding, metrics"};
  app.name("raydf");
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (0 = auto; RDF_THREADS overrides)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  // intersect
  std::string i_mesh, i_scene, i_camera, i_grid = "32x32";
  auto* intersect = app.add_subcommand("intersect", "per-ray hit depths and hit-count histogram");
  intersect->add_option("--mesh", i_mesh, "OBJ mesh");
  intersect->add_option("--scene", i_scene, "builtin scene name or scene JSON");
  intersect->add_option("--camera", i_camera, "camera JSON");
  intersect->add_option("--grid", i_grid, "HxW")->capture_default_str();

  // field
  std::string f_mesh, f_scene, f_camera, f_kind = "drdf", f_grid = "32x32x128", f_trunc = "none",
                                          f_name = "field.rdfv";
  auto* field = app.add_subcommand("field", "evaluate a field on a frustum grid");
  field->add_option("--mesh", f_mesh, "OBJ mesh");
  field->add_option("--scene", f_scene, "builtin scene name or scene JSON");
  field->add_option("--camera", f_camera, "camera JSON");
  field->add_option("--kind", f_kind, "udf|urdf|srdf|drdf|orf:R")->capture_default_str();
  field->add_option("--grid", f_grid, "HxWxD")->capture_default_str();
  field->add_option("--trunc", f_trunc, "none|B|hard:B|log:B")->capture_default_str();
  field->add_option("--name", f_name, "output volume file")->capture_default_str();

  // expect
  std::string e_kind = "srdf,urdf,drdf,orf:0.25", e_sigma = "0.05,0.1,0.2,0.3", e_n = "1",
              e_range = "-1:2";
  int e_points = 301;
  std::size_t e_mc = 0;
  bool e_zero = false;
  auto* expect = app.add_subcommand("expect", "expected fields under Gaussian hit uncertainty");
  expect->add_option("--kind", e_kind, "comma-separated kinds")->capture_default_str();
  expect->add_option("--sigma", e_sigma, "comma-separated sigmas")->capture_default_str();
  expect->add_option("--n", e_n, "gap to the next hit (inf = single hit)")->capture_default_str();
  expect->add_option("--z-range", e_range, "LO:HI")->capture_default_str();
  expect->add_option("--points", e_points, "curve points")->check(CLI::Range(2, 1000000))->capture_default_str();
  expect->add_option("--mc", e_mc, "Monte-Carlo samples per point (0 = off)")->capture_default_str();
  expect->add_flag("--zero-crossing", e_zero, "also write the sigma -> DRDF zero-crossing curve");

  // decode
  std::string d_volume, d_decoder = "drdf", d_name = "surfaces.json";
  auto* decode = app.add_subcommand("decode", "decode a field volume into hit depths");
  decode->add_option("--volume", d_volume, "volume file")->required();
  decode->add_option("--decoder", d_decoder, "decoder spec")->capture_default_str();
  decode->add_option("--name", d_name, "output file")->capture_default_str();

  // eval
  std::string v_pred, v_gt, v_camera, v_scene, v_mode = "all";
  double v_t = 0.5;
  auto* eval = app.add_subcommand("eval", "Chamfer and Acc/Cmp/F1 of decoded surfaces");
  eval->add_option("--pred", v_pred, "predicted surfaces JSON")->required();
  eval->add_option("--gt", v_gt, "ground-truth surfaces JSON or OBJ mesh")->required();
  eval->add_option("--camera", v_camera, "camera JSON");
  eval->add_option("--scene", v_scene, "take the camera from a builtin scene");
  eval->add_option("--t", v_t, "distance threshold (m)")->capture_default_str();
  eval->add_option("--mode", v_mode, "all|occluded (ray metric printed)")->capture_default_str();

  // demo
  std::string m_scene = "box-room", m_sigma = "0.05,0.1,0.2", m_grid = "32x32x128";
  double m_t = 0.5;
  auto* demo = app.add_subcommand("demo", "compare all fields and decoders on expected fields");
  demo->add_option("--scene", m_scene, "builtin scene name or scene JSON")->capture_default_str();
  demo->add_option("--sigma", m_sigma, "comma-separated sigmas")->capture_default_str();
  demo->add_option("--grid", m_grid, "HxWxD")->capture_default_str();
  demo->add_option("--t", m_t, "metric threshold (m)")->capture_default_str();

  // plot
  std::string p_csv, p_svg = "plot.svg", p_x, p_group, p_title;
  std::vector<std::string> p_y;
  auto* plot = app.add_subcommand("plot", "line plot of a CSV file as SVG");
  plot->add_option("--csv", p_csv, "input CSV")->required();
  plot->add_option("--svg", p_svg, "output SVG")->capture_default_str();
  plot->add_option("--x", p_x, "x column (default: first)");
  plot->add_option("--y", p_y, "y column(s) (default: all numeric)");
  plot->add_option("--group", p_group, "split series by this column");
  plot->add_option("--title", p_title, "plot title");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (const char* env = std::getenv("RDF_THREADS"); env && *env) {
      const double t = parse_double(env, "RDF_THREADS");
      if (t < 0 || t != std::floor(t)) throw UsageError("RDF_THREADS must be a non-negative integer");
      g.threads = static_cast<int>(t);
    }
    if (g.threads > 0) omp_set_num_threads(g.threads);
    const fs::path outdir(g.out);
    const CLI::App* sub = app.get_subcommands().front();

    if (sub == intersect) {
      const auto grid = parse_grid(i_grid, false);
      const SceneInput in = load_input(i_mesh, i_scene, i_camera);
      const Bvh bvh(in.mesh);
      const FrustumGrid rays = frustum_rays(in.camera, grid[0], grid[1]);
      SurfaceSet s;
      s.rows = grid[0];
      s.cols = grid[1];
      s.hits = grid_intersections(bvh, rays, in.camera.far);
      CsvTable hist;
      hist.header = {"hits", "rays"};
      std::vector<std::uint64_t> counts;
      for (const auto& h : s.hits) {
        if (counts.size() <= h.size()) counts.resize(h.size() + 1, 0);
        ++counts[h.size()];
      }
      for (std::size_t k = 0; k < counts.size(); ++k)
        hist.add({static_cast<double>(k), static_cast<double>(counts[k])});
      export_json(surfaces_to_json(s), outdir / "hits.json");
      export_csv(hist, outdir / "hit_histogram.csv");
      out << "intersect: " << s.num_rays() << " rays, histogram in hit_histogram.csv\n";
    } else if (sub == field) {
      const auto grid = parse_grid(f_grid, true);
      const FieldKind kind = FieldKind::parse(f_kind);
      const Truncation trunc = Truncation::parse(f_trunc);
      const SceneInput in = load_input(f_mesh, f_scene, f_camera);
      const Bvh bvh(in.mesh);
      const FieldVolume vol = evaluate_field(bvh, in.camera, grid[0], grid[1], grid[2], kind, trunc);
      save_volume(vol, outdir / f_name);
      out << "field: wrote " << f_name << "\n";
    } else if (sub == expect) {
      const auto colon = e_range.find(':');
      if (colon == std::string::npos) throw UsageError("--z-range must be LO:HI");
      const double lo = parse_double(e_range.substr(0, colon), "z-range");
      const double hi = parse_double(e_range.substr(colon + 1), "z-range");
      NoiseModel model;
      model.n = parse_double(e_n, "n");
      std::vector<ExpectationCurve> curves;
      std::uint64_t stream = 0;
      for (const auto& k : split_commas(e_kind)) {
        const FieldKind kind = FieldKind::parse(k);
        for (double sigma : parse_list(e_sigma)) {
          model.sigma = sigma;
          model.validate();
          curves.push_back(expectation_curve(kind, model, lo, hi, e_points, e_mc,
                                             derive_seed(g.seed, stream++)));
        }
      }
      export_csv(curve_csv(curves), outdir / "expect.csv");
      if (e_zero) {
        CsvTable zc;
        zc.header = {"sigma", "z_hat"};
        NoiseModel m;
        m.n = model.single_hit() ? 1.0 : model.n;
        // Sweep up to just below the bracket limit, plus the requested sigmas;
        // a requested sigma past the limit fails with "crossing lost".
        std::vector<double> sigmas;
        for (int i = 1; i <= 78; ++i) sigmas.push_back(i * 0.005 * m.n);
        for (double sigma : parse_list(e_sigma)) sigmas.push_back(sigma);
        std::sort(sigmas.begin(), sigmas.end());
        sigmas.erase(std::unique(sigmas.begin(), sigmas.end(),
                                 [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                     sigmas.end());
        for (double sigma : sigmas) {
          m.sigma = sigma;
          zc.add({m.sigma, drdf_zero_crossing(m)});
        }
        export_csv(zc, outdir / "zero_crossing.csv");
      }
      out << "expect: " << curves.size() << " curves\n";
    } else if (sub == decode) {
      const DecoderKind dec = DecoderKind::parse(d_decoder);
      const FieldVolume vol = load_volume(d_volume);
      const SurfaceSet s = decode_volume(vol, dec);
      export_json(surfaces_to_json(s), outdir / d_name);
      out << "decode: wrote " << d_name << "\n";
    } else if (sub == eval) {
      const RayMode mode = parse_ray_mode(v_mode);
      if (!(v_t > 0.0)) throw UsageError("--t must be positive");
      if (v_camera.empty() == v_scene.empty()) throw UsageError("give exactly one of --camera or --scene");
      const Camera cam = v_scene.empty() ? camera_from_json(load_json(v_camera))
                                         : builtin_or_file_scene(v_scene).camera;
      const SurfaceSet pred = surfaces_from_json(load_json(v_pred));
      SurfaceSet gt;
      if (fs::path(v_gt).extension() == ".obj") {
        const TriangleMesh mesh = load_obj(v_gt);
        const Bvh bvh(mesh);
        gt.rows = pred.rows;
        gt.cols = pred.cols;
        gt.hits = grid_intersections(bvh, frustum_rays(cam, pred.rows, pred.cols), cam.far);
      } else {
        gt = surfaces_from_json(load_json(v_gt));
      }
      const MetricsReport r = evaluate_surfaces(pred, gt, cam, v_t, v_t, g.seed);
      export_json(report_to_json(r), outdir / "report.json");
      export_csv(chamfer_curve_csv(r.chamfer_curve), outdir / "chamfer_curve.csv");
      const Prf& ray = mode == RayMode::All ? r.ray_all : r.ray_occluded;
      out << "eval: chamfer " << format_number(r.chamfer_mean) << ", ray-" << v_mode << " F1 "
          << format_number(ray.f1) << "\n";
    } else if (sub == demo) {
      DemoOptions opt;
      opt.scene = m_scene;
      opt.sigmas = parse_list(m_sigma);
      opt.grid = parse_grid(m_grid, true);
      opt.t = m_t;
      opt.seed = g.seed;
      const auto rows = run_demo(opt);
      const CsvTable table = demo_table(rows);
      export_csv(table, outdir / "demo_table.csv");
      ojson j;
      j["scene"] = m_scene;
      j["grid"] = opt.grid;
      j["seed"] = g.seed;
      j["rows"] = ojson::array();
      for (const auto& r : rows)
        j["rows"].push_back({{"sigma", round9(r.sigma)},
                             {"field", r.field},
                             {"decoder", r.decoder},
                             {"hit_error", round9(r.hit_error)},
                             {"report", report_to_json(r.report)}});
      export_json(j, outdir / "demo.json");
      out << table.str();
    } else if (sub == plot) {
      const CsvTable t = parse_csv(read_file(p_csv));
      const std::string svg = plot_svg(t, p_x, p_y, p_group, p_title.empty() ? p_csv : p_title);
      write_file_atomic(outdir / p_svg, svg);
      out << "plot: wrote " << p_svg << "\n";
    }
    write_config(g, sub);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}

}  // namespace raydf::cli
