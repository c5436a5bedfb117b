// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#include "raydf/scene_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "raydf/error.hpp"

namespace raydf {

namespace fs = std::filesystem;

// ---- OBJ ----------------------------------------------------------------

namespace {

[[noreturn]] void obj_fail(const std::string& name, std::size_t line, const std::string& msg) {
  throw DataError(name + ":" + std::to_string(line) + ": " + msg);
}

double obj_number(const std::string& tok, const std::string& name, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used == tok.size() && std::isfinite(v)) return v;
  } catch (const std::logic_error&) {
  }
  obj_fail(name, line, "malformed number '" + tok + "'");
}

std::uint32_t obj_index(const std::string& tok, std::size_t vertex_count, const std::string& name,
                        std::size_t line) {
  const std::string head = tok.substr(0, tok.find('/'));
  long long idx = 0;
  try {
    std::size_t used = 0;
    idx = std::stoll(head, &used);
    if (used != head.size()) throw std::invalid_argument("trailing");
  } catch (const std::logic_error&) {
    obj_fail(name, line, "malformed index '" + tok + "'");
  }
  const auto count = static_cast<long long>(vertex_count);
  const long long resolved = idx < 0 ? count + idx : idx - 1;
  if (idx == 0 || resolved < 0 || resolved >= count)
    obj_fail(name, line, "index " + std::to_string(idx) + " refers to a non-existent vertex");
  return static_cast<std::uint32_t>(resolved);
}

}  // namespace

TriangleMesh parse_obj(std::istream& in, const std::string& name) {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    std::vector<std::string> toks;
    for (std::string t; ss >> t;) toks.push_back(t);
    if (tag == "v") {
      if (toks.size() < 3) obj_fail(name, line_no, "vertex needs 3 coordinates");
      vertices.push_back({obj_number(toks[0], name, line_no), obj_number(toks[1], name, line_no),
                          obj_number(toks[2], name, line_no)});
    } else if (tag == "f") {
      if (toks.size() < 3) obj_fail(name, line_no, "face needs at least 3 vertices");
      std::vector<std::uint32_t> idx;
      for (const auto& t : toks) idx.push_back(obj_index(t, vertices.size(), name, line_no));
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) triangles.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  return TriangleMesh(std::move(vertices), std::move(triangles));
}

TriangleMesh load_obj(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_obj(in, path.string());
}

std::string obj_string(const TriangleMesh& mesh) {
  std::string out;
  for (const auto& v : mesh.vertices())
    out += "v " + format_number(v.x) + " " + format_number(v.y) + " " + format_number(v.z) + "\n";
  for (const auto& t : mesh.triangles())
    out += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " +
           std::to_string(t[2] + 1) + "\n";
  return out;
}

void write_obj(const TriangleMesh& mesh, const fs::path& path) {
  write_file_atomic(path, obj_string(mesh));
}

// ---- synthetic scenes -----------------------------------------------------

namespace {

class MeshBuilder {
 public:
  void quad(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    const auto base = static_cast<std::uint32_t>(v_.size());
    v_.insert(v_.end(), {a, b, c, d});
    t_.push_back({base, base + 1, base + 2});
    t_.push_back({base, base + 2, base + 3});
  }
  TriangleMesh build() { return TriangleMesh(std::move(v_), std::move(t_)); }

 private:
  std::vector<Vec3> v_;
  std::vector<Triangle> t_;
};

void require_positive(const Vec3& v, const char* what) {
  if (!(v.x > 0.0 && v.y > 0.0 && v.z > 0.0) || !is_finite(v))
    throw DataError(std::string(what) + " size must be positive");
}

void add_box(MeshBuilder& mb, const AxisBox& b) {
  require_positive(b.size, "box");
  const Vec3 lo = b.center - b.size * 0.5;
  const Vec3 hi = b.center + b.size * 0.5;
  auto p = [&](int i) { return Vec3{i & 1 ? hi.x : lo.x, i & 2 ? hi.y : lo.y, i & 4 ? hi.z : lo.z}; };
  mb.quad(p(0), p(2), p(3), p(1));  // -z
  mb.quad(p(4), p(5), p(7), p(6));  // +z
  mb.quad(p(0), p(4), p(6), p(2));  // -x
  mb.quad(p(1), p(3), p(7), p(5));  // +x
  mb.quad(p(0), p(1), p(5), p(4));  // -y
  mb.quad(p(2), p(6), p(7), p(3));  // +y
}

void add_plane(MeshBuilder& mb, const Plane& pl) {
  const double len = length(pl.normal);
  if (!(len > 0.0) || !std::isfinite(len)) throw DataError("plane normal must be non-zero");
  if (!(pl.extent > 0.0)) throw DataError("plane extent must be positive");
  const Vec3 n = pl.normal / len;
  const double offset = pl.offset / len;
  const Vec3 c = pl.center - n * (dot(n, pl.center) + offset);
  const Vec3 helper = std::abs(n.y) < 0.9 ? Vec3{0, 1, 0} : Vec3{1, 0, 0};
  const Vec3 t1 = normalize(cross(n, helper)) * (0.5 * pl.extent);
  const Vec3 t2 = normalize(cross(n, t1)) * (0.5 * pl.extent);
  mb.quad(c - t1 - t2, c + t1 - t2, c + t1 + t2, c - t1 + t2);
}

// Rectangle [0,U] x [0,V] at origin + u*eu + v*ev with holes removed.
void add_wall(MeshBuilder& mb, const Vec3& origin, const Vec3& eu, const Vec3& ev, double U,
              double V, const std::vector<const Cutout*>& holes) {
  std::vector<double> us{0.0, U}, vs{0.0, V};
  for (const auto* h : holes) {
    us.insert(us.end(), {h->u0, h->u1});
    vs.insert(vs.end(), {h->v0, h->v1});
  }
  std::sort(us.begin(), us.end());
  us.erase(std::unique(us.begin(), us.end()), us.end());
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  for (std::size_t i = 0; i + 1 < us.size(); ++i) {
    for (std::size_t j = 0; j + 1 < vs.size(); ++j) {
      const double um = 0.5 * (us[i] + us[i + 1]);
      const double vm = 0.5 * (vs[j] + vs[j + 1]);
      const bool in_hole = std::any_of(holes.begin(), holes.end(), [&](const Cutout* h) {
        return um > h->u0 && um < h->u1 && vm > h->v0 && vm < h->v1;
      });
      if (in_hole) continue;
      auto at = [&](double u, double v) { return origin + eu * u + ev * v; };
      mb.quad(at(us[i], vs[j]), at(us[i + 1], vs[j]), at(us[i + 1], vs[j + 1]), at(us[i], vs[j + 1]));
    }
  }
}

void add_room(MeshBuilder& mb, const Room& r) {
  require_positive(r.size, "room");
  const Vec3 lo = r.center - r.size * 0.5;
  const Vec3 hi = r.center + r.size * 0.5;
  std::vector<const Cutout*> holes[4];
  for (const auto& c : r.cutouts) {
    if (c.wall < 0 || c.wall > 3) throw DataError("cutout wall must be 0..3");
    const double U = c.wall < 2 ? r.size.z : r.size.x;
    if (!(0.0 <= c.u0 && c.u0 < c.u1 && c.u1 <= U && 0.0 <= c.v0 && c.v0 < c.v1 && c.v1 <= r.size.y))
      throw DataError("cutout lies outside its wall");
    holes[c.wall].push_back(&c);
  }
  const Vec3 ex{1, 0, 0}, ey{0, 1, 0}, ez{0, 0, 1};
  add_wall(mb, lo, ez, ey, r.size.z, r.size.y, holes[0]);
  add_wall(mb, {hi.x, lo.y, lo.z}, ez, ey, r.size.z, r.size.y, holes[1]);
  add_wall(mb, lo, ex, ey, r.size.x, r.size.y, holes[2]);
  add_wall(mb, {lo.x, lo.y, hi.z}, ex, ey, r.size.x, r.size.y, holes[3]);
  mb.quad({lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, lo.y, hi.z}, {lo.x, lo.y, hi.z});
  mb.quad({lo.x, hi.y, lo.z}, {hi.x, hi.y, lo.z}, {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z});
}

nlohmann::ordered_json vec_json(const Vec3& v) { return {round9(v.x), round9(v.y), round9(v.z)}; }

Vec3 vec_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw DataError(std::string("'") + key + "' must be [x, y, z]");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

nlohmann::ordered_json primitive_json(const Primitive& p) {
  nlohmann::ordered_json j;
  if (const auto* b = std::get_if<AxisBox>(&p)) {
    j["type"] = "box";
    j["center"] = vec_json(b->center);
    j["size"] = vec_json(b->size);
  } else if (const auto* pl = std::get_if<Plane>(&p)) {
    j["type"] = "plane";
    j["normal"] = vec_json(pl->normal);
    j["offset"] = round9(pl->offset);
    j["extent"] = round9(pl->extent);
    j["center"] = vec_json(pl->center);
  } else {
    const auto& r = std::get<Room>(p);
    j["type"] = "room";
    j["size"] = vec_json(r.size);
    j["center"] = vec_json(r.center);
    j["cutouts"] = nlohmann::ordered_json::array();
    for (const auto& c : r.cutouts)
      j["cutouts"].push_back({{"wall", c.wall},
                              {"u", {round9(c.u0), round9(c.u1)}},
                              {"v", {round9(c.v0), round9(c.v1)}}});
  }
  return j;
}

}  // namespace

TriangleMesh gen_scene(const SceneSpec& spec) {
  for (std::size_t i = 0; i < spec.primitives.size(); ++i)
    for (std::size_t k = i + 1; k < spec.primitives.size(); ++k)
      if (primitive_json(spec.primitives[i]) == primitive_json(spec.primitives[k]))
        throw DataError("overlapping degenerate primitives");
  MeshBuilder mb;
  for (const auto& p : spec.primitives) {
    if (const auto* b = std::get_if<AxisBox>(&p)) add_box(mb, *b);
    else if (const auto* pl = std::get_if<Plane>(&p)) add_plane(mb, *pl);
    else add_room(mb, std::get<Room>(p));
  }
  TriangleMesh mesh = mb.build();
  if (mesh.dropped_degenerate() > 0) throw DataError("overlapping degenerate primitives");
  return mesh;
}

namespace {

double aabb_gap(const Aabb& a, const Aabb& b) {
  const Vec3 g = max(max(b.lo - a.hi, a.lo - b.hi), Vec3{0, 0, 0});
  return length(g);
}

Camera default_camera(const Pose& pose, int width, int height, double far) {
  return Camera::from_fov(width, height, std::numbers::pi / 3.0, 0.0, far, pose);
}

}  // namespace

Scene random_room_scene(std::uint64_t seed, const RandomRoomParams& params) {
  std::mt19937_64 rng(derive_seed(seed, 0x524f4f4dull));
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  Room room;
  room.size = {uni(3.0, 5.0), uni(2.4, 3.2), uni(3.0, 5.0)};
  room.center = {0.0, 0.5 * room.size.y, 0.0};
  const Vec3 eye{uni(-0.3, 0.3), uni(1.2, 1.6), uni(-0.3, 0.3)};
  const double yaw = uni(0.0, 2.0 * std::numbers::pi);
  const double pitch = uni(-0.2, 0.2);
  const Vec3 dir{std::cos(pitch) * std::sin(yaw), std::sin(pitch), std::cos(pitch) * std::cos(yaw)};

  if (uni(0.0, 1.0) < 0.5) {
    Cutout c;
    c.wall = static_cast<int>(rng() % 4);
    const double U = c.wall < 2 ? room.size.z : room.size.x;
    c.u0 = uni(0.5, 0.5 * U - 0.3);
    c.u1 = c.u0 + uni(0.6, 0.5 * U);
    c.v0 = uni(0.8, 1.1);
    c.v1 = c.v0 + uni(0.6, 1.0);
    c.u1 = std::min(c.u1, U - 0.3);
    c.v1 = std::min(c.v1, room.size.y - 0.3);
    room.cutouts.push_back(c);
  }

  Scene scene;
  scene.spec.seed = seed;
  scene.spec.primitives.push_back(room);

  const Vec3 room_lo = room.center - room.size * 0.5 + Vec3{1, 1, 1} * params.min_gap;
  const Vec3 room_hi = room.center + room.size * 0.5 - Vec3{1, 1, 1} * params.min_gap;
  std::vector<Aabb> placed;
  const int panels = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, params.max_panels)));
  for (int p = 0; p < panels; ++p) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const int axis = static_cast<int>(rng() % 3);
      const double extent = uni(0.5, 1.4);
      Vec3 half{0.5 * extent, 0.5 * extent, 0.5 * extent};
      half[axis] = 0.0;
      Vec3 c;
      for (int k = 0; k < 3; ++k) c[k] = uni(room_lo[k] + half[k], std::max(room_lo[k] + half[k], room_hi[k] - half[k]));
      Aabb box;
      box.extend(c - half);
      box.extend(c + half);
      bool ok = true;
      for (int k = 0; k < 3; ++k) ok = ok && box.lo[k] >= room_lo[k] && box.hi[k] <= room_hi[k];
      ok = ok && std::sqrt(box.distance_squared(eye)) >= params.camera_clearance;
      for (const auto& other : placed) ok = ok && aabb_gap(box, other) >= params.min_gap;
      if (!ok) continue;
      Plane pl;
      pl.normal = Vec3{0, 0, 0};
      pl.normal[axis] = 1.0;
      pl.offset = -c[axis];
      pl.extent = extent;
      pl.center = c;
      scene.spec.primitives.push_back(pl);
      placed.push_back(box);
      break;
    }
  }
  scene.mesh = gen_scene(scene.spec);
  scene.camera = default_camera(Pose::look_at(eye, eye + dir), params.width, params.height, params.far);
  return scene;
}

Scene builtin_or_file_scene(const std::string& name) {
  Scene scene;
  if (name == "two-triangle") {
    Plane pl;
    pl.normal = {0, 0, 1};
    pl.offset = -3.0;
    pl.extent = 2.0;
    scene.spec.primitives.push_back(pl);
    scene.camera = default_camera(Pose{}, 32, 32, 8.0);
  } else if (name == "box-room") {
    Room room;
    room.size = {4, 3, 4};
    room.center = {0, 1.5, 0};
    scene.spec.primitives.push_back(room);
    scene.spec.primitives.push_back(AxisBox{{0, 1.5, 0}, {1, 1, 1}});
    scene.camera = default_camera(Pose::look_at({0, 1.5, 5}, {0, 1.5, 0}), 32, 32, 10.0);
  } else if (name.rfind("random:", 0) == 0) {
    std::uint64_t seed = 0;
    try {
      std::size_t used = 0;
      seed = std::stoull(name.substr(7), &used);
      if (used != name.size() - 7) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw UsageError("bad random scene seed in '" + name + "'");
    }
    return random_room_scene(seed);
  } else {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(name));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(name + ": " + e.what());
    }
    if (!j.contains("scene") || !j.contains("camera"))
      throw DataError(name + ": scene file needs 'scene' and 'camera'");
    scene.spec = scene_spec_from_json(j.at("scene"));
    scene.camera = camera_from_json(j.at("camera"));
  }
  scene.mesh = gen_scene(scene.spec);
  return scene;
}

SceneSpec scene_spec_from_json(const nlohmann::json& j) {
  try {
    SceneSpec spec;
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto& p : j.at("primitives")) {
      const std::string type = p.at("type").get<std::string>();
      if (type == "box") {
        spec.primitives.push_back(AxisBox{vec_from(p, "center"), vec_from(p, "size")});
      } else if (type == "plane") {
        Plane pl;
        pl.normal = vec_from(p, "normal");
        pl.offset = p.at("offset").get<double>();
        pl.extent = p.at("extent").get<double>();
        if (p.contains("center")) pl.center = vec_from(p, "center");
        spec.primitives.push_back(pl);
      } else if (type == "room") {
        Room r;
        r.size = vec_from(p, "size");
        r.center = p.contains("center") ? vec_from(p, "center") : Vec3{0, 0.5 * r.size.y, 0};
        for (const auto& c : p.value("cutouts", nlohmann::json::array())) {
          Cutout cut;
          cut.wall = c.at("wall").get<int>();
          cut.u0 = c.at("u").at(0).get<double>();
          cut.u1 = c.at("u").at(1).get<double>();
          cut.v0 = c.at("v").at(0).get<double>();
          cut.v1 = c.at("v").at(1).get<double>();
          r.cutouts.push_back(cut);
        }
        spec.primitives.push_back(r);
      } else {
        throw DataError("unknown primitive type '" + type + "'");
      }
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad scene spec: ") + e.what());
  }
}

nlohmann::ordered_json scene_spec_to_json(const SceneSpec& spec) {
  nlohmann::ordered_json j;
  j["seed"] = spec.seed;
  j["primitives"] = nlohmann::ordered_json::array();
  for (const auto& p : spec.primitives) j["primitives"].push_back(primitive_json(p));
  return j;
}

// ---- cameras --------------------------------------------------------------

Camera camera_from_json(const nlohmann::json& j) {
  try {
    Camera cam;
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    cam.near = j.value("near", 0.0);
    cam.far = j.value("far", 8.0);
    if (j.contains("fov_deg")) {
      const double fov = j.at("fov_deg").get<double>() * std::numbers::pi / 180.0;
      if (!(fov > 0.0 && fov < std::numbers::pi)) throw UsageError("fov_deg must lie in (0, 180)");
      cam.fx = cam.fy = 0.5 * cam.width / std::tan(0.5 * fov);
      cam.cx = 0.5 * cam.width;
      cam.cy = 0.5 * cam.height;
    } else {
      cam.fx = j.at("fx").get<double>();
      cam.fy = j.at("fy").get<double>();
      cam.cx = j.at("cx").get<double>();
      cam.cy = j.at("cy").get<double>();
    }
    if (j.contains("rotation")) {
      const auto& r = j.at("rotation");
      if (!r.is_array() || r.size() != 9) throw DataError("'rotation' must have 9 entries");
      for (int i = 0; i < 9; ++i) cam.pose.rotation.m[i / 3][i % 3] = r[i].get<double>();
    }
    if (j.contains("translation")) cam.pose.translation = vec_from(j, "translation");
    cam.validate();
    return cam;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad camera: ") + e.what());
  }
}

nlohmann::ordered_json camera_to_json(const Camera& cam) {
  nlohmann::ordered_json j;
  j["fx"] = round9(cam.fx);
  j["fy"] = round9(cam.fy);
  j["cx"] = round9(cam.cx);
  j["cy"] = round9(cam.cy);
  j["width"] = cam.width;
  j["height"] = cam.height;
  j["near"] = round9(cam.near);
  j["far"] = round9(cam.far);
  auto rot = nlohmann::ordered_json::array();
  for (int i = 0; i < 9; ++i) rot.push_back(round9(cam.pose.rotation.m[i / 3][i % 3]));
  j["rotation"] = rot;
  j["translation"] = vec_json(cam.pose.translation);
  return j;
}

// ---- volumes --------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'R', 'D', 'F', 'V'};
constexpr std::size_t kHeaderBytes = 4 + 4 * 5 + 4 * 7;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f32(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

float get_f32(const std::string& in, std::size_t at) {
  const std::uint32_t bits = get_u32(in, at);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

// One f32 slot: ORF radius, or the truncation bound signed by mode
// (0 none, +b hard, -b log).
float param_slot(const FieldVolume& vol) {
  if (vol.kind.type == FieldKind::Type::Orf) return static_cast<float>(vol.kind.radius);
  switch (vol.truncation.mode) {
    case Truncation::Mode::None: return 0.0f;
    case Truncation::Mode::Hard: return static_cast<float>(vol.truncation.bound);
    case Truncation::Mode::Log: return -static_cast<float>(vol.truncation.bound);
  }
  return 0.0f;
}

}  // namespace

std::string volume_bytes(const FieldVolume& vol) {
  const std::size_t n = static_cast<std::size_t>(vol.rows) * vol.cols * vol.depths.size();
  if (vol.values.size() != n) throw UsageError("volume value count does not match its grid");
  std::string out;
  out.reserve(kHeaderBytes + 4 * n);
  out.append(kMagic, 4);
  put_u32(out, kVolumeVersion);
  put_u32(out, static_cast<std::uint32_t>(vol.kind.type));
  put_u32(out, static_cast<std::uint32_t>(vol.rows));
  put_u32(out, static_cast<std::uint32_t>(vol.cols));
  put_u32(out, static_cast<std::uint32_t>(vol.depths.size()));
  put_f32(out, static_cast<float>(vol.camera.near));
  put_f32(out, static_cast<float>(vol.camera.far));
  put_f32(out, static_cast<float>(vol.camera.fx));
  put_f32(out, static_cast<float>(vol.camera.fy));
  put_f32(out, static_cast<float>(vol.camera.cx));
  put_f32(out, static_cast<float>(vol.camera.cy));
  put_f32(out, param_slot(vol));
  for (double v : vol.values) put_f32(out, static_cast<float>(v));
  return out;
}

FieldVolume volume_from_bytes(const std::string& bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw DataError("not a volume file");
  if (get_u32(bytes, 4) != kVolumeVersion)
    throw DataError("unsupported volume version " + std::to_string(get_u32(bytes, 4)));
  const std::uint32_t kind = get_u32(bytes, 8);
  if (kind > static_cast<std::uint32_t>(FieldKind::Type::Orf)) throw DataError("unknown field kind code");
  const std::uint32_t H = get_u32(bytes, 12), W = get_u32(bytes, 16), D = get_u32(bytes, 20);
  if (H == 0 || W == 0 || D < 2) throw DataError("volume grid must be at least 1x1x2");
  const std::uint64_t n = static_cast<std::uint64_t>(H) * W * D;
  const std::uint64_t expected = kHeaderBytes + 4 * n;
  if (bytes.size() < expected) throw DataError("truncated payload");
  if (bytes.size() > expected) throw DataError("payload longer than the header declares");

  FieldVolume vol;
  vol.kind.type = static_cast<FieldKind::Type>(kind);
  vol.rows = static_cast<int>(H);
  vol.cols = static_cast<int>(W);
  vol.camera.near = get_f32(bytes, 24);
  vol.camera.far = get_f32(bytes, 28);
  vol.camera.fx = get_f32(bytes, 32);
  vol.camera.fy = get_f32(bytes, 36);
  vol.camera.cx = get_f32(bytes, 40);
  vol.camera.cy = get_f32(bytes, 44);
  vol.camera.width = std::max(1, static_cast<int>(std::lround(2.0 * vol.camera.cx)));
  vol.camera.height = std::max(1, static_cast<int>(std::lround(2.0 * vol.camera.cy)));
  const float slot = get_f32(bytes, 48);
  if (vol.kind.type == FieldKind::Type::Orf) {
    vol.kind.radius = slot;
    vol.truncation = Truncation::none();
  } else if (slot == 0.0f) {
    vol.truncation = Truncation::none();
  } else {
    vol.truncation = slot > 0.0f ? Truncation::hard(slot) : Truncation::log(-slot);
  }
  vol.depths.resize(D);
  for (std::uint32_t k = 0; k < D; ++k) vol.depths[k] = vol.camera.far / D * (k + 1);
  vol.values.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) vol.values[i] = get_f32(bytes, kHeaderBytes + 4 * i);
  return vol;
}

void save_volume(const FieldVolume& vol, const fs::path& path) {
  write_file_atomic(path, volume_bytes(vol));
}

FieldVolume load_volume(const fs::path& path) {
  try {
    return volume_from_bytes(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---- export ---------------------------------------------------------------

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

double round9(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(format_number(x).c_str(), nullptr);
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void CsvTable::add(std::vector<double> values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(format_number(v));
  rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

CsvTable curve_csv(std::span<const ExpectationCurve> curves) {
  CsvTable t;
  t.header = {"kind", "sigma", "n", "z", "analytic", "derivative", "mc", "mc_se"};
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.z.size(); ++i) {
      const bool mc = i < c.mc.size();
      t.rows.push_back({c.kind.name(), format_number(c.model.sigma), format_number(c.model.n),
                        format_number(c.z[i]), format_number(c.analytic[i]),
                        format_number(c.derivative[i]), mc ? format_number(c.mc[i]) : "",
                        mc ? format_number(c.mc_se[i]) : ""});
    }
  }
  return t;
}

CsvTable chamfer_curve_csv(std::span<const std::pair<double, double>> curve) {
  CsvTable t;
  t.header = {"t", "fraction"};
  for (const auto& [x, f] : curve) t.add({x, f});
  return t;
}

namespace {

nlohmann::ordered_json prf_json(const Prf& p) {
  return {{"acc", round9(p.acc)}, {"cmp", round9(p.cmp)}, {"f1", round9(p.f1)}, {"t", round9(p.t)}};
}

}  // namespace

nlohmann::ordered_json report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["chamfer_mean"] = round9(r.chamfer_mean);
  j["scene"] = prf_json(r.scene);
  j["ray_all"] = prf_json(r.ray_all);
  j["ray_occluded"] = prf_json(r.ray_occluded);
  auto curve = nlohmann::ordered_json::array();
  for (const auto& [t, f] : r.chamfer_curve) curve.push_back({round9(t), round9(f)});
  j["chamfer_curve"] = curve;
  return j;
}

nlohmann::ordered_json surfaces_to_json(const SurfaceSet& s) {
  nlohmann::ordered_json j;
  j["rows"] = s.rows;
  j["cols"] = s.cols;
  auto hits = nlohmann::ordered_json::array();
  for (const auto& ray : s.hits) {
    auto a = nlohmann::ordered_json::array();
    for (double d : ray) a.push_back(round9(d));
    hits.push_back(a);
  }
  j["hits"] = hits;
  return j;
}

SurfaceSet surfaces_from_json(const nlohmann::json& j) {
  try {
    SurfaceSet s;
    s.rows = j.at("rows").get<int>();
    s.cols = j.at("cols").get<int>();
    if (s.rows < 0 || s.cols < 0) throw DataError("surface grid size must be non-negative");
    const auto& hits = j.at("hits");
    if (!hits.is_array() || hits.size() != static_cast<std::size_t>(s.rows) * s.cols)
      throw DataError("'hits' must have rows*cols entries");
    for (const auto& ray : hits) {
      std::vector<double> d = ray.get<std::vector<double>>();
      for (double x : d)
        if (!std::isfinite(x)) throw DataError("non-finite hit depth");
      std::sort(d.begin(), d.end());
      s.hits.push_back(std::move(d));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad surface set: ") + e.what());
  }
}

void export_csv(const CsvTable& table, const fs::path& path) { write_file_atomic(path, table.str()); }

void export_json(const nlohmann::ordered_json& j, const fs::path& path) {
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace raydf
