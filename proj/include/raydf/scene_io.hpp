// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "raydf/decoding.hpp"
#include "raydf/expectation.hpp"
#include "raydf/geometry.hpp"
#include "raydf/metrics.hpp"
#include "raydf/ray_fields.hpp"

namespace raydf {

// ---- OBJ ----------------------------------------------------------------

/// Reads v/f records; polygons are fan-triangulated, vt/vn/materials ignored.
/// Throws DataError("<name>:<line>: ...") on malformed input.
TriangleMesh parse_obj(std::istream& in, const std::string& name = "<obj>");
TriangleMesh load_obj(const std::filesystem::path& path);
std::string obj_string(const TriangleMesh& mesh);
void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

// ---- synthetic scenes -----------------------------------------------------

struct AxisBox {
  Vec3 center;
  Vec3 size;
};

/// Square patch of side `extent` on normal . x + offset = 0, centred at the
/// projection of `center` onto the plane.
struct Plane {
  Vec3 normal{0, 0, 1};
  double offset = 0.0;
  double extent = 1.0;
  Vec3 center;
};

/// Rectangular hole in a room wall. Walls: 0 = -x, 1 = +x, 2 = -z, 3 = +z.
/// u runs along the wall from its lower x (or z) corner, v up from the floor.
struct Cutout {
  int wall = 0;
  double u0 = 0.0, u1 = 0.0;
  double v0 = 0.0, v1 = 0.0;
};

/// Open-faced box: floor, ceiling and four walls, y up.
struct Room {
  Vec3 size{4, 3, 4};
  Vec3 center{0, 1.5, 0};
  std::vector<Cutout> cutouts;
};

using Primitive = std::variant<AxisBox, Plane, Room>;

struct SceneSpec {
  std::vector<Primitive> primitives;
  std::uint64_t seed = 0;
};

/// Triangulates the primitives in order. Deterministic; throws DataError on
/// non-positive sizes, bad cutouts or duplicated primitives.
TriangleMesh gen_scene(const SceneSpec& spec);

struct Scene {
  SceneSpec spec;
  TriangleMesh mesh;
  Camera camera;
};

struct RandomRoomParams {
  int width = 64;               // camera image size
  int height = 64;
  double far = 8.0;
  double min_gap = 0.4;         // clearance between distinct surfaces
  double camera_clearance = 0.5;
  int max_panels = 3;
};

/// Closed room around the camera with floating axis-aligned panels and an
/// optional window. Every pair of distinct surfaces is at least min_gap
/// apart, so consecutive ray hits are too.
Scene random_room_scene(std::uint64_t seed, const RandomRoomParams& params = {});

/// Named scenes: "two-triangle", "box-room", "random:<seed>"; anything else
/// is read as a scene JSON file.
Scene builtin_or_file_scene(const std::string& name);

SceneSpec scene_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json scene_spec_to_json(const SceneSpec& spec);

// ---- cameras --------------------------------------------------------------

Camera camera_from_json(const nlohmann::json& j);
nlohmann::ordered_json camera_to_json(const Camera& cam);

// ---- volumes --------------------------------------------------------------

inline constexpr std::uint32_t kVolumeVersion = 1;

/// Little-endian header + f32 payload. The camera pose is not stored; a loaded
/// volume has identity pose, image size 2cx x 2cy and depths k*far/D.
std::string volume_bytes(const FieldVolume& vol);
FieldVolume volume_from_bytes(const std::string& bytes);
void save_volume(const FieldVolume& vol, const std::filesystem::path& path);
FieldVolume load_volume(const std::filesystem::path& path);

// ---- export ---------------------------------------------------------------

/// %.9g formatting used by every CSV/JSON writer.
std::string format_number(double x);
/// Rounds to 9 significant digits so JSON output stays short and stable.
double round9(double x);

/// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<double> values);
  std::string str() const;
};

CsvTable curve_csv(std::span<const ExpectationCurve> curves);
CsvTable chamfer_curve_csv(std::span<const std::pair<double, double>> curve);

nlohmann::ordered_json report_to_json(const MetricsReport& report);
nlohmann::ordered_json surfaces_to_json(const SurfaceSet& s);
SurfaceSet surfaces_from_json(const nlohmann::json& j);

void export_csv(const CsvTable& table, const std::filesystem::path& path);
void export_json(const nlohmann::ordered_json& j, const std::filesystem::path& path);

}  // namespace raydf
