// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "raydf/vec3.hpp"

namespace raydf {

/// Half-line origin + t * direction, t >= 0. The direction is unit length, so
/// t is metric distance along the ray.
struct Ray {
  Vec3 origin;
  Vec3 direction;

  Ray() = default;
  /// Normalizes `dir`; throws UsageError if it has zero length.
  Ray(const Vec3& o, const Vec3& dir);

  Vec3 at(double t) const { return origin + direction * t; }
};

/// Rigid transform mapping camera coordinates to world coordinates:
/// p_world = rotation * p_cam + translation.
struct Pose {
  Mat3 rotation;
  Vec3 translation;

  Vec3 to_world(const Vec3& p_cam) const { return rotation * p_cam + translation; }
  Vec3 to_camera(const Vec3& p_world) const {
    return rotation.transposed() * (p_world - translation);
  }

  /// Camera at `eye` looking at `target`; camera +z is the viewing direction,
  /// +y points down in the image (OpenCV convention).
  static Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& world_up = {0, 1, 0});
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;  // metric distance from the camera center along the ray
  double z_cam = 0.0;  // z coordinate in camera frame
};

/// Pinhole camera with a depth range.
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;
  double near = 0.0;
  double far = 8.0;
  Pose pose;

  /// Checks fx, fy > 0, image size > 0 and near < far; throws UsageError.
  void validate() const;

  Vec3 center() const { return pose.translation; }

  /// World-space ray through continuous pixel coordinates (u, v).
  Ray pixel_ray(double u, double v) const;

  /// Pinhole projection. Throws UsageError("behind camera") for z_cam <= 0.
  Projection project(const Vec3& p) const;

  /// Symmetric camera with the given horizontal field of view (radians).
  static Camera from_fov(int width, int height, double fov_x, double near, double far,
                         const Pose& pose = {});
};

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh. Construction validates indices and drops
/// zero-area triangles. Not required to be watertight.
class TriangleMesh {
 public:
  TriangleMesh() = default;
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  std::size_t num_triangles() const { return triangles_.size(); }
  bool empty() const { return triangles_.empty(); }

  /// Number of triangles removed as degenerate at construction.
  std::size_t dropped_degenerate() const { return dropped_; }

  std::array<Vec3, 3> corners(std::size_t tri) const {
    const auto& t = triangles_[tri];
    return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
  }

  /// Concatenate two meshes (indices of `other` are offset).
  void append(const TriangleMesh& other);

 private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::size_t dropped_ = 0;
};

struct Aabb {
  Vec3 lo{1e300, 1e300, 1e300};
  Vec3 hi{-1e300, -1e300, -1e300};

  void extend(const Vec3& p) {
    lo = min(lo, p);
    hi = max(hi, p);
  }
  void extend(const Aabb& b) {
    lo = min(lo, b.lo);
    hi = max(hi, b.hi);
  }
  Vec3 centroid() const { return (lo + hi) * 0.5; }
  double surface_area() const;
  /// Squared distance from p to the box (0 inside).
  double distance_squared(const Vec3& p) const;
};

/// Bounding volume hierarchy over the triangles of one mesh. The mesh must
/// outlive the BVH. Immutable after construction; queries are thread-safe.
class Bvh {
 public:
  struct Node {
    Aabb bounds;
    std::uint32_t first = 0;  // first primitive (leaf) or right child (inner)
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  explicit Bvh(const TriangleMesh& mesh, std::uint32_t max_leaf_size = 4);
  /// The BVH keeps a reference to the mesh, so temporaries are rejected.
  explicit Bvh(TriangleMesh&&, std::uint32_t = 4) = delete;

  const TriangleMesh& mesh() const { return *mesh_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& primitive_order() const { return order_; }

 private:
  std::uint32_t build(std::uint32_t begin, std::uint32_t end,
                      std::vector<Aabb>& boxes, std::vector<Vec3>& centroids);

  const TriangleMesh* mesh_;
  std::uint32_t max_leaf_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
};

/// Watertight ray/triangle test. Returns the hit distance or a negative value
/// on miss. Rays parallel to the triangle plane never hit.
double intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c);

/// Sorts raw hit distances, keeps those in (0, t_max] and merges hits closer
/// than `merge_tol` to the previously kept one.
std::vector<double> merge_hits(std::vector<double> raw, double t_max, double merge_tol);

/// Distances t in (0, t_max] where `ray` crosses the mesh, strictly increasing.
/// Duplicates within 1e-6 * t_max (shared edges) are merged.
std::vector<double> ray_intersections(const Bvh& bvh, const Ray& ray, double t_max);

struct NearestPoint {
  Vec3 point;
  double distance = 0.0;
  std::uint32_t triangle = 0;
};

/// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Nearest point on the mesh surface. Throws DataError("empty scene").
NearestPoint nearest_point(const Bvh& bvh, const Vec3& p);

/// Rays through the pixel centers of an H x W resampling of the image plane,
/// row-major (v outer, u inner), each sampled at D depths linearly spaced on
/// [far / D, far].
struct FrustumGrid {
  int rows = 0;  // H
  int cols = 0;  // W
  std::vector<Ray> rays;
  std::vector<std::array<double, 2>> pixels;  // (u, v) in image pixels
  std::vector<double> depths;

  std::size_t num_rays() const { return rays.size(); }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(col);
  }
};

/// Throws UsageError unless rows, cols, depth_samples >= 2.
FrustumGrid frustum_grid(const Camera& camera, int rows, int cols, int depth_samples);

/// Pixel-center rays only (no depth sampling); allows 1x1 grids.
FrustumGrid frustum_rays(const Camera& camera, int rows, int cols);

}  // namespace raydf
