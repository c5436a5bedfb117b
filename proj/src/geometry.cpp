// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#include "raydf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "raydf/error.hpp"

namespace raydf {

Ray::Ray(const Vec3& o, const Vec3& dir) : origin(o) {
  const double len = length(dir);
  if (!(len > 0.0) || !std::isfinite(len)) throw UsageError("ray direction must be non-zero");
  direction = dir / len;
}

Pose Pose::look_at(const Vec3& eye, const Vec3& target, const Vec3& world_up) {
  const Vec3 forward = normalize(target - eye);
  // Image +y points down, so camera +y is the negated up vector projected off forward.
  Vec3 right = cross(forward, world_up);
  if (length(right) < 1e-12) right = cross(forward, Vec3{0, 0, 1});
  right = normalize(right);
  const Vec3 down = cross(forward, right);
  Pose pose;
  for (int r = 0; r < 3; ++r) {
    pose.rotation.m[r][0] = right[r];
    pose.rotation.m[r][1] = down[r];
    pose.rotation.m[r][2] = forward[r];
  }
  pose.translation = eye;
  return pose;
}

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw UsageError("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw UsageError("camera image size must be positive");
  if (!(near < far) || near < 0.0) throw UsageError("camera requires 0 <= near < far");
}

Ray Camera::pixel_ray(double u, double v) const {
  const Vec3 d_cam{(u - cx) / fx, (v - cy) / fy, 1.0};
  return Ray(pose.translation, pose.rotation * d_cam);
}

Projection Camera::project(const Vec3& p) const {
  const Vec3 pc = pose.to_camera(p);
  if (!(pc.z > 0.0)) throw UsageError("behind camera");
  Projection out;
  out.u = fx * pc.x / pc.z + cx;
  out.v = fy * pc.y / pc.z + cy;
  out.depth = length(pc);
  out.z_cam = pc.z;
  return out;
}

Camera Camera::from_fov(int width, int height, double fov_x, double near, double far,
                        const Pose& pose) {
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = 0.5 * width / std::tan(0.5 * fov_x);
  cam.fy = cam.fx;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.near = near;
  cam.far = far;
  cam.pose = pose;
  cam.validate();
  return cam;
}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)) {
  for (const auto& v : vertices_)
    if (!is_finite(v)) throw DataError("mesh vertex has non-finite coordinates");
  triangles_.reserve(triangles.size());
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    const auto& t = triangles[i];
    for (auto idx : t)
      if (idx >= vertices_.size())
        throw DataError("triangle " + std::to_string(i) + " references vertex " +
                        std::to_string(idx) + " out of range");
    const Vec3& a = vertices_[t[0]];
    const Vec3& b = vertices_[t[1]];
    const Vec3& c = vertices_[t[2]];
    const double twice_area = length(cross(b - a, c - a));
    const double scale = std::max({length_squared(b - a), length_squared(c - a), 1e-300});
    if (!(twice_area > 1e-14 * scale)) {
      ++dropped_;
      continue;
    }
    triangles_.push_back(t);
  }
}

void TriangleMesh::append(const TriangleMesh& other) {
  const auto offset = static_cast<std::uint32_t>(vertices_.size());
  vertices_.insert(vertices_.end(), other.vertices_.begin(), other.vertices_.end());
  for (auto t : other.triangles_) triangles_.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
  dropped_ += other.dropped_;
}

double Aabb::surface_area() const {
  const Vec3 e = hi - lo;
  if (e.x < 0) return 0.0;
  return 2.0 * (e.x * e.y + e.y * e.z + e.z * e.x);
}

double Aabb::distance_squared(const Vec3& p) const {
  double d2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double v = p[k];
    if (v < lo[k]) d2 += (lo[k] - v) * (lo[k] - v);
    else if (v > hi[k]) d2 += (v - hi[k]) * (v - hi[k]);
  }
  return d2;
}

Bvh::Bvh(const TriangleMesh& mesh, std::uint32_t max_leaf_size)
    : mesh_(&mesh), max_leaf_(std::max<std::uint32_t>(1, max_leaf_size)) {
  const auto n = static_cast<std::uint32_t>(mesh.num_triangles());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  if (n == 0) return;
  std::vector<Aabb> boxes(n);
  std::vector<Vec3> centroids(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (const auto& c : mesh.corners(i)) boxes[i].extend(c);
    // Pad so that slab tests on flat (axis-aligned) triangles stay inclusive.
    const Vec3 e = boxes[i].hi - boxes[i].lo;
    const double pad = 1e-9 * (std::max({e.x, e.y, e.z}) + 1.0);
    boxes[i].lo -= Vec3{pad, pad, pad};
    boxes[i].hi += Vec3{pad, pad, pad};
    centroids[i] = boxes[i].centroid();
  }
  nodes_.reserve(2 * n);
  build(0, n, boxes, centroids);
}

std::uint32_t Bvh::build(std::uint32_t begin, std::uint32_t end, std::vector<Aabb>& boxes,
                         std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb bounds, centroid_bounds;
  for (std::uint32_t i = begin; i < end; ++i) {
    bounds.extend(boxes[order_[i]]);
    centroid_bounds.extend(centroids[order_[i]]);
  }
  nodes_[index].bounds = bounds;
  const std::uint32_t count = end - begin;
  const Vec3 extent = centroid_bounds.hi - centroid_bounds.lo;
  int axis = 0;
  if (extent.y > extent.x) axis = 1;
  if (extent.z > extent[axis]) axis = 2;
  if (count <= max_leaf_ || extent[axis] <= 0.0) {
    nodes_[index].first = begin;
    nodes_[index].count = count;
    return index;
  }
  const std::uint32_t mid = begin + count / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return centroids[a][axis] < centroids[b][axis];
                   });
  build(begin, mid, boxes, centroids);
  const std::uint32_t right = build(mid, end, boxes, centroids);
  nodes_[index].first = right;
  nodes_[index].count = 0;
  return index;
}

namespace {

// Per-ray constants for the watertight intersection test (shear + permutation
// so the dominant direction axis becomes z).
struct RayShear {
  int kx, ky, kz;
  double sx, sy, sz;

  explicit RayShear(const Vec3& d) {
    kz = 0;
    if (std::abs(d.y) > std::abs(d[kz])) kz = 1;
    if (std::abs(d.z) > std::abs(d[kz])) kz = 2;
    kx = (kz + 1) % 3;
    ky = (kx + 1) % 3;
    if (d[kz] < 0.0) std::swap(kx, ky);
    sx = d[kx] / d[kz];
    sy = d[ky] / d[kz];
    sz = 1.0 / d[kz];
  }
};

double intersect_sheared(const Vec3& origin, const RayShear& s, const Vec3& a, const Vec3& b,
                         const Vec3& c) {
  const Vec3 A = a - origin;
  const Vec3 B = b - origin;
  const Vec3 C = c - origin;
  const double ax = A[s.kx] - s.sx * A[s.kz];
  const double ay = A[s.ky] - s.sy * A[s.kz];
  const double bx = B[s.kx] - s.sx * B[s.kz];
  const double by = B[s.ky] - s.sy * B[s.kz];
  const double cx = C[s.kx] - s.sx * C[s.kz];
  const double cy = C[s.ky] - s.sy * C[s.kz];
  const double u = cx * by - cy * bx;
  const double v = ax * cy - ay * cx;
  const double w = bx * ay - by * ax;
  if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return -1.0;
  const double det = u + v + w;
  if (det == 0.0) return -1.0;
  const double az = s.sz * A[s.kz];
  const double bz = s.sz * B[s.kz];
  const double cz = s.sz * C[s.kz];
  const double t = (u * az + v * bz + w * cz) / det;
  return t;
}

bool slab_hit(const Aabb& box, const Vec3& origin, const Vec3& inv_dir, double t_max) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    if (std::isinf(inv_dir[k])) {
      if (origin[k] < box.lo[k] || origin[k] > box.hi[k]) return false;
      continue;
    }
    double tn = (box.lo[k] - origin[k]) * inv_dir[k];
    double tf = (box.hi[k] - origin[k]) * inv_dir[k];
    if (tn > tf) std::swap(tn, tf);
    t0 = std::max(t0, tn);
    t1 = std::min(t1, tf);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

double intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c) {
  return intersect_sheared(ray.origin, RayShear(ray.direction), a, b, c);
}

std::vector<double> merge_hits(std::vector<double> raw, double t_max, double merge_tol) {
  std::sort(raw.begin(), raw.end());
  std::vector<double> hits;
  hits.reserve(raw.size());
  for (double t : raw) {
    if (!(t > 0.0) || t > t_max) continue;
    if (!hits.empty() && t - hits.back() <= merge_tol) continue;
    hits.push_back(t);
  }
  return hits;
}

std::vector<double> ray_intersections(const Bvh& bvh, const Ray& ray, double t_max) {
  if (!(t_max > 0.0)) throw UsageError("t_max must be positive");
  std::vector<double> raw;
  const auto& nodes = bvh.nodes();
  if (nodes.empty()) return raw;
  const TriangleMesh& mesh = bvh.mesh();
  const RayShear shear(ray.direction);
  const Vec3 inv{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
  // Slack so hits exactly at t_max survive box clipping.
  const double box_t_max = t_max * (1.0 + 1e-9) + 1e-12;

  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const std::uint32_t ni = stack[--top];
    const auto& node = nodes[ni];
    if (!slab_hit(node.bounds, ray.origin, inv, box_t_max)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto [a, b, c] = mesh.corners(bvh.primitive_order()[i]);
        const double t = intersect_sheared(ray.origin, shear, a, b, c);
        if (t > 0.0 && t <= t_max) raw.push_back(t);
      }
    } else {
      stack[top++] = ni + 1;
      stack[top++] = node.first;
    }
  }
  return merge_hits(std::move(raw), t_max, 1e-6 * t_max);
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Voronoi-region walk (Ericson, Real-Time Collision Detection 5.1.5).
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

NearestPoint nearest_point(const Bvh& bvh, const Vec3& p) {
  const TriangleMesh& mesh = bvh.mesh();
  if (mesh.empty()) throw DataError("empty scene");
  const auto& nodes = bvh.nodes();
  NearestPoint best;
  double best_d2 = std::numeric_limits<double>::infinity();

  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const std::uint32_t ni = stack[--top];
    const auto& node = nodes[ni];
    if (node.bounds.distance_squared(p) >= best_d2) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const std::uint32_t tri = bvh.primitive_order()[i];
        const auto [a, b, c] = mesh.corners(tri);
        const Vec3 q = closest_point_on_triangle(p, a, b, c);
        const double d2 = distance_squared(p, q);
        if (d2 < best_d2 || (d2 == best_d2 && tri < best.triangle)) {
          best_d2 = d2;
          best.point = q;
          best.triangle = tri;
        }
      }
    } else {
      // Push the farther child first so the nearer one is visited first.
      const std::uint32_t left = ni + 1;
      const std::uint32_t right = node.first;
      const double dl = nodes[left].bounds.distance_squared(p);
      const double dr = nodes[right].bounds.distance_squared(p);
      if (dl <= dr) {
        stack[top++] = right;
        stack[top++] = left;
      } else {
        stack[top++] = left;
        stack[top++] = right;
      }
    }
  }
  best.distance = std::sqrt(best_d2);
  return best;
}

namespace {

FrustumGrid make_rays(const Camera& camera, int rows, int cols) {
  camera.validate();
  FrustumGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.rays.reserve(static_cast<std::size_t>(rows) * cols);
  grid.pixels.reserve(grid.rays.capacity());
  const double su = static_cast<double>(camera.width) / cols;
  const double sv = static_cast<double>(camera.height) / rows;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double u = (c + 0.5) * su;
      const double v = (r + 0.5) * sv;
      grid.pixels.push_back({u, v});
      grid.rays.push_back(camera.pixel_ray(u, v));
    }
  }
  return grid;
}

}  // namespace

FrustumGrid frustum_rays(const Camera& camera, int rows, int cols) {
  if (rows < 1 || cols < 1) throw UsageError("grid dimensions must be positive");
  return make_rays(camera, rows, cols);
}

FrustumGrid frustum_grid(const Camera& camera, int rows, int cols, int depth_samples) {
  if (rows < 2 || cols < 2 || depth_samples < 2)
    throw UsageError("frustum grid requires H, W, D >= 2");
  FrustumGrid grid = make_rays(camera, rows, cols);
  const double step = camera.far / depth_samples;
  grid.depths.resize(depth_samples);
  for (int k = 0; k < depth_samples; ++k) grid.depths[k] = step * (k + 1);
  return grid;
}

}  // namespace raydf
