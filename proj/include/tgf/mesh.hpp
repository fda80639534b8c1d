#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "tgf/geometry.hpp"

namespace tgf {

struct Triangle {
  Vec3 v0, v1, v2;

  Vec3 normal() const { return (v1 - v0).cross(v2 - v0).normalized(); }
  double area() const { return 0.5 * (v1 - v0).cross(v2 - v0).norm(); }
  Vec3 centroid() const { return (v0 + v1 + v2) / 3.0; }
};

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  static Aabb of(const Triangle& t);
  static Aabb centered(const Vec3& center, const Vec3& half_extents) {
    return {center - half_extents, center + half_extents};
  }
  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& o) {
    lo = lo.cwiseMin(o.lo);
    hi = hi.cwiseMax(o.hi);
  }
  bool empty() const { return (lo.array() > hi.array()).any(); }
  bool overlaps(const Aabb& o) const {
    return (lo.array() <= o.hi.array()).all() && (o.lo.array() <= hi.array()).all();
  }
  bool contains(const Vec3& p) const {
    return (lo.array() <= p.array()).all() && (p.array() <= hi.array()).all();
  }
  Vec3 center() const { return (lo + hi) / 2.0; }
  Vec3 half_extents() const { return (hi - lo) / 2.0; }
};

/// Oriented box: `pose` maps box-local coordinates to the world.
struct Obb {
  RigidTransform pose;
  Vec3 half_extents = Vec3::Zero();

  Aabb bounds() const;
  bool contains(const Vec3& p) const;
};

class TriangleMesh {
 public:
  using Face = std::array<std::uint32_t, 3>;

  TriangleMesh() = default;
  /// Throws ParseError when a face references a missing vertex.
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  std::size_t triangle_count() const { return faces_.size(); }
  bool empty() const { return faces_.empty(); }

  Triangle triangle(std::size_t i) const {
    const Face& f = faces_[i];
    return {vertices_[f[0]], vertices_[f[1]], vertices_[f[2]]};
  }
  Aabb bounds() const;
  /// Largest vertex-to-vertex distance of the bounding box diagonal.
  double diameter() const;
  /// Signed enclosed volume (positive for outward-facing triangles).
  double signed_volume() const;
  double surface_area() const;

  TriangleMesh transformed(const RigidTransform& t) const;
  TriangleMesh scaled(double s) const;
  /// Appends another mesh as an additional component.
  void append(const TriangleMesh& other);
  void flip_orientation();

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
};

/// Reads an OFF or OBJ (by extension) triangle mesh in meters. Polygons with
/// more than three vertices are fan-triangulated. Throws ParseError.
TriangleMesh load_mesh(const std::filesystem::path& path);
TriangleMesh parse_off(const std::string& text);
TriangleMesh parse_obj(const std::string& text);
std::string format_obj(const TriangleMesh& mesh);

Vec3 closest_point_on_triangle(const Vec3& p, const Triangle& tri);

struct SegmentTriangleClosest {
  double distance = 0.0;
  double segment_param = 0.0;  // in [0, 1] along s0 -> s1
  Vec3 surface_point = Vec3::Zero();
};

SegmentTriangleClosest closest_segment_triangle(const Vec3& s0, const Vec3& s1,
                                                const Triangle& tri);

/// Separating-axis test; touching counts as intersecting.
bool triangles_intersect(const Triangle& a, const Triangle& b);
bool obb_triangle_intersect(const Obb& box, const Triangle& tri);
bool obb_aabb_intersect(const Obb& box, const Aabb& aabb);

/// Winding number of a closed, outward-oriented mesh around `p` from signed
/// ray crossings; several directions vote so edge grazes cannot flip the
/// answer. Overlapping closed components are supported.
bool point_inside_mesh(const TriangleMesh& mesh, const Vec3& p);

}  // namespace tgf
