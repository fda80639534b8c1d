#include "tgf/collision.hpp"

namespace tgf {

PosedMesh::PosedMesh(TriangleMesh world_mesh) : mesh_(std::move(world_mesh)) {
  bounds_ = mesh_.bounds();
  tri_bounds_.reserve(mesh_.triangle_count());
  for (std::size_t i = 0; i < mesh_.triangle_count(); ++i)
    tri_bounds_.push_back(Aabb::of(mesh_.triangle(i)));
}

bool check_mesh_collision(const PosedMesh& a, const PosedMesh& b) {
  if (a.mesh().empty() || b.mesh().empty()) return false;
  if (!a.bounds().overlaps(b.bounds())) return false;
  for (std::size_t i = 0; i < a.mesh().triangle_count(); ++i) {
    const Aabb& ba = a.triangle_bounds(i);
    if (!ba.overlaps(b.bounds())) continue;
    const Triangle ta = a.mesh().triangle(i);
    for (std::size_t j = 0; j < b.mesh().triangle_count(); ++j) {
      if (!ba.overlaps(b.triangle_bounds(j))) continue;
      if (triangles_intersect(ta, b.mesh().triangle(j))) return true;
    }
  }
  // No crossing surfaces: the only remaining overlap is a component of one
  // mesh nested inside the other, which shows up as a contained vertex.
  auto any_vertex_inside = [](const PosedMesh& inner, const PosedMesh& outer) {
    for (const Vec3& v : inner.mesh().vertices())
      if (outer.bounds().contains(v) && point_inside_mesh(outer.mesh(), v)) return true;
    return false;
  };
  return any_vertex_inside(a, b) || any_vertex_inside(b, a);
}

bool check_mesh_collision(const TriangleMesh& a, const TriangleMesh& b) {
  return check_mesh_collision(PosedMesh(a), PosedMesh(b));
}

bool box_mesh_collide(const Obb& box, const PosedMesh& mesh) {
  if (mesh.mesh().empty()) return false;
  const Aabb bb = box.bounds();
  if (!bb.overlaps(mesh.bounds())) return false;
  for (std::size_t i = 0; i < mesh.mesh().triangle_count(); ++i) {
    if (!bb.overlaps(mesh.triangle_bounds(i))) continue;
    if (obb_triangle_intersect(box, mesh.mesh().triangle(i))) return true;
  }
  for (const Vec3& v : mesh.mesh().vertices())
    if (bb.contains(v) && box.contains(v)) return true;
  return point_inside_mesh(mesh.mesh(), box.pose.translation);
}

bool mesh_aabb_collide(const PosedMesh& mesh, const Aabb& box) {
  return box_mesh_collide(Obb{RigidTransform{Rotation::identity(), box.center()}, box.half_extents()},
                          mesh);
}

std::array<Obb, 3> gripper_boxes(const GraspPose& g, const GripperSpec& spec) {
  const Vec3 a = g.approach();
  const Vec3 b = g.baseline();
  const double th = spec.finger_thickness;
  const double finger_offset = spec.max_width / 2.0 - th / 2.0;
  const Vec3 finger_half(th / 2.0, th / 2.0, spec.finger_length / 2.0);
  const Vec3 finger_mid = g.translation + (spec.finger_length / 2.0) * a;
  Obb left{{g.rotation, finger_mid - finger_offset * b}, finger_half};
  Obb right{{g.rotation, finger_mid + finger_offset * b}, finger_half};
  Obb base{{g.rotation, g.translation - (spec.base_depth / 2.0) * a},
           Vec3(spec.max_width / 2.0, th / 2.0, spec.base_depth / 2.0)};
  return {left, right, base};
}

}  // namespace tgf
