#pragma once

#include <array>
#include <vector>

#include "tgf/geometry.hpp"
#include "tgf/mesh.hpp"

namespace tgf {

/// World-space mesh with cached triangle bounds for prefiltering.
class PosedMesh {
 public:
  PosedMesh() = default;
  explicit PosedMesh(TriangleMesh world_mesh);

  const TriangleMesh& mesh() const { return mesh_; }
  const Aabb& bounds() const { return bounds_; }
  const Aabb& triangle_bounds(std::size_t i) const { return tri_bounds_[i]; }

 private:
  TriangleMesh mesh_;
  Aabb bounds_;
  std::vector<Aabb> tri_bounds_;
};

/// True iff any triangle pair intersects (AABB-prefiltered), or one mesh sits
/// entirely inside the other. Symmetric.
bool check_mesh_collision(const PosedMesh& a, const PosedMesh& b);
bool check_mesh_collision(const TriangleMesh& a, const TriangleMesh& b);

/// True iff the box touches a triangle of the mesh or either contains the other.
bool box_mesh_collide(const Obb& box, const PosedMesh& mesh);
bool mesh_aabb_collide(const PosedMesh& mesh, const Aabb& box);

/// Open parallel-jaw gripper as three boxes posed by `g`: two fingers
/// (finger_thickness across the baseline and sideways, finger_length along
/// the approach, outer faces flush with the base ends) and the base
/// (max_width along the baseline, base_depth behind the grasp origin).
std::array<Obb, 3> gripper_boxes(const GraspPose& g, const GripperSpec& spec);

}  // namespace tgf
