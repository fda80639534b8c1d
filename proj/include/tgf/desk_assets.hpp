#pragma once

// Procedural stand-in catalog so the whole pipeline runs without external
// asset downloads: solids of revolution and boxes shaped like the six object
// categories, triangle-set affordance regions, and antipodal object-frame
// grasps.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "tgf/catalog.hpp"

namespace tgf {

/// Closed solid of revolution about +z from a closed (r, z) profile loop
/// (r >= 0). Profile edges longer than `max_edge` are subdivided. Faces are
/// oriented outward. `edge_of_face` (optional) receives, per triangle, the
/// index of the original profile edge it came from.
TriangleMesh make_revolved(const std::vector<std::pair<double, double>>& profile, int sectors,
                           double max_edge, std::vector<int>* edge_of_face = nullptr);

/// Axis-aligned box split into `slices` slabs along x (watertight).
TriangleMesh make_box(const Vec3& lo, const Vec3& hi, int slices = 1);

struct DeskAsset {
  std::string id;
  Category category = Category::Mug;
  double scale = 1.0;
  TriangleMesh mesh;  // unit scale
  std::map<TaskLabel, std::set<std::uint32_t>> affordances;
  std::vector<AnnotatedGrasp> grasps;  // scaled object frame
};

/// Antipodal grasp sampler: pairs a surface point with the opposite surface
/// along its inward normal, closes the jaws across that chord and keeps
/// candidates whose open gripper clears the object itself.
std::vector<GraspPose> sample_antipodal_grasps(const TriangleMesh& mesh, const GripperSpec& spec,
                                               std::size_t count, std::uint64_t seed);

/// Two scale variants per category (12 objects).
std::vector<DeskAsset> build_desk_assets(const GripperSpec& spec, std::uint64_t seed);

/// Writes <id>.obj, <id>.affordances.json, <id>.grasps.json and index.json.
void write_desk_assets(const std::filesystem::path& dir, const std::vector<DeskAsset>& assets);

}  // namespace tgf
