#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tgf/bvh.hpp"
#include "tgf/scene.hpp"

namespace tgf {

/// Single-view point cloud in world coordinates. object_ids[i] is 0 for the
/// table, lift cubes and anything else that is not an object, otherwise the
/// placement index + 1. triangle_ids[i] is the hit triangle's index inside
/// that object's mesh (-1 for background).
struct LabeledCloud {
  std::string scene_id;
  int camera_index = 0;
  std::vector<Vec3> points;
  std::vector<std::int32_t> object_ids;
  std::vector<std::int32_t> triangle_ids;

  std::size_t size() const { return points.size(); }
  bool operator==(const LabeledCloud&) const = default;
};

struct RenderOptions {
  /// Additive noise along each ray, meters (0 = exact surface points).
  double depth_noise = 0.0;
  std::uint64_t noise_seed = 0;
  std::size_t threads = 1;
};

/// All world-space triangles of a scene with their owners.
struct SceneTriangles {
  std::vector<Triangle> triangles;
  std::vector<std::int32_t> object_ids;    // 0 = background
  std::vector<std::int32_t> triangle_ids;  // index in the owning object mesh, -1 for background
};

/// Table box, lift cubes and posed object meshes.
SceneTriangles scene_triangles(const Scene& scene, std::span<const ObjectModel> catalog);

/// One ray per pixel center through the pinhole model; the nearest hit becomes
/// a point, misses are omitted. Points come out in row-major pixel order.
/// Throws InvalidCamera for an out-of-range index.
LabeledCloud render_cloud(const Scene& scene, int camera_index, std::span<const ObjectModel> catalog,
                          const RenderOptions& options = {});

/// Renders prebuilt geometry (shared across cameras of one scene).
LabeledCloud render_view(const SceneTriangles& geometry, const TriangleBvh& bvh,
                         const CameraSpec& camera, const RenderOptions& options = {});

struct PointLabels {
  std::vector<std::uint8_t> objectness;
  std::vector<std::uint8_t> target_objectness;
  std::vector<std::uint8_t> taskness;
};

/// Per-point supervision labels for the query (category o, task t). Every
/// instance of category o counts as a target. Throws
/// TaskNotAllowedForCategory.
PointLabels compute_point_labels(const LabeledCloud& cloud, const Scene& scene,
                                 std::span<const ObjectModel> catalog, Category o, TaskLabel t);

}  // namespace tgf
