#pragma once

// Cluttered tabletop scenes: object selection, sequential Gaussian placement
// with collision rejection, camera sampling, and propagation of object-frame
// grasps into the scene with gripper collision filtering.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tgf/catalog.hpp"
#include "tgf/collision.hpp"

namespace tgf {

struct Table {
  double half_x = 0.3;
  double half_y = 0.3;
  double top_z = 0.0;
  double thickness = 0.05;

  Aabb box() const {
    return {Vec3(-half_x, -half_y, top_z - thickness), Vec3(half_x, half_y, top_z)};
  }
  bool operator==(const Table&) const = default;
};

inline constexpr double kLiftCubeEdge = 0.05;

struct LiftCube {
  Vec3 center = Vec3::Zero();
  double edge = kLiftCubeEdge;

  Aabb box() const { return Aabb::centered(center, Vec3::Constant(edge / 2.0)); }
  double top() const { return center.z() + edge / 2.0; }
  bool operator==(const LiftCube&) const = default;
};

struct Placement {
  std::string object_id;
  RigidTransform pose;  // object frame -> world
  bool lifted = false;
  bool operator==(const Placement&) const = default;
};

struct Intrinsics {
  double fx = 280.0;
  double fy = 280.0;
  double cx = 160.0;
  double cy = 120.0;
  bool operator==(const Intrinsics&) const = default;
};

/// Pinhole camera. `pose` maps camera coordinates (x right, y down, z
/// forward) to the world.
struct CameraSpec {
  RigidTransform pose;
  Intrinsics intrinsics;
  int width = 320;
  int height = 240;

  /// Throws InvalidCamera for non-positive focal lengths or resolution.
  void validate() const;
  /// Pixel coordinates of a world point, or nullopt when behind the camera.
  std::optional<std::pair<double, double>> project(const Vec3& world) const;
  bool operator==(const CameraSpec&) const = default;
};

struct Scene {
  std::string scene_id;
  Table table;
  std::vector<Placement> placements;
  std::vector<LiftCube> lift_cubes;  // k-th cube supports the k-th lifted placement
  std::vector<CameraSpec> cameras;
  bool operator==(const Scene&) const = default;
};

/// Throws UnknownObject.
const ObjectModel& find_object(std::span<const ObjectModel> catalog, std::string_view id);

/// 3-6 distinct objects covering at least two categories, in catalog order.
/// Throws CatalogTooSmall when fewer than 3 objects or 2 categories exist.
std::vector<ObjectModel> sample_object_set(std::span<const ObjectModel> catalog,
                                           std::uint64_t seed);

struct PlacementConfig {
  double sigma = 0.12;
  int max_attempts = 50;
  /// Gap left between an object and its support so resting contact does not
  /// register as a collision.
  double rest_clearance = 1e-4;
};

/// Sequential rejection sampling: (x, y) ~ N(table center, sigma^2), yaw
/// uniform, resting on the table (or on a lift cube for small categories).
/// Candidates must keep their footprint on the table and clear everything
/// already placed. Throws PlacementFailed naming the object that did not fit.
Scene place_objects(std::span<const ObjectModel> objects, const Table& table,
                    const PlacementConfig& config, std::uint64_t seed);

struct CameraConfig {
  int count = 2;
  double min_elevation_deg = 35.0;
  double max_elevation_deg = 55.0;
  double min_separation_deg = 60.0;
  double min_distance = 0.8;
  double max_distance = 1.2;
  Intrinsics intrinsics;
  int width = 320;
  int height = 240;
};

/// Cameras looking at the table center; consecutive azimuths differ by at
/// least the configured separation in both directions.
std::vector<CameraSpec> generate_cameras(const Table& table, const CameraConfig& config,
                                         std::uint64_t seed);

struct SceneConfig {
  Table table;
  PlacementConfig placement;
  CameraConfig cameras;
};

/// Full scene from one seed: object set, placement and cameras each draw from
/// their own derived stream.
Scene make_scene(std::span<const ObjectModel> catalog, const SceneConfig& config,
                 std::string scene_id, std::uint64_t seed);

/// World-space collision geometry of a scene.
class SceneGeometry {
 public:
  SceneGeometry(const Scene& scene, std::span<const ObjectModel> catalog);

  const Scene& scene() const { return *scene_; }
  const ObjectModel& object(std::size_t placement) const { return *objects_[placement]; }
  const PosedMesh& posed(std::size_t placement) const { return posed_[placement]; }
  std::size_t placement_of(std::string_view object_id) const;  // throws UnknownObject

  /// True iff any of the three gripper boxes touches the table, a lift cube
  /// or an object other than placement `exclude`.
  bool gripper_collides(const GraspPose& g, const GripperSpec& spec, std::size_t exclude) const;

 private:
  const Scene* scene_;
  std::vector<const ObjectModel*> objects_;
  std::vector<PosedMesh> posed_;
};

bool gripper_collides(const GraspPose& g, const Scene& scene, std::span<const ObjectModel> catalog,
                      const GripperSpec& spec, std::string_view exclude_object);

/// Scene-frame grasps per placed object: grasps keep their non-rejected tasks
/// (dropped when none remain) and are discarded when the open gripper
/// collides with the scene.
using PropagatedGrasps = std::map<std::string, std::vector<AnnotatedGrasp>>;
PropagatedGrasps propagate_grasps(const Scene& scene, std::span<const ObjectModel> catalog,
                                  const GripperSpec& spec);

}  // namespace tgf
