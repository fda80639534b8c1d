#include "tgf/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tgf/error.hpp"
#include "tgf/rng.hpp"

namespace tgf {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double min_z(const TriangleMesh& mesh) {
  double z = std::numeric_limits<double>::infinity();
  for (const Vec3& v : mesh.vertices()) z = std::min(z, v.z());
  return z;
}

bool footprint_on_table(const Aabb& box, const Table& table) {
  return box.lo.x() >= -table.half_x && box.hi.x() <= table.half_x && box.lo.y() >= -table.half_y &&
         box.hi.y() <= table.half_y;
}

}  // namespace

void CameraSpec::validate() const {
  if (!(intrinsics.fx > 0) || !(intrinsics.fy > 0))
    throw Error(ErrorCode::InvalidCamera, "focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidCamera, "resolution must be positive");
}

std::optional<std::pair<double, double>> CameraSpec::project(const Vec3& world) const {
  const Vec3 c = pose.inverse().apply(world);
  if (c.z() <= 0) return std::nullopt;
  return std::make_pair(intrinsics.fx * c.x() / c.z() + intrinsics.cx,
                        intrinsics.fy * c.y() / c.z() + intrinsics.cy);
}

const ObjectModel& find_object(std::span<const ObjectModel> catalog, std::string_view id) {
  for (const auto& o : catalog)
    if (o.id == id) return o;
  throw Error(ErrorCode::UnknownObject, std::string(id));
}

std::vector<ObjectModel> sample_object_set(std::span<const ObjectModel> catalog,
                                           std::uint64_t seed) {
  std::set<Category> categories;
  for (const auto& o : catalog) categories.insert(o.category);
  if (catalog.size() < 3 || categories.size() < 2)
    throw Error(ErrorCode::CatalogTooSmall, "need at least 3 objects in 2 categories, have " +
                                                std::to_string(catalog.size()) + " in " +
                                                std::to_string(categories.size()));
  Rng rng(seed);
  const std::size_t k = std::min<std::size_t>(3 + rng.below(4), catalog.size());

  std::vector<std::size_t> chosen;
  for (int round = 0;; ++round) {
    std::vector<std::size_t> order(catalog.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < k; ++i) std::swap(order[i], order[i + rng.below(order.size() - i)]);
    chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));

    std::set<Category> seen;
    for (std::size_t i : chosen) seen.insert(catalog[i].category);
    if (seen.size() >= 2) break;
    if (round == 63) {
      // Dominated catalogs: swap the last pick for some other category.
      std::vector<std::size_t> others;
      for (std::size_t i = 0; i < catalog.size(); ++i)
        if (catalog[i].category != catalog[chosen[0]].category) others.push_back(i);
      chosen.back() = others[rng.below(others.size())];
      break;
    }
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<ObjectModel> out;
  for (std::size_t i : chosen) out.push_back(catalog[i]);
  return out;
}

Scene place_objects(std::span<const ObjectModel> objects, const Table& table,
                    const PlacementConfig& config, std::uint64_t seed) {
  if (!(config.sigma >= 0)) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
  if (config.max_attempts < 1) throw Error(ErrorCode::InvalidArgument, "max_attempts must be >= 1");
  Rng rng(seed);
  Scene scene;
  scene.table = table;
  std::vector<PosedMesh> placed;

  for (const ObjectModel& obj : objects) {
    const bool lift = is_small_category(obj.category);
    const double base_z = min_z(obj.mesh);
    bool done = false;
    for (int attempt = 0; attempt < config.max_attempts && !done; ++attempt) {
      const double x = config.sigma * rng.normal();
      const double y = config.sigma * rng.normal();
      const double yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);

      std::optional<LiftCube> cube;
      double support = table.top_z;
      if (lift) {
        cube = LiftCube{Vec3(x, y, table.top_z + kLiftCubeEdge / 2.0), kLiftCubeEdge};
        support = cube->top();
      }
      const RigidTransform pose{Rotation::about_z(yaw),
                                Vec3(x, y, support + config.rest_clearance - base_z)};
      PosedMesh candidate(obj.mesh.transformed(pose));

      if (!footprint_on_table(candidate.bounds(), table)) continue;
      if (cube && !footprint_on_table(cube->box(), table)) continue;

      bool clear = true;
      for (std::size_t i = 0; i < placed.size() && clear; ++i)
        if (check_mesh_collision(candidate, placed[i])) clear = false;
      for (std::size_t i = 0; i < scene.lift_cubes.size() && clear; ++i)
        if (mesh_aabb_collide(candidate, scene.lift_cubes[i].box())) clear = false;
      if (cube) {
        for (std::size_t i = 0; i < placed.size() && clear; ++i)
          if (mesh_aabb_collide(placed[i], cube->box())) clear = false;
        for (std::size_t i = 0; i < scene.lift_cubes.size() && clear; ++i)
          if (scene.lift_cubes[i].box().overlaps(cube->box())) clear = false;
      }
      if (!clear) continue;

      scene.placements.push_back({obj.id, pose, lift});
      if (cube) scene.lift_cubes.push_back(*cube);
      placed.push_back(std::move(candidate));
      done = true;
    }
    if (!done) throw Error(ErrorCode::PlacementFailed, obj.id);
  }
  return scene;
}

std::vector<CameraSpec> generate_cameras(const Table& table, const CameraConfig& config,
                                         std::uint64_t seed) {
  Rng rng(seed);
  const Vec3 target(0.0, 0.0, table.top_z);
  std::vector<CameraSpec> cams;
  double azimuth = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (int k = 0; k < config.count; ++k) {
    if (k > 0)
      azimuth += rng.uniform(config.min_separation_deg * kDeg,
                             (360.0 - config.min_separation_deg) * kDeg);
    const double elevation = rng.uniform(config.min_elevation_deg, config.max_elevation_deg) * kDeg;
    const double distance = rng.uniform(config.min_distance, config.max_distance);
    const Vec3 eye = target + distance * Vec3(std::cos(elevation) * std::cos(azimuth),
                                              std::cos(elevation) * std::sin(azimuth),
                                              std::sin(elevation));
    const Vec3 forward = (target - eye).normalized();
    const Vec3 right = forward.cross(Vec3::UnitZ()).normalized();
    const Vec3 down = forward.cross(right);
    Mat3 m;
    m << right, down, forward;
    CameraSpec cam;
    cam.pose = {Rotation::unchecked(m), eye};
    cam.intrinsics = config.intrinsics;
    cam.width = config.width;
    cam.height = config.height;
    cam.validate();
    cams.push_back(cam);
  }
  return cams;
}

Scene make_scene(std::span<const ObjectModel> catalog, const SceneConfig& config,
                 std::string scene_id, std::uint64_t seed) {
  const auto objects = sample_object_set(catalog, derive_seed(seed, 0));
  Scene scene = place_objects(objects, config.table, config.placement, derive_seed(seed, 1));
  scene.cameras = generate_cameras(config.table, config.cameras, derive_seed(seed, 2));
  scene.scene_id = std::move(scene_id);
  return scene;
}

SceneGeometry::SceneGeometry(const Scene& scene, std::span<const ObjectModel> catalog)
    : scene_(&scene) {
  for (const auto& p : scene.placements) {
    const ObjectModel& obj = find_object(catalog, p.object_id);
    objects_.push_back(&obj);
    posed_.emplace_back(obj.mesh.transformed(p.pose));
  }
}

std::size_t SceneGeometry::placement_of(std::string_view object_id) const {
  for (std::size_t i = 0; i < scene_->placements.size(); ++i)
    if (scene_->placements[i].object_id == object_id) return i;
  throw Error(ErrorCode::UnknownObject, std::string(object_id) + " is not in the scene");
}

bool SceneGeometry::gripper_collides(const GraspPose& g, const GripperSpec& spec,
                                     std::size_t exclude) const {
  const Aabb table = scene_->table.box();
  for (const Obb& box : gripper_boxes(g, spec)) {
    if (obb_aabb_intersect(box, table)) return true;
    for (const LiftCube& cube : scene_->lift_cubes)
      if (obb_aabb_intersect(box, cube.box())) return true;
    for (std::size_t i = 0; i < posed_.size(); ++i)
      if (i != exclude && box_mesh_collide(box, posed_[i])) return true;
  }
  return false;
}

bool gripper_collides(const GraspPose& g, const Scene& scene, std::span<const ObjectModel> catalog,
                      const GripperSpec& spec, std::string_view exclude_object) {
  const SceneGeometry geometry(scene, catalog);
  return geometry.gripper_collides(g, spec, geometry.placement_of(exclude_object));
}

PropagatedGrasps propagate_grasps(const Scene& scene, std::span<const ObjectModel> catalog,
                                  const GripperSpec& spec) {
  const SceneGeometry geometry(scene, catalog);
  PropagatedGrasps out;
  for (std::size_t p = 0; p < scene.placements.size(); ++p) {
    const Placement& placement = scene.placements[p];
    auto& kept = out[placement.object_id];
    for (const AnnotatedGrasp& g : geometry.object(p).grasps) {
      const std::set<TaskLabel> tasks = g.effective_tasks();
      if (tasks.empty()) continue;
      AnnotatedGrasp sg;
      sg.grasp_id = g.grasp_id;
      sg.pose = g.pose.transformed(placement.pose);
      if (geometry.gripper_collides(sg.pose, spec, p)) continue;
      sg.tasks = tasks;
      for (const auto& [t, v] : g.verdicts)
        if (tasks.count(t)) sg.verdicts[t] = v;
      kept.push_back(std::move(sg));
    }
  }
  return out;
}

}  // namespace tgf
