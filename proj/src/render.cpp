#include "tgf/render.hpp"

#include "tgf/desk_assets.hpp"
#include "tgf/error.hpp"
#include "tgf/parallel.hpp"
#include "tgf/rng.hpp"

namespace tgf {

namespace {

void add_box(SceneTriangles& out, const Aabb& box) {
  const TriangleMesh mesh = make_box(box.lo, box.hi);
  for (std::size_t i = 0; i < mesh.triangle_count(); ++i) {
    out.triangles.push_back(mesh.triangle(i));
    out.object_ids.push_back(0);
    out.triangle_ids.push_back(-1);
  }
}

}  // namespace

SceneTriangles scene_triangles(const Scene& scene, std::span<const ObjectModel> catalog) {
  SceneTriangles out;
  add_box(out, scene.table.box());
  for (const LiftCube& cube : scene.lift_cubes) add_box(out, cube.box());
  for (std::size_t p = 0; p < scene.placements.size(); ++p) {
    const ObjectModel& obj = find_object(catalog, scene.placements[p].object_id);
    const TriangleMesh posed = obj.mesh.transformed(scene.placements[p].pose);
    for (std::size_t i = 0; i < posed.triangle_count(); ++i) {
      out.triangles.push_back(posed.triangle(i));
      out.object_ids.push_back(static_cast<std::int32_t>(p + 1));
      out.triangle_ids.push_back(static_cast<std::int32_t>(i));
    }
  }
  return out;
}

LabeledCloud render_view(const SceneTriangles& geometry, const TriangleBvh& bvh,
                         const CameraSpec& camera, const RenderOptions& options) {
  camera.validate();
  const auto width = static_cast<std::size_t>(camera.width);
  const auto height = static_cast<std::size_t>(camera.height);
  const Intrinsics& k = camera.intrinsics;

  struct Row {
    std::vector<Vec3> points;
    std::vector<std::int32_t> object_ids, triangle_ids;
  };
  std::vector<Row> rows(height);
  parallel_for(height, options.threads, [&](std::size_t v) {
    Row& row = rows[v];
    // Per-row noise stream keeps the output independent of scheduling.
    Rng noise(derive_seed(options.noise_seed, v));
    for (std::size_t u = 0; u < width; ++u) {
      const Vec3 local((static_cast<double>(u) + 0.5 - k.cx) / k.fx,
                       (static_cast<double>(v) + 0.5 - k.cy) / k.fy, 1.0);
      const Vec3 dir = camera.pose.rotation * local.normalized();
      const BvhHit hit = bvh.intersect({camera.pose.translation, dir});
      if (!hit.hit()) continue;
      Vec3 p = hit.point;
      if (options.depth_noise > 0) p += (options.depth_noise * noise.normal()) * dir;
      const auto tri = static_cast<std::size_t>(hit.triangle);
      row.points.push_back(p);
      row.object_ids.push_back(geometry.object_ids[tri]);
      row.triangle_ids.push_back(geometry.triangle_ids[tri]);
    }
  });

  LabeledCloud cloud;
  for (Row& row : rows) {
    cloud.points.insert(cloud.points.end(), row.points.begin(), row.points.end());
    cloud.object_ids.insert(cloud.object_ids.end(), row.object_ids.begin(), row.object_ids.end());
    cloud.triangle_ids.insert(cloud.triangle_ids.end(), row.triangle_ids.begin(),
                              row.triangle_ids.end());
  }
  return cloud;
}

LabeledCloud render_cloud(const Scene& scene, int camera_index, std::span<const ObjectModel> catalog,
                          const RenderOptions& options) {
  if (camera_index < 0 || static_cast<std::size_t>(camera_index) >= scene.cameras.size())
    throw Error(ErrorCode::InvalidCamera, "camera index " + std::to_string(camera_index) +
                                              " out of range for " + scene.scene_id);
  const SceneTriangles geometry = scene_triangles(scene, catalog);
  const TriangleBvh bvh(geometry.triangles);
  LabeledCloud cloud =
      render_view(geometry, bvh, scene.cameras[static_cast<std::size_t>(camera_index)], options);
  cloud.scene_id = scene.scene_id;
  cloud.camera_index = camera_index;
  return cloud;
}

PointLabels compute_point_labels(const LabeledCloud& cloud, const Scene& scene,
                                 std::span<const ObjectModel> catalog, Category o, TaskLabel t) {
  if (!task_allowed(o, t))
    throw Error(ErrorCode::TaskNotAllowedForCategory,
                std::string(to_string(t)) + " for " + std::string(to_string(o)));
  if (cloud.object_ids.size() != cloud.size() || cloud.triangle_ids.size() != cloud.size())
    throw Error(ErrorCode::LengthMismatch, "cloud label arrays differ in length");

  std::vector<const ObjectModel*> objects;
  for (const auto& p : scene.placements) objects.push_back(&find_object(catalog, p.object_id));

  PointLabels labels;
  const std::size_t n = cloud.size();
  labels.objectness.assign(n, 0);
  labels.target_objectness.assign(n, 0);
  labels.taskness.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t id = cloud.object_ids[i];
    if (id == 0) continue;
    if (id < 0 || static_cast<std::size_t>(id) > objects.size())
      throw Error(ErrorCode::InvalidArgument, "object id " + std::to_string(id) + " not in scene");
    labels.objectness[i] = 1;
    const ObjectModel& obj = *objects[static_cast<std::size_t>(id - 1)];
    if (obj.category != o) continue;
    labels.target_objectness[i] = 1;
    const auto region = obj.affordances.find(t);
    if (region != obj.affordances.end() && cloud.triangle_ids[i] >= 0 &&
        region->second.count(static_cast<std::uint32_t>(cloud.triangle_ids[i])))
      labels.taskness[i] = 1;
  }
  return labels;
}

}  // namespace tgf
