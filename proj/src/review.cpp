#include "tgf/review.hpp"

#include <chrono>
#include <cmath>

#include <httplib.h>

#include "tgf/error.hpp"
#include "tgf/pipeline.hpp"
#include "tgf/version.hpp"

namespace tgf {

namespace {

HttpResult ok(Json body, int status = 200) {
  body["format_version"] = kFormatVersion;
  return {status, std::move(body)};
}

HttpResult fail(int status, std::string_view error, const std::string& message) {
  return {status, {{"format_version", kFormatVersion}, {"error", error}, {"message", message}}};
}

Json grasp_json(const AnnotatedGrasp& g, const GripperSpec& spec) {
  Json j = pose_to_json(g.pose);
  j["grasp_id"] = g.grasp_id;
  Json tasks = Json::array();
  Json verdicts = Json::object();
  for (TaskLabel t : g.tasks) {
    tasks.push_back(std::string(to_string(t)));
    const auto it = g.verdicts.find(t);
    verdicts[std::string(to_string(t))] =
        std::string(to_string(it == g.verdicts.end() ? Verdict::Unreviewed : it->second));
  }
  j["tasks"] = tasks;
  j["verdicts"] = verdicts;
  Json points = Json::array();
  if (g.pose.width <= spec.max_width)
    for (const Vec3& p : five_point_projection(g.pose, spec)) points.push_back({p.x(), p.y(), p.z()});
  j["five_points"] = points;
  return j;
}

}  // namespace

ReviewService::ReviewService(Workspace ws, ReviewOptions options)
    : ws_(std::move(ws)), options_(std::move(options)), spec_(ws_.manifest().gripper) {
  catalog_ = load_catalog(ws_);
  if (options_.static_dir.empty()) options_.static_dir = ws_.path("ui");
}

ReviewService::~ReviewService() { stop(); }

HttpResult ReviewService::list_objects() const {
  std::shared_lock lock(state_mutex_);
  Json objects = Json::array();
  for (const ObjectModel& obj : catalog_) {
    std::size_t counts[3] = {0, 0, 0};
    for (const AnnotatedGrasp& g : obj.grasps)
      for (TaskLabel t : g.tasks) {
        const auto it = g.verdicts.find(t);
        ++counts[static_cast<int>(it == g.verdicts.end() ? Verdict::Unreviewed : it->second)];
      }
    objects.push_back({{"object_id", obj.id},
                       {"category", std::string(to_string(obj.category))},
                       {"grasp_count", obj.grasps.size()},
                       {"counts",
                        {{"unreviewed", counts[0]}, {"accepted", counts[1]}, {"rejected", counts[2]}}}});
  }
  return ok({{"objects", objects}});
}

HttpResult ReviewService::get_object(const std::string& id) const {
  std::shared_lock lock(state_mutex_);
  const ObjectModel* obj = nullptr;
  for (const auto& o : catalog_)
    if (o.id == id) obj = &o;
  if (!obj) return fail(404, "UnknownObject", "no object " + id);

  // Decimate by keeping every k-th triangle; affordances are re-indexed into
  // the kept list.
  const std::size_t n = obj->mesh.triangle_count();
  const std::size_t stride =
      std::max<std::size_t>(1, (n + options_.max_mesh_triangles - 1) / options_.max_mesh_triangles);
  std::vector<std::int64_t> remap(obj->mesh.vertices().size(), -1);
  Json vertices = Json::array(), faces = Json::array(), source = Json::array();
  std::map<TaskLabel, Json> aff;
  for (const auto& [t, tris] : obj->affordances) aff[t] = Json::array();
  std::size_t kept = 0;
  for (std::size_t i = 0; i < n; i += stride, ++kept) {
    for (std::uint32_t v : obj->mesh.faces()[i]) {
      if (remap[v] < 0) {
        remap[v] = static_cast<std::int64_t>(vertices.size() / 3);
        const Vec3& p = obj->mesh.vertices()[v];
        vertices.push_back(p.x());
        vertices.push_back(p.y());
        vertices.push_back(p.z());
      }
      faces.push_back(remap[v]);
    }
    source.push_back(i);
    for (const auto& [t, tris] : obj->affordances)
      if (tris.count(static_cast<std::uint32_t>(i))) aff[t].push_back(kept);
  }
  Json affordances = Json::object();
  for (auto& [t, list] : aff) affordances[std::string(to_string(t))] = std::move(list);
  Json grasps = Json::array();
  for (const AnnotatedGrasp& g : obj->grasps) grasps.push_back(grasp_json(g, spec_));

  return ok({{"object_id", obj->id},
             {"category", std::string(to_string(obj->category))},
             {"scale", obj->scale},
             {"mesh",
              {{"vertices", vertices},
               {"faces", faces},
               {"source_triangles", source},
               {"decimation_stride", stride},
               {"source_triangle_count", n}}},
             {"affordances", affordances},
             {"gripper",
              {{"max_width", spec_.max_width},
               {"finger_length", spec_.finger_length},
               {"base_depth", spec_.base_depth},
               {"finger_thickness", spec_.finger_thickness}}},
             {"grasps", grasps},
             {"cloud", object_cloud(*obj)}});
}

Json ReviewService::object_cloud(const ObjectModel& obj) const {
  {
    std::lock_guard lock(cloud_mutex_);
    const auto it = cloud_cache_.find(obj.id);
    if (it != cloud_cache_.end()) return it->second;
  }
  SceneTriangles geometry;
  for (std::size_t i = 0; i < obj.mesh.triangle_count(); ++i) {
    geometry.triangles.push_back(obj.mesh.triangle(i));
    geometry.object_ids.push_back(1);
    geometry.triangle_ids.push_back(static_cast<std::int32_t>(i));
  }
  const TriangleBvh bvh(geometry.triangles);

  // Fixed oblique view from the front-left, far enough to frame the object.
  const Aabb box = obj.mesh.bounds();
  const Vec3 target = box.center();
  const Vec3 eye = target + 2.5 * std::max(obj.mesh.diameter(), 0.05) * Vec3(1.0, -1.0, 0.8).normalized();
  const Vec3 forward = (target - eye).normalized();
  const Vec3 right = forward.cross(Vec3::UnitZ()).normalized();
  Mat3 m;
  m << right, forward.cross(right), forward;
  CameraSpec cam;
  cam.pose = {Rotation::unchecked(m), eye};
  cam.width = options_.cloud_width;
  cam.height = options_.cloud_height;
  cam.intrinsics = {0.875 * cam.width, 0.875 * cam.width, cam.width / 2.0, cam.height / 2.0};
  const LabeledCloud cloud = render_view(geometry, bvh, cam);

  Json points = Json::array(), tris = Json::array();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    points.push_back(cloud.points[i].x());
    points.push_back(cloud.points[i].y());
    points.push_back(cloud.points[i].z());
    tris.push_back(cloud.triangle_ids[i]);
  }
  Json out = {{"frame", "object"},
              {"width", cam.width},
              {"height", cam.height},
              {"points", points},
              {"triangle_ids", tris}};
  std::lock_guard lock(cloud_mutex_);
  cloud_cache_.emplace(obj.id, out);
  return out;
}

HttpResult ReviewService::post_verdict(const std::string& id, const std::string& body) {
  VerdictRecord record;
  {
    std::shared_lock lock(state_mutex_);
    const ObjectModel* obj = nullptr;
    for (const auto& o : catalog_)
      if (o.id == id) obj = &o;
    if (!obj) return fail(404, "UnknownObject", "no object " + id);

    Json j;
    try {
      j = Json::parse(body);
    } catch (const Json::exception&) {
      return fail(422, "Malformed", "body is not valid JSON");
    }
    if (!j.is_object()) return fail(422, "Malformed", "body must be an object");
    for (const char* key : {"grasp_id", "task", "verdict", "reviewer"})
      if (!j.contains(key) || !j[key].is_string())
        return fail(422, "Malformed", std::string("missing string field '") + key + "'");
    if (j.contains("object_id") && j["object_id"] != id)
      return fail(422, "Malformed", "object_id does not match the path");
    record.object_id = id;
    record.grasp_id = j["grasp_id"].get<std::string>();
    record.reviewer = j["reviewer"].get<std::string>();
    try {
      record.task = parse_task(j["task"].get<std::string>());
    } catch (const Error&) {
      return fail(422, "Malformed", "unknown task " + j["task"].get<std::string>());
    }
    const std::string verdict = j["verdict"].get<std::string>();
    if (verdict == "accepted") {
      record.verdict = Verdict::Accepted;
    } else if (verdict == "rejected") {
      record.verdict = Verdict::Rejected;
    } else {
      return fail(422, "Malformed", "verdict must be 'accepted' or 'rejected'");
    }

    const AnnotatedGrasp* g = obj->find_grasp(record.grasp_id);
    if (!g) return fail(404, "UnknownGrasp", "no grasp " + record.grasp_id + " on " + id);
    if (!g->tasks.count(record.task))
      return fail(409, "TaskNotAssigned", std::string(to_string(record.task)) +
                                              " is not assigned to " + record.grasp_id);
  }
  record.timestamp = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();

  // Appends are serialized; readers keep going until the in-memory update.
  std::lock_guard append_lock(append_mutex_);
  try {
    WorkspaceLock lock(ws_.root(), options_.lock_wait_ms);
    ws_.append_verdict(record);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::WorkspaceLocked) return fail(503, "WorkspaceLocked", e.detail());
    return fail(500, std::string(to_string(e.code())), e.detail());
  }
  {
    std::unique_lock lock(state_mutex_);
    for (auto& o : catalog_)
      if (o.id == id) o = apply_verdict(o, record.grasp_id, record.task, record.verdict);
  }
  return ok(verdict_to_json(record), 201);
}

HttpResult ReviewService::export_ground_truth() const {
  std::shared_lock lock(state_mutex_);
  return ok(tgf::export_ground_truth(catalog_));
}

void ReviewService::install_routes() {
  auto& svr = *server_;
  auto send = [](httplib::Response& res, const HttpResult& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  svr.Get("/api/objects", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, list_objects());
  });
  svr.Get(R"(/api/objects/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_object(req.matches[1]));
  });
  svr.Post(R"(/api/objects/([^/]+)/verdicts)",
           [this, send](const httplib::Request& req, httplib::Response& res) {
             send(res, post_verdict(req.matches[1], req.body));
           });
  svr.Get("/api/export", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, export_ground_truth());
  });

  if (std::filesystem::is_directory(options_.static_dir)) {
    svr.set_mount_point("/", options_.static_dir.string());
  } else {
    svr.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(
          "<!doctype html><title>grasp review</title>"
          "<p>No review UI bundle installed. The JSON API is under /api/.</p>",
          "text/html");
    });
  }
  svr.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (req.path.rfind("/api/", 0) == 0)
      res.set_content(fail(res.status, "NotFound", "no route " + req.path).body.dump(),
                      "application/json");
  });
}

int ReviewService::bind(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  install_routes();
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool ReviewService::serve() { return server_ && server_->listen_after_bind(); }

void ReviewService::stop() {
  if (server_) server_->stop();
}

}  // namespace tgf
