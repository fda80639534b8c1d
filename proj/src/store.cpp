#include "tgf/store.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>
#include <zlib.h>

#include <bit>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "tgf/error.hpp"
#include "tgf/version.hpp"

namespace tgf {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "cloud files assume a little-endian host");

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes 32-bit lengths; feed large buffers in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const std::size_t n = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

namespace {

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorCode::SchemaMismatch, msg); }

// Runs a decoder, turning JSON access errors into SchemaMismatch.
template <typename F>
auto guarded(std::string_view what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    schema(std::string(what) + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaMismatch || e.code() == ErrorCode::CorruptFile) throw;
    schema(std::string(what) + ": " + e.detail());
  }
}

Json vec_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) schema("expected 3 reals");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

Json rotation_to_json(const Rotation& r) {
  Json out = Json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) out.push_back(r(i, k));
  return out;
}

Rotation rotation_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 9) schema("rotation must have 9 reals");
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) m(i, k) = j.at(static_cast<std::size_t>(3 * i + k)).get<double>();
  return Rotation::from_matrix(m, 1e-6);
}

Json tasks_to_json(const std::set<TaskLabel>& tasks) {
  Json out = Json::array();
  for (TaskLabel t : tasks) out.push_back(std::string(to_string(t)));
  return out;
}

std::set<TaskLabel> tasks_from_json(const Json& j) {
  std::set<TaskLabel> out;
  for (const auto& t : j) out.insert(parse_task(t.get<std::string>()));
  return out;
}

Json annotated_to_json(const AnnotatedGrasp& g) {
  Json out = pose_to_json(g.pose);
  out["grasp_id"] = g.grasp_id;
  out["tasks"] = tasks_to_json(g.tasks);
  Json verdicts = Json::object();
  for (const auto& [t, v] : g.verdicts) verdicts[std::string(to_string(t))] = std::string(to_string(v));
  out["verdicts"] = verdicts;
  return out;
}

AnnotatedGrasp annotated_from_json(const Json& j) {
  AnnotatedGrasp g;
  g.pose = pose_from_json(j);
  g.grasp_id = j.at("grasp_id").get<std::string>();
  g.tasks = tasks_from_json(j.at("tasks"));
  for (const auto& [k, v] : j.at("verdicts").items())
    g.verdicts[parse_task(k)] = parse_verdict(v.get<std::string>());
  return g;
}

Json thresholds_to_json(const Thresholds& th) {
  return {{"th_d_m", th.th_d}, {"th_alpha_rad", th.th_alpha}};
}

}  // namespace

std::string encode_envelope(std::string_view kind, const Json& payload) {
  Json env = {{"format_version", kFormatVersion},
              {"kind", std::string(kind)},
              {"checksum", crc32_of(payload.dump())},
              {"payload", payload}};
  return env.dump(1) + "\n";
}

Json decode_envelope(const std::string& text, std::string_view kind, bool require_checksum) {
  Json env;
  try {
    env = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string(kind) + ": not valid JSON");
  }
  if (!env.is_object()) schema(std::string(kind) + ": envelope must be an object");
  if (!env.contains("format_version") || env["format_version"] != kFormatVersion)
    schema(std::string(kind) + ": unsupported format_version");
  if (!env.contains("kind") || env["kind"] != kind)
    schema("expected kind '" + std::string(kind) + "'");
  if (!env.contains("payload")) schema(std::string(kind) + ": missing payload");
  if (env.contains("checksum")) {
    if (!env["checksum"].is_number_unsigned() ||
        env["checksum"].get<std::uint64_t>() != crc32_of(env["payload"].dump()))
      throw Error(ErrorCode::CorruptFile, std::string(kind) + ": checksum mismatch");
  } else if (require_checksum) {
    schema(std::string(kind) + ": missing checksum");
  }
  return env["payload"];
}

Json pose_to_json(const GraspPose& g) {
  return {{"rotation", rotation_to_json(g.rotation)},
          {"translation", vec_to_json(g.translation)},
          {"width", g.width}};
}

GraspPose pose_from_json(const Json& j) {
  return guarded("grasp pose", [&] {
    GraspPose g{rotation_from_json(j.at("rotation")), vec_from_json(j.at("translation")),
                j.at("width").get<double>()};
    if (!std::isfinite(g.width) || g.width < 0) schema("grasp width must be finite and >= 0");
    return g;
  });
}

Json transform_to_json(const RigidTransform& t) {
  return {{"rotation", rotation_to_json(t.rotation)}, {"translation", vec_to_json(t.translation)}};
}

RigidTransform transform_from_json(const Json& j) {
  return guarded("transform", [&] {
    return RigidTransform{rotation_from_json(j.at("rotation")), vec_from_json(j.at("translation"))};
  });
}

Json scene_to_json(const Scene& s) {
  Json placements = Json::array();
  for (const auto& p : s.placements)
    placements.push_back(
        {{"object_id", p.object_id}, {"pose", transform_to_json(p.pose)}, {"lifted", p.lifted}});
  Json cubes = Json::array();
  for (const auto& c : s.lift_cubes) cubes.push_back({{"center", vec_to_json(c.center)}, {"edge", c.edge}});
  Json cameras = Json::array();
  for (const auto& c : s.cameras)
    cameras.push_back({{"pose", transform_to_json(c.pose)},
                       {"intrinsics",
                        {{"fx", c.intrinsics.fx},
                         {"fy", c.intrinsics.fy},
                         {"cx", c.intrinsics.cx},
                         {"cy", c.intrinsics.cy}}},
                       {"width", c.width},
                       {"height", c.height}});
  return {{"scene_id", s.scene_id},
          {"table",
           {{"half_x", s.table.half_x},
            {"half_y", s.table.half_y},
            {"top_z", s.table.top_z},
            {"thickness", s.table.thickness}}},
          {"placements", placements},
          {"lift_cubes", cubes},
          {"cameras", cameras}};
}

Scene scene_from_json(const Json& j) {
  return guarded("scene", [&] {
    Scene s;
    s.scene_id = j.at("scene_id").get<std::string>();
    const Json& t = j.at("table");
    s.table = {t.at("half_x").get<double>(), t.at("half_y").get<double>(), t.at("top_z").get<double>(),
               t.at("thickness").get<double>()};
    for (const auto& p : j.at("placements"))
      s.placements.push_back({p.at("object_id").get<std::string>(), transform_from_json(p.at("pose")),
                              p.at("lifted").get<bool>()});
    for (const auto& c : j.at("lift_cubes"))
      s.lift_cubes.push_back({vec_from_json(c.at("center")), c.at("edge").get<double>()});
    for (const auto& c : j.at("cameras")) {
      CameraSpec cam;
      cam.pose = transform_from_json(c.at("pose"));
      const Json& k = c.at("intrinsics");
      cam.intrinsics = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                        k.at("cy").get<double>()};
      cam.width = c.at("width").get<int>();
      cam.height = c.at("height").get<int>();
      s.cameras.push_back(cam);
    }
    std::size_t lifted = 0;
    for (const auto& p : s.placements) lifted += p.lifted;
    if (lifted != s.lift_cubes.size()) schema("scene: lift cube count differs from lifted placements");
    return s;
  });
}

Json catalog_to_json(const std::vector<ObjectModel>& catalog) {
  Json objects = Json::array();
  for (const auto& o : catalog) {
    Json vertices = Json::array();
    for (const Vec3& v : o.mesh.vertices()) {
      vertices.push_back(v.x());
      vertices.push_back(v.y());
      vertices.push_back(v.z());
    }
    Json faces = Json::array();
    for (const auto& f : o.mesh.faces())
      for (auto idx : f) faces.push_back(idx);
    Json aff = Json::object();
    for (const auto& [t, tris] : o.affordances) aff[std::string(to_string(t))] = tris;
    Json grasps = Json::array();
    for (const auto& g : o.grasps) grasps.push_back(annotated_to_json(g));
    objects.push_back({{"id", o.id},
                       {"category", std::string(to_string(o.category))},
                       {"scale", o.scale},
                       {"mesh", {{"vertices", vertices}, {"faces", faces}}},
                       {"affordances", aff},
                       {"grasps", grasps}});
  }
  return {{"objects", objects}};
}

std::vector<ObjectModel> catalog_from_json(const Json& j) {
  return guarded("catalog", [&] {
    std::vector<ObjectModel> out;
    for (const auto& jo : j.at("objects")) {
      ObjectModel o;
      o.id = jo.at("id").get<std::string>();
      o.category = parse_category(jo.at("category").get<std::string>());
      o.scale = jo.at("scale").get<double>();
      const auto& flat_v = jo.at("mesh").at("vertices");
      const auto& flat_f = jo.at("mesh").at("faces");
      if (flat_v.size() % 3 || flat_f.size() % 3) schema("catalog: mesh arrays must hold triples");
      std::vector<Vec3> verts;
      for (std::size_t i = 0; i < flat_v.size(); i += 3)
        verts.emplace_back(flat_v[i].get<double>(), flat_v[i + 1].get<double>(),
                           flat_v[i + 2].get<double>());
      std::vector<TriangleMesh::Face> faces;
      for (std::size_t i = 0; i < flat_f.size(); i += 3)
        faces.push_back({flat_f[i].get<std::uint32_t>(), flat_f[i + 1].get<std::uint32_t>(),
                         flat_f[i + 2].get<std::uint32_t>()});
      o.mesh = TriangleMesh(std::move(verts), std::move(faces));
      for (const auto& [k, v] : jo.at("affordances").items())
        o.affordances[parse_task(k)] = v.get<std::set<std::uint32_t>>();
      for (const auto& g : jo.at("grasps")) o.grasps.push_back(annotated_from_json(g));
      o.validate();
      out.push_back(std::move(o));
    }
    return out;
  });
}

Json grasps_to_json(const PropagatedGrasps& grasps) {
  Json objects = Json::object();
  for (const auto& [id, list] : grasps) {
    Json arr = Json::array();
    for (const auto& g : list) arr.push_back(annotated_to_json(g));
    objects[id] = arr;
  }
  return {{"objects", objects}};
}

PropagatedGrasps grasps_from_json(const Json& j) {
  return guarded("scene grasps", [&] {
    PropagatedGrasps out;
    for (const auto& [id, arr] : j.at("objects").items()) {
      auto& list = out[id];
      for (const auto& g : arr) list.push_back(annotated_from_json(g));
    }
    return out;
  });
}

Json triplets_to_json(const std::vector<Triplet>& trips) {
  Json arr = Json::array();
  for (const auto& t : trips) {
    Json gts = Json::array();
    for (const auto& g : t.gt_grasps) gts.push_back(pose_to_json(g));
    arr.push_back({{"triplet_id", t.triplet_id},
                   {"scene_id", t.scene_id},
                   {"camera_index", t.camera_index},
                   {"category", std::string(to_string(t.o))},
                   {"task", std::string(to_string(t.t))},
                   {"gt_grasps", gts}});
  }
  return {{"triplets", arr}};
}

std::vector<Triplet> triplets_from_json(const Json& j) {
  return guarded("triplets", [&] {
    std::vector<Triplet> out;
    for (const auto& jt : j.at("triplets")) {
      Triplet t;
      t.triplet_id = jt.at("triplet_id").get<std::string>();
      t.scene_id = jt.at("scene_id").get<std::string>();
      t.camera_index = jt.at("camera_index").get<int>();
      t.o = parse_category(jt.at("category").get<std::string>());
      t.t = parse_task(jt.at("task").get<std::string>());
      for (const auto& g : jt.at("gt_grasps")) t.gt_grasps.push_back(pose_from_json(g));
      if (t.gt_grasps.empty()) schema("triplet " + t.triplet_id + " has no ground truth");
      if (!task_allowed(t.o, t.t)) schema("triplet " + t.triplet_id + " pairs a disallowed task");
      out.push_back(std::move(t));
    }
    return out;
  });
}

Json predictions_to_json(const std::vector<PredictionSet>& preds) {
  Json arr = Json::array();
  for (const auto& p : preds) {
    Json grasps = Json::array();
    for (const auto& g : p.grasps) {
      Json jg = pose_to_json(g.pose);
      jg["confidence"] = g.confidence;
      grasps.push_back(jg);
    }
    arr.push_back({{"triplet_id", p.triplet_id}, {"grasps", grasps}});
  }
  return {{"predictions", arr}};
}

std::vector<PredictionSet> predictions_from_json(const Json& j) {
  return guarded("predictions", [&] {
    std::vector<PredictionSet> out;
    for (const auto& jp : j.at("predictions")) {
      PredictionSet p;
      p.triplet_id = jp.at("triplet_id").get<std::string>();
      for (const auto& g : jp.at("grasps")) {
        const double c = g.contains("confidence") ? g.at("confidence").get<double>() : 1.0;
        if (!(c >= 0.0 && c <= 1.0)) schema("confidence outside [0, 1] in " + p.triplet_id);
        p.grasps.push_back({pose_from_json(g), c});
      }
      out.push_back(std::move(p));
    }
    return out;
  });
}

Json report_to_json(const EvalReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"triplet_id", row.triplet_id}, {"coverage", row.coverage}, {"success", row.success}});
  return {{"thresholds", thresholds_to_json(r.thresholds)},
          {"coverage_averaging", "per_triplet"},
          {"coverage_rate", r.coverage_rate},
          {"success_rate", r.success_rate},
          {"triplet_count", r.rows.size()},
          {"rows", rows}};
}

EvalReport report_from_json(const Json& j) {
  return guarded("report", [&] {
    EvalReport r;
    r.thresholds = {j.at("thresholds").at("th_d_m").get<double>(),
                    j.at("thresholds").at("th_alpha_rad").get<double>()};
    r.coverage_rate = j.at("coverage_rate").get<double>();
    r.success_rate = j.at("success_rate").get<double>();
    for (const auto& row : j.at("rows"))
      r.rows.push_back({row.at("triplet_id").get<std::string>(), row.at("coverage").get<double>(),
                        row.at("success").get<int>()});
    return r;
  });
}

std::string encode_cloud(const LabeledCloud& cloud) {
  const std::size_t n = cloud.size();
  if (cloud.object_ids.size() != n || cloud.triangle_ids.size() != n)
    throw Error(ErrorCode::LengthMismatch, "cloud arrays differ in length");
  std::string body(n * (3 * sizeof(double) + 2 * sizeof(std::int32_t)), '\0');
  char* out = body.data();
  for (const Vec3& p : cloud.points) {
    const double xyz[3] = {p.x(), p.y(), p.z()};
    std::memcpy(out, xyz, sizeof(xyz));
    out += sizeof(xyz);
  }
  std::memcpy(out, cloud.object_ids.data(), n * sizeof(std::int32_t));
  out += n * sizeof(std::int32_t);
  std::memcpy(out, cloud.triangle_ids.data(), n * sizeof(std::int32_t));

  const Json header = {{"format_version", kFormatVersion},
                       {"kind", "cloud"},
                       {"scene_id", cloud.scene_id},
                       {"camera_index", cloud.camera_index},
                       {"frame", "world"},
                       {"encoding", "f64le+i32le"},
                       {"point_count", n},
                       {"object_id_count", n},
                       {"triangle_id_count", n},
                       {"checksum", crc32_of(body)}};
  return header.dump() + "\n" + body;
}

LabeledCloud decode_cloud(const std::string& bytes) {
  const std::size_t eol = bytes.find('\n');
  if (eol == std::string::npos) schema("cloud: missing header line");
  Json h;
  try {
    h = Json::parse(bytes.substr(0, eol));
  } catch (const Json::exception&) {
    schema("cloud: header is not valid JSON");
  }
  return guarded("cloud", [&] {
    if (h.at("format_version") != kFormatVersion) schema("cloud: unsupported format_version");
    if (h.at("kind") != "cloud") schema("cloud: wrong kind");
    if (h.at("frame") != "world" || h.at("encoding") != "f64le+i32le")
      schema("cloud: unsupported frame or encoding");
    const auto n = h.at("point_count").get<std::size_t>();
    if (h.at("object_id_count").get<std::size_t>() != n ||
        h.at("triangle_id_count").get<std::size_t>() != n)
      schema("cloud: label array lengths differ from point count");
    const std::string_view body(bytes.data() + eol + 1, bytes.size() - eol - 1);
    if (body.size() != n * (3 * sizeof(double) + 2 * sizeof(std::int32_t)))
      throw Error(ErrorCode::CorruptFile, "cloud: body size does not match header");
    if (h.at("checksum").get<std::uint64_t>() != crc32_of(body))
      throw Error(ErrorCode::CorruptFile, "cloud: checksum mismatch");

    LabeledCloud c;
    c.scene_id = h.at("scene_id").get<std::string>();
    c.camera_index = h.at("camera_index").get<int>();
    c.points.resize(n);
    c.object_ids.resize(n);
    c.triangle_ids.resize(n);
    const char* in = body.data();
    for (auto& p : c.points) {
      double xyz[3];
      std::memcpy(xyz, in, sizeof(xyz));
      in += sizeof(xyz);
      p = Vec3(xyz[0], xyz[1], xyz[2]);
    }
    std::memcpy(c.object_ids.data(), in, n * sizeof(std::int32_t));
    in += n * sizeof(std::int32_t);
    std::memcpy(c.triangle_ids.data(), in, n * sizeof(std::int32_t));
    return c;
  });
}

Json verdict_to_json(const VerdictRecord& v) {
  return {{"format_version", kFormatVersion},
          {"object_id", v.object_id},
          {"grasp_id", v.grasp_id},
          {"task", std::string(to_string(v.task))},
          {"verdict", std::string(to_string(v.verdict))},
          {"reviewer", v.reviewer},
          {"timestamp", v.timestamp}};
}

VerdictRecord verdict_from_json(const Json& j) {
  return guarded("verdict record", [&] {
    if (j.at("format_version") != kFormatVersion) schema("verdict record: unsupported format_version");
    VerdictRecord v;
    v.object_id = j.at("object_id").get<std::string>();
    v.grasp_id = j.at("grasp_id").get<std::string>();
    v.task = parse_task(j.at("task").get<std::string>());
    v.verdict = parse_verdict(j.at("verdict").get<std::string>());
    if (v.verdict == Verdict::Unreviewed) schema("verdict record: verdict must be accepted or rejected");
    v.reviewer = j.at("reviewer").get<std::string>();
    v.timestamp = j.at("timestamp").get<std::int64_t>();
    return v;
  });
}

std::vector<ObjectModel> replay_verdicts(std::vector<ObjectModel> catalog,
                                         const std::vector<VerdictRecord>& log) {
  for (const VerdictRecord& v : log) {
    for (ObjectModel& obj : catalog) {
      if (obj.id != v.object_id) continue;
      const AnnotatedGrasp* g = obj.find_grasp(v.grasp_id);
      if (g && g->tasks.count(v.task)) obj = apply_verdict(obj, v.grasp_id, v.task, v.verdict);
      break;
    }
  }
  return catalog;
}

bool Manifest::operator==(const Manifest& o) const {
  return manifest_to_json(*this) == manifest_to_json(o);
}

Json manifest_to_json(const Manifest& m) {
  const auto& sc = m.scene;
  return {{"master_seed", m.master_seed},
          {"gripper",
           {{"max_width", m.gripper.max_width},
            {"finger_length", m.gripper.finger_length},
            {"base_depth", m.gripper.base_depth},
            {"finger_thickness", m.gripper.finger_thickness}}},
          {"table",
           {{"half_x", sc.table.half_x},
            {"half_y", sc.table.half_y},
            {"top_z", sc.table.top_z},
            {"thickness", sc.table.thickness}}},
          {"placement",
           {{"sigma", sc.placement.sigma},
            {"max_attempts", sc.placement.max_attempts},
            {"rest_clearance", sc.placement.rest_clearance}}},
          {"cameras",
           {{"count", sc.cameras.count},
            {"min_elevation_deg", sc.cameras.min_elevation_deg},
            {"max_elevation_deg", sc.cameras.max_elevation_deg},
            {"min_separation_deg", sc.cameras.min_separation_deg},
            {"min_distance", sc.cameras.min_distance},
            {"max_distance", sc.cameras.max_distance},
            {"fx", sc.cameras.intrinsics.fx},
            {"fy", sc.cameras.intrinsics.fy},
            {"cx", sc.cameras.intrinsics.cx},
            {"cy", sc.cameras.intrinsics.cy},
            {"width", sc.cameras.width},
            {"height", sc.cameras.height}}}};
}

Manifest manifest_from_json(const Json& j) {
  return guarded("manifest", [&] {
    Manifest m;
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    const Json& g = j.at("gripper");
    m.gripper = {g.at("max_width").get<double>(), g.at("finger_length").get<double>(),
                 g.at("base_depth").get<double>(), g.at("finger_thickness").get<double>()};
    const Json& t = j.at("table");
    m.scene.table = {t.at("half_x").get<double>(), t.at("half_y").get<double>(),
                     t.at("top_z").get<double>(), t.at("thickness").get<double>()};
    const Json& p = j.at("placement");
    m.scene.placement = {p.at("sigma").get<double>(), p.at("max_attempts").get<int>(),
                         p.at("rest_clearance").get<double>()};
    const Json& c = j.at("cameras");
    auto& cc = m.scene.cameras;
    cc.count = c.at("count").get<int>();
    cc.min_elevation_deg = c.at("min_elevation_deg").get<double>();
    cc.max_elevation_deg = c.at("max_elevation_deg").get<double>();
    cc.min_separation_deg = c.at("min_separation_deg").get<double>();
    cc.min_distance = c.at("min_distance").get<double>();
    cc.max_distance = c.at("max_distance").get<double>();
    cc.intrinsics = {c.at("fx").get<double>(), c.at("fy").get<double>(), c.at("cx").get<double>(),
                     c.at("cy").get<double>()};
    cc.width = c.at("width").get<int>();
    cc.height = c.at("height").get<int>();
    m.gripper.validate();
    return m;
  });
}

// ---------------------------------------------------------------------------
// Lock

namespace {

bool try_create_lock(const fs::path& path) {
  const int fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) return false;
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
  return true;
}

bool lock_owner_alive(const fs::path& path) {
  std::ifstream in(path);
  long pid = 0;
  if (!(in >> pid) || pid <= 0) return true;  // being written right now
  return ::kill(static_cast<pid_t>(pid), 0) == 0 || errno == EPERM;
}

}  // namespace

WorkspaceLock::WorkspaceLock(const fs::path& root, int wait_ms) : path_(root / ".lock") {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(wait_ms);
  for (;;) {
    if (try_create_lock(path_)) return;
    if (!lock_owner_alive(path_)) {
      std::error_code ec;
      fs::remove(path_, ec);
      continue;
    }
    if (std::chrono::steady_clock::now() >= deadline)
      throw Error(ErrorCode::WorkspaceLocked, "another process is writing to " + root.string());
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

WorkspaceLock::~WorkspaceLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

// ---------------------------------------------------------------------------
// Workspace

Workspace Workspace::init(const fs::path& root, const Manifest& manifest) {
  manifest.gripper.validate();
  if (fs::exists(root / "manifest.json"))
    throw Error(ErrorCode::InvalidArgument, root.string() + " is already initialized");
  fs::create_directories(root);
  Workspace ws;
  ws.root_ = root;
  ws.manifest_ = manifest;
  for (const char* d : kSubdirs) fs::create_directories(root / d);
  ws.write_json("manifest.json", "manifest", manifest_to_json(manifest));
  return ws;
}

Workspace Workspace::open(const fs::path& root) {
  if (!fs::exists(root / "manifest.json"))
    throw Error(ErrorCode::MissingDependency,
                "no workspace at " + root.string() + " (run `init` first)");
  Workspace ws;
  ws.root_ = root;
  ws.manifest_ = manifest_from_json(ws.read_json("manifest.json", "manifest"));
  for (const char* d : kSubdirs) fs::create_directories(root / d);
  return ws;
}

bool Workspace::exists(const fs::path& rel) const { return fs::exists(root_ / rel); }

void Workspace::write_text(const fs::path& rel, const std::string& text) const {
  const fs::path target = root_ / rel;
  fs::create_directories(target.parent_path());
  std::ostringstream tmp_name;
  tmp_name << target.filename().string() << ".tmp." << ::getpid() << "."
           << std::hash<std::thread::id>{}(std::this_thread::get_id());
  const fs::path tmp = target.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot replace " + target.string());
  }
}

void Workspace::write_json(const fs::path& rel, std::string_view kind, const Json& payload) const {
  write_text(rel, encode_envelope(kind, payload));
}

std::string Workspace::read_text(const fs::path& rel) const {
  const fs::path p = root_ / rel;
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingDependency, "missing " + rel.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json Workspace::read_json(const fs::path& rel, std::string_view kind, bool require_checksum) const {
  try {
    return decode_envelope(read_text(rel), kind, require_checksum);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MissingDependency) throw;
    throw Error(e.code(), rel.string() + ": " + e.detail());
  }
}

void Workspace::reset_dir(const fs::path& rel) const {
  fs::remove_all(root_ / rel);
  fs::create_directories(root_ / rel);
}

void Workspace::append_verdict(const VerdictRecord& v) const {
  const std::string line = verdict_to_json(v).dump() + "\n";
  fs::create_directories(verdict_log().parent_path());
  const int fd = ::open(verdict_log().c_str(), O_CREAT | O_WRONLY | O_APPEND, 0644);
  if (fd < 0) throw Error(ErrorCode::IoError, "cannot open verdict log");
  const auto n = ::write(fd, line.data(), line.size());
  ::fsync(fd);
  ::close(fd);
  if (n != static_cast<ssize_t>(line.size())) throw Error(ErrorCode::IoError, "short verdict append");
}

std::vector<VerdictRecord> Workspace::read_verdicts() const {
  std::vector<VerdictRecord> out;
  std::ifstream in(verdict_log());
  if (!in) return out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception&) {
      throw Error(ErrorCode::CorruptFile, "verdict log line " + std::to_string(lineno));
    }
    try {
      out.push_back(verdict_from_json(j));
    } catch (const Error& e) {
      throw Error(e.code(), "verdict log line " + std::to_string(lineno) + ": " + e.detail());
    }
  }
  return out;
}

fs::path default_workspace_root(const fs::path& fallback) {
  if (const char* env = std::getenv("TGF_WORKSPACE"); env && *env) return env;
  return fallback;
}

}  // namespace tgf
