#include "tgf/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tgf/error.hpp"
#include "tgf/version.hpp"

namespace tgf {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kTaskCount> kTaskNames{
    "Grasp", "Wrap", "Pour", "Contain", "Handover", "Cut", "Wear"};
constexpr std::array<std::string_view, kCategoryCount> kCategoryNames{
    "Mug", "Bottle", "Knife", "Hat", "Bowl", "Scissor"};

// Object category -> supported tasks.
constexpr std::array<TaskLabel, 4> kMugTasks{TaskLabel::Grasp, TaskLabel::Wrap, TaskLabel::Pour,
                                             TaskLabel::Contain};
constexpr std::array<TaskLabel, 3> kBottleTasks{TaskLabel::Grasp, TaskLabel::Wrap,
                                                TaskLabel::Contain};
constexpr std::array<TaskLabel, 2> kKnifeTasks{TaskLabel::Handover, TaskLabel::Cut};
constexpr std::array<TaskLabel, 2> kHatTasks{TaskLabel::Grasp, TaskLabel::Wear};
constexpr std::array<TaskLabel, 2> kBowlTasks{TaskLabel::Grasp, TaskLabel::Wrap};
constexpr std::array<TaskLabel, 2> kScissorTasks{TaskLabel::Handover, TaskLabel::Cut};

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

void check_version(const json& j, std::string_view what) {
  if (!j.is_object() || !j.contains("format_version") ||
      j["format_version"] != kFormatVersion)
    throw Error(ErrorCode::ParseError,
                std::string(what) + ": missing or unsupported format_version");
}

}  // namespace

std::string_view to_string(TaskLabel t) { return kTaskNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

TaskLabel parse_task(std::string_view name) {
  for (std::size_t i = 0; i < kTaskCount; ++i)
    if (kTaskNames[i] == name) return static_cast<TaskLabel>(i);
  throw Error(ErrorCode::ParseError, "unknown task '" + std::string(name) + "'");
}

Category parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryCount; ++i)
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  throw Error(ErrorCode::CategoryUnknown, "unknown category '" + std::string(name) + "'");
}

std::span<const TaskLabel> allowed_tasks(Category c) {
  switch (c) {
    case Category::Mug:
      return kMugTasks;
    case Category::Bottle:
      return kBottleTasks;
    case Category::Knife:
      return kKnifeTasks;
    case Category::Hat:
      return kHatTasks;
    case Category::Bowl:
      return kBowlTasks;
    case Category::Scissor:
      return kScissorTasks;
  }
  return {};
}

bool task_allowed(Category c, TaskLabel t) {
  const auto tasks = allowed_tasks(c);
  return std::find(tasks.begin(), tasks.end(), t) != tasks.end();
}

bool is_small_category(Category c) { return c == Category::Knife || c == Category::Scissor; }

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Unreviewed:
      return "unreviewed";
    case Verdict::Accepted:
      return "accepted";
    case Verdict::Rejected:
      return "rejected";
  }
  return "unreviewed";
}

Verdict parse_verdict(std::string_view name) {
  if (name == "unreviewed") return Verdict::Unreviewed;
  if (name == "accepted") return Verdict::Accepted;
  if (name == "rejected") return Verdict::Rejected;
  throw Error(ErrorCode::ParseError, "unknown verdict '" + std::string(name) + "'");
}

std::set<TaskLabel> AnnotatedGrasp::effective_tasks() const {
  std::set<TaskLabel> out;
  for (TaskLabel t : tasks) {
    auto it = verdicts.find(t);
    if (it == verdicts.end() || it->second != Verdict::Rejected) out.insert(t);
  }
  return out;
}

void ObjectModel::validate() const {
  if (mesh.empty()) throw Error(ErrorCode::ParseError, id + ": empty mesh");
  for (std::size_t i = 0; i < mesh.triangle_count(); ++i)
    if (!(mesh.triangle(i).area() > 1e-12))
      throw Error(ErrorCode::ParseError, id + ": degenerate triangle " + std::to_string(i));
  const double diameter = mesh.diameter();
  if (!(diameter >= 0.01 && diameter <= 2.0))
    throw Error(ErrorCode::UnitError,
                id + ": mesh diameter " + std::to_string(diameter) + " m outside [0.01, 2]");
  for (const auto& [task, tris] : affordances) {
    if (!task_allowed(category, task))
      throw Error(ErrorCode::ParseError, id + ": affordance task " + std::string(to_string(task)) +
                                             " not allowed for " + std::string(to_string(category)));
    for (auto idx : tris)
      if (idx >= mesh.triangle_count())
        throw Error(ErrorCode::ParseError,
                    id + ": affordance triangle " + std::to_string(idx) + " out of range");
  }
  std::set<std::string> seen;
  for (const auto& g : grasps) {
    if (!seen.insert(g.grasp_id).second)
      throw Error(ErrorCode::ParseError, id + ": duplicate grasp id " + g.grasp_id);
    for (TaskLabel t : g.tasks)
      if (!task_allowed(category, t))
        throw Error(ErrorCode::ParseError, id + ": grasp task not allowed for category");
  }
}

const AnnotatedGrasp* ObjectModel::find_grasp(std::string_view grasp_id) const {
  for (const auto& g : grasps)
    if (g.grasp_id == grasp_id) return &g;
  return nullptr;
}

std::map<TaskLabel, std::set<std::uint32_t>> parse_affordances(const std::string& text) {
  const json j = parse_json(text, "affordance file");
  check_version(j, "affordance file");
  std::map<TaskLabel, std::set<std::uint32_t>> out;
  try {
    for (const auto& [name, list] : j.at("affordances").items()) {
      auto& tris = out[parse_task(name)];
      for (const auto& idx : list) {
        if (!idx.is_number_unsigned())
          throw Error(ErrorCode::ParseError, "affordance index must be a non-negative integer");
        tris.insert(idx.get<std::uint32_t>());
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("affordance file: ") + e.what());
  }
  return out;
}

std::string format_affordances(const std::map<TaskLabel, std::set<std::uint32_t>>& aff) {
  json regions = json::object();
  for (const auto& [task, tris] : aff) regions[std::string(to_string(task))] = tris;
  return json{{"format_version", kFormatVersion}, {"affordances", regions}}.dump(1) + "\n";
}

std::vector<AnnotatedGrasp> parse_grasps(const std::string& text) {
  const json j = parse_json(text, "grasp file");
  check_version(j, "grasp file");
  std::vector<AnnotatedGrasp> out;
  try {
    for (const auto& rec : j.at("grasps")) {
      AnnotatedGrasp g;
      g.grasp_id = rec.at("grasp_id").get<std::string>();
      const auto rot = rec.at("rotation").get<std::vector<double>>();
      const auto tr = rec.at("translation").get<std::vector<double>>();
      if (rot.size() != 9 || tr.size() != 3)
        throw Error(ErrorCode::ParseError, "grasp " + g.grasp_id + ": wrong array length");
      Mat3 m;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = rot[static_cast<std::size_t>(3 * r + c)];
      try {
        g.pose.rotation = Rotation::from_matrix(m, 1e-6);
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, "grasp " + g.grasp_id + ": " + e.what());
      }
      g.pose.translation = Vec3(tr[0], tr[1], tr[2]);
      g.pose.width = rec.at("width").get<double>();
      if (!(g.pose.width >= 0) || !g.pose.translation.allFinite())
        throw Error(ErrorCode::ParseError, "grasp " + g.grasp_id + ": invalid width/translation");
      out.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("grasp file: ") + e.what());
  }
  return out;
}

std::string format_grasps(std::span<const AnnotatedGrasp> grasps) {
  json list = json::array();
  for (const auto& g : grasps) {
    std::vector<double> rot(9);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) rot[static_cast<std::size_t>(3 * r + c)] = g.pose.rotation(r, c);
    const Vec3& t = g.pose.translation;
    list.push_back({{"grasp_id", g.grasp_id},
                    {"rotation", rot},
                    {"translation", {t.x(), t.y(), t.z()}},
                    {"width", g.pose.width}});
  }
  return json{{"format_version", kFormatVersion}, {"grasps", list}}.dump(1) + "\n";
}

ObjectModel load_object(const std::string& id, const std::filesystem::path& mesh_source,
                        std::string_view category, const std::filesystem::path& affordance_source,
                        const std::filesystem::path& grasp_source, double scale) {
  ObjectModel obj;
  obj.id = id;
  obj.category = parse_category(category);
  if (!(scale > 0) || !std::isfinite(scale))
    throw Error(ErrorCode::UnitError, id + ": scale must be positive");
  obj.scale = scale;
  obj.mesh = load_mesh(mesh_source).scaled(scale);
  obj.affordances = parse_affordances(read_text(affordance_source));
  obj.grasps = parse_grasps(read_text(grasp_source));
  obj.validate();
  return obj;
}

GraspPointResult grasp_point(const GraspPose& g, const ObjectModel& obj, const GripperSpec& spec) {
  const FivePoints fp = five_point_projection(g, spec);
  const Vec3& tip_left = fp[3];
  const Vec3& tip_right = fp[4];
  std::optional<GraspPointResult> best;
  double best_mid_offset = 0.0;
  for (std::size_t i = 0; i < obj.mesh.triangle_count(); ++i) {
    const SegmentTriangleClosest c = closest_segment_triangle(tip_left, tip_right, obj.mesh.triangle(i));
    const double mid_offset = std::abs(c.segment_param - 0.5);
    const bool better = !best || c.distance < best->distance - 1e-12 ||
                        (std::abs(c.distance - best->distance) <= 1e-12 &&
                         mid_offset < best_mid_offset);
    if (better) {
      best = GraspPointResult{c.surface_point, i, c.distance};
      best_mid_offset = mid_offset;
    }
  }
  if (!best || best->distance > spec.max_width)
    throw Error(ErrorCode::NoContact, "grasp closing segment misses " + obj.id);
  return *best;
}

ObjectModel assign_task_labels(const ObjectModel& obj, const GripperSpec& spec) {
  ObjectModel out = obj;
  for (auto& g : out.grasps) {
    g.tasks.clear();
    GraspPointResult gp;
    try {
      gp = grasp_point(g.pose, obj, spec);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoContact) throw;
      continue;
    }
    for (const auto& [task, tris] : obj.affordances) {
      if (!task_allowed(obj.category, task)) continue;
      if (tris.count(static_cast<std::uint32_t>(gp.triangle))) {
        g.tasks.insert(task);
        continue;
      }
      for (auto idx : tris) {
        const Vec3 q = closest_point_on_triangle(gp.point, obj.mesh.triangle(idx));
        if ((q - gp.point).norm() <= kAffordanceSnapRadius) {
          g.tasks.insert(task);
          break;
        }
      }
    }
  }
  return out;
}

ObjectModel apply_verdict(const ObjectModel& obj, std::string_view grasp_id, TaskLabel task,
                          Verdict verdict) {
  if (verdict == Verdict::Unreviewed)
    throw Error(ErrorCode::InvalidArgument, "a verdict must be accepted or rejected");
  ObjectModel out = obj;
  auto it = std::find_if(out.grasps.begin(), out.grasps.end(),
                         [&](const AnnotatedGrasp& g) { return g.grasp_id == grasp_id; });
  if (it == out.grasps.end())
    throw Error(ErrorCode::UnknownGrasp, obj.id + " has no grasp '" + std::string(grasp_id) + "'");
  if (!it->tasks.count(task))
    throw Error(ErrorCode::TaskNotAssigned, std::string(grasp_id) + " is not labeled " +
                                                std::string(to_string(task)));
  it->verdicts[task] = verdict;
  return out;
}

}  // namespace tgf
