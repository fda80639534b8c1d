#pragma once

// Object assets: meshes, per-task affordance regions, object-frame grasps and
// the task labels / human verdicts attached to them.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tgf/geometry.hpp"
#include "tgf/mesh.hpp"

namespace tgf {

enum class TaskLabel { Grasp, Wrap, Pour, Contain, Handover, Cut, Wear };
inline constexpr std::size_t kTaskCount = 7;
inline constexpr std::array<TaskLabel, kTaskCount> kAllTasks{
    TaskLabel::Grasp,    TaskLabel::Wrap, TaskLabel::Pour, TaskLabel::Contain,
    TaskLabel::Handover, TaskLabel::Cut,  TaskLabel::Wear};

enum class Category { Mug, Bottle, Knife, Hat, Bowl, Scissor };
inline constexpr std::size_t kCategoryCount = 6;
inline constexpr std::array<Category, kCategoryCount> kAllCategories{
    Category::Mug, Category::Bottle, Category::Knife, Category::Hat, Category::Bowl,
    Category::Scissor};

std::string_view to_string(TaskLabel t);
std::string_view to_string(Category c);
/// Throws ParseError for unknown names.
TaskLabel parse_task(std::string_view name);
/// Throws CategoryUnknown for unknown names.
Category parse_category(std::string_view name);

/// Tasks each category supports.
std::span<const TaskLabel> allowed_tasks(Category c);
bool task_allowed(Category c, TaskLabel t);

/// Knives and scissors are lifted onto a cube when placed.
bool is_small_category(Category c);

enum class Verdict { Unreviewed, Accepted, Rejected };
std::string_view to_string(Verdict v);
Verdict parse_verdict(std::string_view name);

struct AnnotatedGrasp {
  std::string grasp_id;
  GraspPose pose;
  std::set<TaskLabel> tasks;
  std::map<TaskLabel, Verdict> verdicts;

  /// Assigned tasks minus rejected ones.
  std::set<TaskLabel> effective_tasks() const;
  bool operator==(const AnnotatedGrasp&) const = default;
};

struct ObjectModel {
  std::string id;
  Category category = Category::Mug;
  TriangleMesh mesh;  // object frame, meters (scale already applied)
  double scale = 1.0;
  std::map<TaskLabel, std::set<std::uint32_t>> affordances;
  std::vector<AnnotatedGrasp> grasps;

  /// Checks the documented invariants; throws ParseError / UnitError.
  void validate() const;
  const AnnotatedGrasp* find_grasp(std::string_view grasp_id) const;
};

/// Affordance file: {"format_version": 1, "affordances": {"Pour": [3, 4, ...]}}.
std::map<TaskLabel, std::set<std::uint32_t>> parse_affordances(const std::string& text);
std::string format_affordances(const std::map<TaskLabel, std::set<std::uint32_t>>& aff);

/// Grasp file: {"format_version": 1, "grasps": [{"grasp_id", "rotation" (9 reals,
/// row-major), "translation" (3 reals), "width"}]}.
std::vector<AnnotatedGrasp> parse_grasps(const std::string& text);
std::string format_grasps(std::span<const AnnotatedGrasp> grasps);

/// Loads and validates one object. Grasps start with empty task sets.
/// Errors: ParseError, UnitError (scaled mesh diameter outside [0.01, 2] m),
/// CategoryUnknown.
ObjectModel load_object(const std::string& id, const std::filesystem::path& mesh_source,
                        std::string_view category, const std::filesystem::path& affordance_source,
                        const std::filesystem::path& grasp_source, double scale = 1.0);

struct GraspPointResult {
  Vec3 point;
  std::size_t triangle = 0;
  double distance = 0.0;  // from the closing segment
};

/// Mesh surface point nearest to the segment joining the two fingertips of
/// the five-point skeleton. Exact distance ties prefer the point nearest the
/// segment midpoint. Throws NoContact when farther than spec.max_width.
GraspPointResult grasp_point(const GraspPose& g, const ObjectModel& obj, const GripperSpec& spec);

inline constexpr double kAffordanceSnapRadius = 0.005;

/// Labels every grasp with the tasks whose affordance region contains (or lies
/// within 5 mm of) its grasp point. Verdicts are left as they are.
ObjectModel assign_task_labels(const ObjectModel& obj, const GripperSpec& spec);

/// Records an accept/reject decision for one (grasp, task) label.
/// Errors: UnknownGrasp, TaskNotAssigned, InvalidArgument (Unreviewed).
ObjectModel apply_verdict(const ObjectModel& obj, std::string_view grasp_id, TaskLabel task,
                          Verdict verdict);

}  // namespace tgf
