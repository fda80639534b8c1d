#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "tgf/catalog.hpp"
#include "tgf/desk_assets.hpp"

using namespace tgf;
using testing_support::TempDir;
using testing_support::write_file;

namespace {

// Approach straight down (-z) with the jaws closing along y.
Rotation top_down() { return rotation_from_approach_baseline({0, 0, -1}, {0, 1, 0}); }

// Pose whose fingertip segment is centered on `mid`.
GraspPose tips_at(const Vec3& mid, const Rotation& r, double width, const GripperSpec& spec) {
  return {r, mid - spec.finger_length * r.approach(), width};
}

// Segment-to-triangle distance by golden-section search over the segment
// parameter (the distance is convex in it).
double segment_triangle_distance(const Vec3& s0, const Vec3& s1, const Triangle& t) {
  auto f = [&](double s) {
    const Vec3 p = s0 + s * (s1 - s0);
    return (oracle::closest_on_triangle(p, t) - p).norm();
  };
  double lo = 0.0, hi = 1.0;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 200; ++i) {
    const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    if (f(m1) <= f(m2)) hi = m2; else lo = m1;
  }
  return std::min({f(0.0), f(1.0), f((lo + hi) / 2.0)});
}

ObjectModel cube_object(Category c = Category::Mug) {
  ObjectModel obj;
  obj.id = "cube";
  obj.category = c;
  obj.mesh = testing_support::cube(0.1);
  return obj;
}

std::set<std::uint32_t> triangles_with_normal(const TriangleMesh& m, const Vec3& n) {
  std::set<std::uint32_t> out;
  for (std::size_t i = 0; i < m.triangle_count(); ++i)
    if (m.triangle(i).normal().dot(n) > 0.999) out.insert(static_cast<std::uint32_t>(i));
  return out;
}

}  // namespace

TEST(TaskTable, AllowedTasksPerCategory) {
  auto set_of = [](Category c) {
    const auto s = allowed_tasks(c);
    return std::set<TaskLabel>(s.begin(), s.end());
  };
  using T = TaskLabel;
  EXPECT_EQ(set_of(Category::Mug), (std::set<T>{T::Grasp, T::Wrap, T::Pour, T::Contain}));
  EXPECT_EQ(set_of(Category::Knife), (std::set<T>{T::Handover, T::Cut}));
  EXPECT_EQ(set_of(Category::Scissor), (std::set<T>{T::Handover, T::Cut}));
  EXPECT_EQ(set_of(Category::Hat), (std::set<T>{T::Grasp, T::Wear}));
  EXPECT_EQ(kAllTasks.size(), 7u);
  for (T t : kAllTasks) EXPECT_EQ(parse_task(to_string(t)), t);
  for (Category c : kAllCategories) EXPECT_EQ(parse_category(to_string(c)), c);
  EXPECT_TGF_ERROR(parse_task("Stir"), ErrorCode::ParseError);
  EXPECT_TGF_ERROR(parse_category("Spoon"), ErrorCode::CategoryUnknown);
  EXPECT_TRUE(is_small_category(Category::Knife));
  EXPECT_TRUE(is_small_category(Category::Scissor));
  EXPECT_FALSE(is_small_category(Category::Mug));
}

TEST(LoadObject, UnitCubeWithOneGrasp) {
  TempDir dir;
  write_file(dir / "cube.obj", format_obj(testing_support::cube()));
  write_file(dir / "aff.json", R"({"format_version": 1, "affordances": {}})");
  write_file(dir / "grasps.json", R"({"format_version": 1, "grasps": [
    {"grasp_id": "g0", "rotation": [1,0,0, 0,1,0, 0,0,1], "translation": [0.5, 0.5, 1.2], "width": 0.05}]})");
  const ObjectModel obj = load_object("cube", dir / "cube.obj", "Bowl", dir / "aff.json", dir / "grasps.json");
  EXPECT_EQ(obj.category, Category::Bowl);
  ASSERT_EQ(obj.grasps.size(), 1u);
  EXPECT_EQ(obj.grasps[0].grasp_id, "g0");
  EXPECT_TRUE(obj.grasps[0].tasks.empty());
  EXPECT_TRUE(obj.grasps[0].verdicts.empty());
  EXPECT_EQ(obj.grasps[0].pose.translation, Vec3(0.5, 0.5, 1.2));
  EXPECT_TRUE(obj.affordances.empty());
}

TEST(LoadObject, ValidationErrors) {
  TempDir dir;
  write_file(dir / "cube.off", format_obj(testing_support::cube()));  // wrong content for .off
  write_file(dir / "cube.obj", format_obj(testing_support::cube()));
  write_file(dir / "ok.json", R"({"format_version": 1, "affordances": {}})");
  write_file(dir / "g.json", R"({"format_version": 1, "grasps": []})");
  write_file(dir / "range.json", R"({"format_version": 1, "affordances": {"Pour": [12]}})");
  write_file(dir / "task.json", R"({"format_version": 1, "affordances": {"Cut": [0]}})");
  write_file(dir / "version.json", R"({"format_version": 2, "affordances": {}})");
  write_file(dir / "badrot.json", R"({"format_version": 1, "grasps": [
    {"grasp_id": "g0", "rotation": [2,0,0, 0,1,0, 0,0,1], "translation": [0,0,0], "width": 0.05}]})");
  write_file(dir / "dup.json", R"({"format_version": 1, "grasps": [
    {"grasp_id": "g0", "rotation": [1,0,0, 0,1,0, 0,0,1], "translation": [0,0,0], "width": 0.05},
    {"grasp_id": "g0", "rotation": [1,0,0, 0,1,0, 0,0,1], "translation": [0,0,0], "width": 0.05}]})");

  EXPECT_TGF_ERROR(load_object("c", dir / "cube.obj", "Mug", dir / "range.json", dir / "g.json"),
                   ErrorCode::ParseError);
  EXPECT_TGF_ERROR(load_object("c", dir / "cube.obj", "Mug", dir / "task.json", dir / "g.json"),
                   ErrorCode::ParseError);
  EXPECT_TGF_ERROR(load_object("c", dir / "cube.obj", "Mug", dir / "version.json", dir / "g.json"),
                   ErrorCode::ParseError);
  EXPECT_TGF_ERROR(load_object("c", dir / "cube.obj", "Mug", dir / "ok.json", dir / "badrot.json"),
                   ErrorCode::ParseError);
  EXPECT_TGF_ERROR(load_object("c", dir / "cube.obj", "Mug", dir / "ok.json", dir / "dup.json"),
                   ErrorCode::ParseError);
  EXPECT_TGF_ERROR(load_object("c", dir / "cube.off", "Mug", dir / "ok.json", dir / "g.json"),
                   ErrorCode::ParseError);
  EXPECT_TGF_ERROR(load_object("c", dir / "missing.obj", "Mug", dir / "ok.json", dir / "g.json"),
                   ErrorCode::ParseError);
  EXPECT_TGF_ERROR(load_object("c", dir / "cube.obj", "Spoon", dir / "ok.json", dir / "g.json"),
                   ErrorCode::CategoryUnknown);
  EXPECT_TGF_ERROR(load_object("c", dir / "cube.obj", "Mug", dir / "ok.json", dir / "g.json", 100.0),
                   ErrorCode::UnitError);
  EXPECT_TGF_ERROR(load_object("c", dir / "cube.obj", "Mug", dir / "ok.json", dir / "g.json", 0.001),
                   ErrorCode::UnitError);
  EXPECT_NO_THROW(load_object("c", dir / "cube.obj", "Mug", dir / "ok.json", dir / "g.json", 0.1));
}

TEST(LoadObject, MugPourRegionRoundTrips) {
  TempDir dir;
  const ObjectModel& mug = testing_support::desk_object(Category::Mug);
  ASSERT_TRUE(mug.affordances.count(TaskLabel::Pour));
  write_file(dir / "mug.obj", format_obj(mug.mesh));
  write_file(dir / "aff.json", format_affordances(mug.affordances));
  write_file(dir / "grasps.json", format_grasps(mug.grasps));
  const ObjectModel back = load_object(mug.id, dir / "mug.obj", "Mug", dir / "aff.json", dir / "grasps.json");
  EXPECT_EQ(back.affordances, mug.affordances);
  ASSERT_EQ(back.grasps.size(), mug.grasps.size());
  for (std::size_t i = 0; i < back.grasps.size(); ++i) {
    EXPECT_EQ(back.grasps[i].pose, mug.grasps[i].pose);
    EXPECT_TRUE(back.grasps[i].tasks.empty());
  }
  // Pour covers the lip and upper outer wall.
  const double top = mug.mesh.bounds().hi.z();
  for (auto idx : back.affordances.at(TaskLabel::Pour)) {
    const Triangle t = back.mesh.triangle(idx);
    EXPECT_GT(std::min({t.v0.z(), t.v1.z(), t.v2.z()}), 0.5 * top);
  }
}

TEST(GraspPoint, CenteredOnCubeFace) {
  const GripperSpec spec;
  const ObjectModel cube = cube_object();
  const GraspPose g = tips_at({0.05, 0.05, 0.105}, top_down(), 0.08, spec);
  const GraspPointResult r = grasp_point(g, cube, spec);
  EXPECT_NEAR(r.point.z(), 0.1, 1e-9);
  EXPECT_NEAR(r.point.x(), 0.05, 1e-9);
  EXPECT_NEAR(r.point.y(), 0.05, 1e-9);
  EXPECT_NEAR(r.distance, 0.005, 1e-12);
  EXPECT_NEAR(cube.mesh.triangle(r.triangle).normal().z(), 1.0, 1e-12);
}

TEST(GraspPoint, FarGraspHasNoContact) {
  const GripperSpec spec;
  EXPECT_TGF_ERROR(grasp_point(tips_at({1.05, 0.05, 0.05}, top_down(), 0.08, spec), cube_object(), spec),
                   ErrorCode::NoContact);
}

TEST(GraspPoint, MatchesExhaustiveTriangleSearch) {
  std::mt19937_64 gen(41);
  const GripperSpec spec;
  const auto& catalog = testing_support::desk_catalog();
  for (int i = 0; i < 240; ++i) {
    const ObjectModel& obj = catalog[static_cast<std::size_t>(i) % catalog.size()];
    GraspPose g = oracle::random_grasp(gen, 0.0, spec.max_width);
    g.translation = obj.mesh.bounds().center() + 0.06 * oracle::random_unit(gen);
    const FivePoints fp = five_point_projection(g, spec);
    const auto tris = oracle::triangles(obj.mesh);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : tris) best = std::min(best, segment_triangle_distance(fp[3], fp[4], t));
    if (best > spec.max_width) {
      EXPECT_TGF_ERROR(grasp_point(g, obj, spec), ErrorCode::NoContact);
      continue;
    }
    const GraspPointResult r = grasp_point(g, obj, spec);
    ASSERT_NEAR(r.distance, best, 1e-9) << obj.id << " " << i;
    ASSERT_LT(oracle::distance_to_mesh(r.point, tris), 1e-9);
    ASSERT_LT(oracle::distance_to_mesh(r.point, {tris[r.triangle]}), 1e-9);
  }
}

TEST(AssignTaskLabels, KnifeHandleCut) {
  const GripperSpec spec;
  ObjectModel knife;
  knife.id = "knife";
  knife.category = Category::Knife;
  knife.mesh = make_box({0, -0.01, 0}, {0.1, 0.01, 0.02});
  const std::size_t handle_tris = knife.mesh.triangle_count();
  knife.mesh.append(make_box({0.1, -0.002, 0.005}, {0.25, 0.002, 0.02}));
  for (std::uint32_t i = 0; i < handle_tris; ++i) knife.affordances[TaskLabel::Cut].insert(i);
  knife.grasps.push_back({"handle", tips_at({0.05, 0, 0.01}, top_down(), 0.04, spec), {}, {}});
  knife.grasps.push_back({"blade", tips_at({0.2, 0, 0.012}, top_down(), 0.04, spec), {}, {}});
  knife.validate();
  const ObjectModel labeled = assign_task_labels(knife, spec);
  EXPECT_EQ(labeled.grasps[0].tasks, (std::set<TaskLabel>{TaskLabel::Cut}));
  EXPECT_TRUE(labeled.grasps[1].tasks.empty());
}

TEST(AssignTaskLabels, OverlappingRegionsAndMisses) {
  const GripperSpec spec;
  ObjectModel obj = cube_object();
  const auto top = triangles_with_normal(obj.mesh, Vec3::UnitZ());
  const auto side = triangles_with_normal(obj.mesh, Vec3::UnitX());
  obj.affordances[TaskLabel::Pour] = top;
  obj.affordances[TaskLabel::Contain] = top;
  obj.affordances[TaskLabel::Wrap] = side;
  obj.grasps.push_back({"top", tips_at({0.05, 0.05, 0.101}, top_down(), 0.05, spec), {}, {}});
  obj.grasps.push_back({"bottom", tips_at({0.05, 0.05, -0.01}, top_down(), 0.05, spec), {}, {}});
  obj.grasps.push_back({"far", tips_at({0.05, 0.05, 0.5}, top_down(), 0.05, spec), {}, {}});
  // Grasp point on the top face, 3 mm from the +x side region.
  obj.grasps.push_back({"snap", tips_at({0.097, 0.05, 0.101}, top_down(), 0.002, spec), {}, {}});
  const ObjectModel labeled = assign_task_labels(obj, spec);
  EXPECT_EQ(labeled.grasps[0].tasks, (std::set<TaskLabel>{TaskLabel::Pour, TaskLabel::Contain}));
  EXPECT_TRUE(labeled.grasps[1].tasks.empty());
  EXPECT_TRUE(labeled.grasps[2].tasks.empty());
  EXPECT_EQ(labeled.grasps[3].tasks,
            (std::set<TaskLabel>{TaskLabel::Wrap, TaskLabel::Pour, TaskLabel::Contain}));
}

TEST(AssignTaskLabels, DeskCatalogMatchesRegionOracle) {
  const GripperSpec spec;
  std::size_t labeled = 0;
  for (const ObjectModel& obj : testing_support::desk_catalog()) {
    const auto tris = oracle::triangles(obj.mesh);
    for (const auto& g : obj.grasps) {
      // Table I containment.
      for (TaskLabel t : g.tasks) ASSERT_TRUE(task_allowed(obj.category, t));
      std::set<TaskLabel> want;
      try {
        const GraspPointResult gp = grasp_point(g.pose, obj, spec);
        for (const auto& [task, region] : obj.affordances) {
          double d = std::numeric_limits<double>::infinity();
          for (auto idx : region) d = std::min(d, (oracle::closest_on_triangle(gp.point, tris[idx]) - gp.point).norm());
          if (d <= kAffordanceSnapRadius) want.insert(task);
        }
        if (!g.tasks.empty()) {
          ASSERT_LT(oracle::distance_to_mesh(gp.point, tris), 1e-9);
        }
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), ErrorCode::NoContact);
      }
      ASSERT_EQ(g.tasks, want) << obj.id << "/" << g.grasp_id;
      labeled += !g.tasks.empty();
    }
  }
  EXPECT_GT(labeled, 300u);
}

TEST(AssignTaskLabels, DeterministicAndIdempotent) {
  const GripperSpec spec;
  for (const ObjectModel& obj : testing_support::desk_catalog()) {
    const ObjectModel again = assign_task_labels(obj, spec);
    ASSERT_EQ(again.grasps, obj.grasps) << obj.id;
    ASSERT_EQ(assign_task_labels(again, spec).grasps, again.grasps);
  }
}

TEST(AssignTaskLabels, LeavesVerdictsAlone) {
  const GripperSpec spec;
  const ObjectModel& mug = testing_support::desk_object(Category::Mug);
  const auto it = std::find_if(mug.grasps.begin(), mug.grasps.end(), [](const auto& g) { return !g.tasks.empty(); });
  ASSERT_NE(it, mug.grasps.end());
  const ObjectModel reviewed = apply_verdict(mug, it->grasp_id, *it->tasks.begin(), Verdict::Rejected);
  const ObjectModel relabeled = assign_task_labels(reviewed, spec);
  EXPECT_EQ(relabeled.find_grasp(it->grasp_id)->verdicts, reviewed.find_grasp(it->grasp_id)->verdicts);
}

TEST(ApplyVerdict, AcceptRejectAndErrors) {
  const GripperSpec spec;
  ObjectModel obj = cube_object(Category::Knife);
  obj.affordances[TaskLabel::Cut] = triangles_with_normal(obj.mesh, Vec3::UnitZ());
  obj.affordances[TaskLabel::Handover] = obj.affordances[TaskLabel::Cut];
  obj.grasps.push_back({"g1", tips_at({0.05, 0.05, 0.101}, top_down(), 0.05, spec), {}, {}});
  obj = assign_task_labels(obj, spec);
  ASSERT_EQ(obj.grasps[0].tasks, (std::set<TaskLabel>{TaskLabel::Handover, TaskLabel::Cut}));

  const ObjectModel accepted = apply_verdict(obj, "g1", TaskLabel::Cut, Verdict::Accepted);
  EXPECT_EQ(accepted.grasps[0].verdicts.at(TaskLabel::Cut), Verdict::Accepted);
  EXPECT_EQ(apply_verdict(accepted, "g1", TaskLabel::Cut, Verdict::Accepted).grasps, accepted.grasps);

  const ObjectModel rejected = apply_verdict(accepted, "g1", TaskLabel::Cut, Verdict::Rejected);
  EXPECT_EQ(rejected.grasps[0].effective_tasks(), (std::set<TaskLabel>{TaskLabel::Handover}));
  EXPECT_EQ(rejected.grasps[0].tasks.size(), 2u);

  EXPECT_TGF_ERROR(apply_verdict(obj, "g9", TaskLabel::Cut, Verdict::Accepted), ErrorCode::UnknownGrasp);
  EXPECT_TGF_ERROR(apply_verdict(obj, "g1", TaskLabel::Pour, Verdict::Accepted), ErrorCode::TaskNotAssigned);
  EXPECT_TGF_ERROR(apply_verdict(obj, "g1", TaskLabel::Cut, Verdict::Unreviewed), ErrorCode::InvalidArgument);
}

TEST(DeskAssets, EveryObjectIsUsable) {
  const auto& catalog = testing_support::desk_catalog();
  ASSERT_EQ(catalog.size(), 12u);
  std::set<Category> cats;
  for (const ObjectModel& obj : catalog) {
    cats.insert(obj.category);
    EXPECT_GT(obj.mesh.signed_volume(), 0.0) << obj.id;
    EXPECT_FALSE(obj.grasps.empty()) << obj.id;
    for (const auto& [task, region] : obj.affordances) EXPECT_FALSE(region.empty()) << obj.id;
    std::set<TaskLabel> covered;
    for (const auto& g : obj.grasps) covered.insert(g.tasks.begin(), g.tasks.end());
    const auto allowed = allowed_tasks(obj.category);
    EXPECT_EQ(covered, std::set<TaskLabel>(allowed.begin(), allowed.end())) << obj.id;
  }
  EXPECT_EQ(cats.size(), kCategoryCount);
}

TEST(DeskAssets, RevolvedMeshIsClosed) {
  const TriangleMesh m = make_revolved({{0, 0}, {0.03, 0}, {0.03, 0.1}, {0, 0.1}}, 48, 0.01);
  const double exact = std::numbers::pi * 0.03 * 0.03 * 0.1;
  // Inscribed 48-gon area ratio.
  const double polygon = 0.5 * 48 * std::sin(2 * std::numbers::pi / 48) / std::numbers::pi;
  EXPECT_NEAR(m.signed_volume(), exact * polygon, 1e-12);
  const auto tris = oracle::triangles(m);
  EXPECT_NEAR(oracle::winding_number(tris, {0, 0, 0.05}), 1.0, 1e-9);
  EXPECT_NEAR(oracle::winding_number(tris, {0, 0, 0.2}), 0.0, 1e-9);
}
