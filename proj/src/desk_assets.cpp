#include "tgf/desk_assets.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>

#include <json.hpp>

#include "tgf/bvh.hpp"
#include "tgf/collision.hpp"
#include "tgf/error.hpp"
#include "tgf/rng.hpp"
#include "tgf/version.hpp"

namespace tgf {

TriangleMesh make_revolved(const std::vector<std::pair<double, double>>& profile, int sectors,
                           double max_edge, std::vector<int>* edge_of_face) {
  if (profile.size() < 3 || sectors < 3)
    throw Error(ErrorCode::InvalidArgument, "revolve needs >= 3 profile points and sectors");
  struct P {
    double r, z;
    int edge;  // profile edge starting at this point
  };
  std::vector<P> pts;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const auto [r0, z0] = profile[i];
    const auto [r1, z1] = profile[(i + 1) % profile.size()];
    const double len = std::hypot(r1 - r0, z1 - z0);
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_edge - 1e-9)));
    for (int k = 0; k < pieces; ++k) {
      const double s = static_cast<double>(k) / pieces;
      pts.push_back({r0 + s * (r1 - r0), z0 + s * (z1 - z0), static_cast<int>(i)});
    }
  }

  std::vector<Vec3> verts;
  std::vector<std::vector<std::uint32_t>> ring(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].r == 0.0) {
      ring[i].assign(static_cast<std::size_t>(sectors), static_cast<std::uint32_t>(verts.size()));
      verts.emplace_back(0.0, 0.0, pts[i].z);
      continue;
    }
    for (int j = 0; j < sectors; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / sectors;
      ring[i].push_back(static_cast<std::uint32_t>(verts.size()));
      verts.emplace_back(pts[i].r * std::cos(phi), pts[i].r * std::sin(phi), pts[i].z);
    }
  }

  std::vector<TriangleMesh::Face> faces;
  std::vector<int> edges;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::size_t n = (i + 1) % pts.size();
    for (int j = 0; j < sectors; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      const auto jn = static_cast<std::size_t>((j + 1) % sectors);
      const std::uint32_t a = ring[i][jj], b = ring[n][jj], c = ring[n][jn], d = ring[i][jn];
      if (b != c) {
        faces.push_back({a, b, c});
        edges.push_back(pts[i].edge);
      }
      if (a != d) {
        faces.push_back({a, c, d});
        edges.push_back(pts[i].edge);
      }
    }
  }
  TriangleMesh mesh(std::move(verts), std::move(faces));
  if (mesh.signed_volume() < 0) mesh.flip_orientation();
  if (edge_of_face) *edge_of_face = std::move(edges);
  return mesh;
}

TriangleMesh make_box(const Vec3& lo, const Vec3& hi, int slices) {
  slices = std::max(1, slices);
  std::vector<Vec3> verts;
  for (int k = 0; k <= slices; ++k) {
    const double x = lo.x() + (hi.x() - lo.x()) * k / slices;
    verts.emplace_back(x, lo.y(), lo.z());
    verts.emplace_back(x, hi.y(), lo.z());
    verts.emplace_back(x, hi.y(), hi.z());
    verts.emplace_back(x, lo.y(), hi.z());
  }
  auto id = [](int k, int m) { return static_cast<std::uint32_t>(4 * k + (m % 4)); };
  std::vector<TriangleMesh::Face> faces;
  for (int k = 0; k < slices; ++k)
    for (int m = 0; m < 4; ++m) {
      faces.push_back({id(k, m), id(k, m + 1), id(k + 1, m + 1)});
      faces.push_back({id(k, m), id(k + 1, m + 1), id(k + 1, m)});
    }
  for (int k : {0, slices}) {
    faces.push_back({id(k, 0), id(k, 1), id(k, 2)});
    faces.push_back({id(k, 0), id(k, 2), id(k, 3)});
  }
  // Orient every face away from the (convex) box center.
  const Vec3 center = (lo + hi) / 2.0;
  for (auto& f : faces) {
    const Vec3& a = verts[f[0]];
    const Vec3 n = (verts[f[1]] - a).cross(verts[f[2]] - a);
    const Vec3 centroid = (a + verts[f[1]] + verts[f[2]]) / 3.0;
    if (n.dot(centroid - center) < 0) std::swap(f[1], f[2]);
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

std::vector<GraspPose> sample_antipodal_grasps(const TriangleMesh& mesh, const GripperSpec& spec,
                                               std::size_t count, std::uint64_t seed) {
  spec.validate();
  std::vector<Triangle> tris;
  std::vector<double> cumulative_area;
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangle_count(); ++i) {
    tris.push_back(mesh.triangle(i));
    total += tris.back().area();
    cumulative_area.push_back(total);
  }
  const TriangleBvh bvh(tris);
  const PosedMesh self(mesh);
  const double opening = spec.max_width - 2.0 * spec.finger_thickness;
  constexpr double kClearance = 0.005;

  Rng rng(seed);
  std::vector<GraspPose> out;
  const std::size_t max_attempts = 200 * count;
  for (std::size_t attempt = 0; attempt < max_attempts && out.size() < count; ++attempt) {
    const double pick = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative_area.begin(), cumulative_area.end(), pick);
    const std::size_t ti = std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative_area.begin()), tris.size() - 1);
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Triangle& tri = tris[ti];
    const Vec3 p = tri.v0 + u * (tri.v1 - tri.v0) + v * (tri.v2 - tri.v0);
    const Vec3 n = tri.normal();
    const BvhHit opposite = bvh.intersect({p - 1e-7 * n, -n}, 1e-7);
    if (!opposite.hit()) continue;
    if (tris[static_cast<std::size_t>(opposite.triangle)].normal().dot(n) > -0.8) continue;
    const double chord = (opposite.point - p).norm();
    if (chord + 2.0 * kClearance > opening) continue;

    // Random approach perpendicular to the closing direction, never from below.
    const Vec3 ref = std::abs(n.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    const Vec3 e1 = n.cross(ref).normalized();
    const Vec3 e2 = n.cross(e1);
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Vec3 approach = std::cos(phi) * e1 + std::sin(phi) * e2;
    if (approach.z() > 0.3) continue;

    const Vec3 center = (p + opposite.point) / 2.0;
    GraspPose g;
    g.rotation = rotation_from_approach_baseline(approach, n);
    g.translation = center - (spec.finger_length / 2.0) * approach;
    g.width = chord + 2.0 * kClearance;
    bool clear = true;
    for (const Obb& box : gripper_boxes(g, spec))
      if (box_mesh_collide(box, self)) {
        clear = false;
        break;
      }
    if (clear) out.push_back(g);
  }
  return out;
}

namespace {

struct Shape {
  TriangleMesh mesh;
  std::map<TaskLabel, std::set<std::uint32_t>> affordances;
};

// Face classifier: (component, profile edge, centroid) -> tasks.
using Classifier = std::function<std::set<TaskLabel>(int, int, const Vec3&)>;

struct ComponentBuilder {
  TriangleMesh mesh;
  std::vector<int> component, edge;

  void add(const TriangleMesh& part, int comp, const std::vector<int>* edges = nullptr) {
    mesh.append(part);
    for (std::size_t i = 0; i < part.triangle_count(); ++i) {
      component.push_back(comp);
      edge.push_back(edges ? (*edges)[i] : -1);
    }
  }

  Shape finish(const Classifier& classify) const {
    Shape s{mesh, {}};
    for (std::size_t i = 0; i < mesh.triangle_count(); ++i)
      for (TaskLabel t : classify(component[i], edge[i], mesh.triangle(i).centroid()))
        s.affordances[t].insert(static_cast<std::uint32_t>(i));
    return s;
  }
};

constexpr int kSectors = 24;
constexpr double kMaxEdge = 0.01;

Shape make_mug() {
  const double R = 0.025, H = 0.085, wall = 0.004, floor = 0.007;
  ComponentBuilder b;
  std::vector<int> edges;
  // Edges: 0 bottom, 1 outer wall, 2 rim, 3 inner wall, 4 inner floor, 5 axis.
  TriangleMesh body = make_revolved({{0, 0}, {R, 0}, {R, H}, {R - wall, H}, {R - wall, floor}, {0, floor}},
                                    kSectors, kMaxEdge, &edges);
  b.add(body, 0, &edges);
  std::vector<int> torus_edges;
  std::vector<std::pair<double, double>> circle;
  for (int k = 0; k < 10; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / 10;
    circle.emplace_back(0.022 + 0.005 * std::cos(phi), 0.005 * std::sin(phi));
  }
  const TriangleMesh torus = make_revolved(circle, 20, 1.0, &torus_edges);
  const RigidTransform handle_pose{Rotation::about_axis(Vec3::UnitX(), std::numbers::pi / 2),
                                   Vec3(R + 0.010, 0.0, H / 2.0)};
  b.add(torus.transformed(handle_pose), 1);
  return b.finish([=](int comp, int edge, const Vec3& c) {
    std::set<TaskLabel> tasks;
    if (comp == 1) return std::set<TaskLabel>{TaskLabel::Grasp};
    if (edge == 1 && c.z() < 0.65 * H) tasks.insert(TaskLabel::Wrap);
    if ((edge == 1 && c.z() > 0.55 * H) || edge == 2) tasks.insert(TaskLabel::Pour);
    if (edge == 2 || edge == 3 || edge == 4) tasks.insert(TaskLabel::Contain);
    return tasks;
  });
}

Shape make_bottle() {
  ComponentBuilder b;
  std::vector<int> edges;
  // Edges: 0 bottom, 1 body, 2 shoulder, 3 neck, 4 cap, 5 axis.
  b.add(make_revolved({{0, 0}, {0.024, 0}, {0.024, 0.12}, {0.011, 0.15}, {0.011, 0.185}, {0, 0.185}},
                      kSectors, kMaxEdge, &edges),
        0, &edges);
  return b.finish([](int, int edge, const Vec3& c) {
    std::set<TaskLabel> tasks;
    if (edge == 1 && c.z() < 0.125) tasks.insert(TaskLabel::Wrap);
    if ((edge == 1 && c.z() > 0.11) || edge == 2 || edge == 3) tasks.insert(TaskLabel::Grasp);
    if (edge == 4 || (edge == 3 && c.z() > 0.17)) tasks.insert(TaskLabel::Contain);
    return tasks;
  });
}

Shape make_knife() {
  ComponentBuilder b;
  b.add(make_box(Vec3(-0.10, -0.010, 0.0), Vec3(-0.005, 0.010, 0.016), 6), 0);
  b.add(make_box(Vec3(-0.008, -0.012, 0.0), Vec3(0.10, 0.012, 0.003), 6), 1);
  return b.finish([](int comp, int, const Vec3&) {
    return comp == 0 ? std::set<TaskLabel>{TaskLabel::Cut} : std::set<TaskLabel>{TaskLabel::Handover};
  });
}

Shape make_hat() {
  ComponentBuilder b;
  std::vector<int> edges;
  // Edges: 0 brim underside, 1 brim edge, 2 brim top, 3 crown wall, 4 crown top, 5 axis.
  b.add(make_revolved({{0, 0}, {0.06, 0}, {0.06, 0.007}, {0.022, 0.007}, {0.022, 0.07}, {0, 0.07}},
                      kSectors, kMaxEdge, &edges),
        0, &edges);
  return b.finish([](int, int edge, const Vec3& c) {
    std::set<TaskLabel> tasks;
    if ((edge == 0 && c.head<2>().norm() > 0.02) || edge == 1 || edge == 2 || (edge == 3 && c.z() < 0.035))
      tasks.insert(TaskLabel::Grasp);
    if ((edge == 3 && c.z() > 0.025) || edge == 4) tasks.insert(TaskLabel::Wear);
    return tasks;
  });
}

Shape make_bowl() {
  ComponentBuilder b;
  std::vector<int> edges;
  // Edges: 0 bottom, 1 outer wall, 2 rim, 3 inner wall, 4 inner floor, 5 axis.
  b.add(make_revolved({{0, 0}, {0.03, 0}, {0.06, 0.045}, {0.055, 0.045}, {0.026, 0.005}, {0, 0.005}},
                      kSectors, kMaxEdge, &edges),
        0, &edges);
  return b.finish([](int, int edge, const Vec3& c) {
    std::set<TaskLabel> tasks;
    if (edge == 2 || ((edge == 1 || edge == 3) && c.z() > 0.032)) tasks.insert(TaskLabel::Grasp);
    if (edge == 1 && c.z() < 0.038) tasks.insert(TaskLabel::Wrap);
    return tasks;
  });
}

Shape make_scissor() {
  ComponentBuilder b;
  const TriangleMesh blade = make_box(Vec3(-0.08, -0.006, 0.0), Vec3(0.08, 0.006, 0.004), 8);
  b.add(blade.transformed({Rotation::about_z(0.2), Vec3::Zero()}), 0);
  b.add(blade.transformed({Rotation::about_z(-0.2), Vec3::Zero()}), 1);
  return b.finish([](int, int, const Vec3& c) {
    std::set<TaskLabel> tasks;
    if (c.x() < 0.01) tasks.insert(TaskLabel::Cut);
    if (c.x() > -0.01) tasks.insert(TaskLabel::Handover);
    return tasks;
  });
}

Shape make_shape(Category c) {
  switch (c) {
    case Category::Mug:
      return make_mug();
    case Category::Bottle:
      return make_bottle();
    case Category::Knife:
      return make_knife();
    case Category::Hat:
      return make_hat();
    case Category::Bowl:
      return make_bowl();
    case Category::Scissor:
      return make_scissor();
  }
  throw Error(ErrorCode::CategoryUnknown, "no procedural shape");
}

constexpr std::size_t kGraspsPerObject = 32;
constexpr std::array<double, 2> kScales{1.0, 1.1};

}  // namespace

std::vector<DeskAsset> build_desk_assets(const GripperSpec& spec, std::uint64_t seed) {
  std::vector<DeskAsset> assets;
  for (Category c : kAllCategories) {
    const Shape shape = make_shape(c);
    for (std::size_t v = 0; v < kScales.size(); ++v) {
      DeskAsset a;
      std::string name(to_string(c));
      for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      a.id = name + "_" + std::to_string(v);
      a.category = c;
      a.scale = kScales[v];
      a.mesh = shape.mesh;
      a.affordances = shape.affordances;
      const auto poses = sample_antipodal_grasps(shape.mesh.scaled(a.scale), spec, kGraspsPerObject,
                                                 derive_seed(seed, assets.size()));
      for (std::size_t k = 0; k < poses.size(); ++k) {
        AnnotatedGrasp g;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "g%03zu", k);
        g.grasp_id = buf;
        g.pose = poses[k];
        a.grasps.push_back(std::move(g));
      }
      assets.push_back(std::move(a));
    }
  }
  return assets;
}

void write_desk_assets(const std::filesystem::path& dir, const std::vector<DeskAsset>& assets) {
  std::filesystem::create_directories(dir);
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    out << text;
  };
  nlohmann::json index = nlohmann::json::array();
  for (const auto& a : assets) {
    write(dir / (a.id + ".obj"), format_obj(a.mesh));
    write(dir / (a.id + ".affordances.json"), format_affordances(a.affordances));
    write(dir / (a.id + ".grasps.json"), format_grasps(a.grasps));
    index.push_back({{"id", a.id},
                     {"category", std::string(to_string(a.category))},
                     {"scale", a.scale},
                     {"mesh", a.id + ".obj"},
                     {"affordances", a.id + ".affordances.json"},
                     {"grasps", a.id + ".grasps.json"}});
  }
  write(dir / "index.json",
        nlohmann::json{{"format_version", kFormatVersion}, {"objects", index}}.dump(1) + "\n");
}

}  // namespace tgf
