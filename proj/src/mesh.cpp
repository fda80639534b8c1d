#include "tgf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "tgf/error.hpp"

namespace tgf {

Aabb Aabb::of(const Triangle& t) {
  Aabb box;
  box.extend(t.v0);
  box.extend(t.v1);
  box.extend(t.v2);
  return box;
}

Aabb Obb::bounds() const {
  const Mat3 abs_r = pose.rotation.matrix().cwiseAbs();
  return Aabb::centered(pose.translation, abs_r * half_extents);
}

bool Obb::contains(const Vec3& p) const {
  const Vec3 local = pose.rotation.inverse() * (p - pose.translation);
  return (local.cwiseAbs().array() <= half_extents.array()).all();
}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  for (const Face& f : faces_)
    for (auto idx : f)
      if (idx >= vertices_.size())
        throw Error(ErrorCode::ParseError, "face references vertex " + std::to_string(idx) +
                                               " of " + std::to_string(vertices_.size()));
}

Aabb TriangleMesh::bounds() const {
  Aabb box;
  for (const Face& f : faces_)
    for (auto idx : f) box.extend(vertices_[idx]);
  return box;
}

double TriangleMesh::diameter() const {
  if (faces_.empty()) return 0.0;
  const Aabb b = bounds();
  return (b.hi - b.lo).norm();
}

double TriangleMesh::signed_volume() const {
  double vol = 0.0;
  for (std::size_t i = 0; i < faces_.size(); ++i) {
    const Triangle t = triangle(i);
    vol += t.v0.dot(t.v1.cross(t.v2));
  }
  return vol / 6.0;
}

double TriangleMesh::surface_area() const {
  double area = 0.0;
  for (std::size_t i = 0; i < faces_.size(); ++i) area += triangle(i).area();
  return area;
}

TriangleMesh TriangleMesh::transformed(const RigidTransform& t) const {
  TriangleMesh out = *this;
  for (Vec3& v : out.vertices_) v = t.apply(v);
  return out;
}

TriangleMesh TriangleMesh::scaled(double s) const {
  TriangleMesh out = *this;
  for (Vec3& v : out.vertices_) v *= s;
  return out;
}

void TriangleMesh::append(const TriangleMesh& other) {
  const auto offset = static_cast<std::uint32_t>(vertices_.size());
  vertices_.insert(vertices_.end(), other.vertices_.begin(), other.vertices_.end());
  for (Face f : other.faces_) faces_.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
}

void TriangleMesh::flip_orientation() {
  for (Face& f : faces_) std::swap(f[1], f[2]);
}

// ---------------------------------------------------------------------------
// I/O

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<TriangleMesh::Face> fan(const std::vector<long>& poly, std::size_t nverts,
                                    std::size_t line) {
  if (poly.size() < 3)
    throw Error(ErrorCode::ParseError, "face with fewer than 3 vertices at line " +
                                           std::to_string(line));
  std::vector<TriangleMesh::Face> out;
  for (long idx : poly)
    if (idx < 0 || static_cast<std::size_t>(idx) >= nverts)
      throw Error(ErrorCode::ParseError, "face index out of range at line " + std::to_string(line));
  for (std::size_t k = 1; k + 1 < poly.size(); ++k)
    out.push_back({static_cast<std::uint32_t>(poly[0]), static_cast<std::uint32_t>(poly[k]),
                   static_cast<std::uint32_t>(poly[k + 1])});
  return out;
}

}  // namespace

TriangleMesh parse_off(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  std::size_t pos = 0;
  auto next = [&]() -> const std::string& {
    if (pos >= tokens.size()) throw Error(ErrorCode::ParseError, "OFF: unexpected end of file");
    return tokens[pos++];
  };
  auto next_num = [&]() -> double {
    const std::string& tok = next();
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "OFF: bad number '" + tok + "'");
    }
  };
  auto next_count = [&]() -> long {
    double v = next_num();
    if (v < 0 || v != std::floor(v)) throw Error(ErrorCode::ParseError, "OFF: bad count");
    return static_cast<long>(v);
  };

  if (next() != "OFF") throw Error(ErrorCode::ParseError, "OFF: missing header");
  const long nv = next_count();
  const long nf = next_count();
  next_count();  // edges, unused
  std::vector<Vec3> verts(static_cast<std::size_t>(nv));
  for (auto& v : verts) {
    v.x() = next_num();
    v.y() = next_num();
    v.z() = next_num();
  }
  std::vector<TriangleMesh::Face> faces;
  for (long f = 0; f < nf; ++f) {
    const long n = next_count();
    std::vector<long> poly(static_cast<std::size_t>(n));
    for (auto& idx : poly) idx = next_count();
    auto tris = fan(poly, verts.size(), static_cast<std::size_t>(f));
    faces.insert(faces.end(), tris.begin(), tris.end());
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

TriangleMesh parse_obj(const std::string& text) {
  std::istringstream in(text);
  std::vector<Vec3> verts;
  std::vector<TriangleMesh::Face> faces;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = line.substr(0, line.find('#'));
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    if (kind == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z()))
        throw Error(ErrorCode::ParseError, "OBJ: bad vertex at line " + std::to_string(lineno));
      verts.push_back(v);
    } else if (kind == "f") {
      std::vector<long> poly;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        long idx = 0;
        try {
          std::size_t used = 0;
          idx = std::stol(head, &used);
          if (used != head.size()) throw std::invalid_argument(head);
        } catch (const std::exception&) {
          throw Error(ErrorCode::ParseError, "OBJ: bad face index at line " +
                                                 std::to_string(lineno));
        }
        if (idx == 0)
          throw Error(ErrorCode::ParseError, "OBJ: zero face index at line " +
                                                 std::to_string(lineno));
        poly.push_back(idx > 0 ? idx - 1 : static_cast<long>(verts.size()) + idx);
      }
      auto tris = fan(poly, verts.size(), lineno);
      faces.insert(faces.end(), tris.begin(), tris.end());
    }
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".off") return parse_off(read_file(path));
  if (ext == ".obj") return parse_obj(read_file(path));
  throw Error(ErrorCode::ParseError, "unsupported mesh format: " + path.string());
}

std::string format_obj(const TriangleMesh& mesh) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces())
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Closest points

Vec3 closest_point_on_triangle(const Vec3& p, const Triangle& tri) {
  const Vec3& a = tri.v0;
  const Vec3& b = tri.v1;
  const Vec3& c = tri.v2;
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

namespace {

struct SegSegClosest {
  double s, t;
  Vec3 c1, c2;
};

// Closest points of segments p1q1 and p2q2.
SegSegClosest closest_segment_segment(const Vec3& p1, const Vec3& q1, const Vec3& p2,
                                      const Vec3& q2) {
  constexpr double eps = 1e-300;
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0, t = 0;
  if (a <= eps && e <= eps) return {0, 0, p1, p2};
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0) {
        t = 0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1) {
        t = 1;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return {s, t, p1 + d1 * s, p2 + d2 * t};
}

}  // namespace

SegmentTriangleClosest closest_segment_triangle(const Vec3& s0, const Vec3& s1,
                                                const Triangle& tri) {
  // Crossing the triangle interior gives distance zero at the crossing point.
  const Vec3 dir = s1 - s0;
  const Vec3 e1 = tri.v1 - tri.v0, e2 = tri.v2 - tri.v0;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) > 1e-300) {
    const double inv = 1.0 / det;
    const Vec3 tvec = s0 - tri.v0;
    const double u = tvec.dot(pvec) * inv;
    const Vec3 qvec = tvec.cross(e1);
    const double v = dir.dot(qvec) * inv;
    const double t = e2.dot(qvec) * inv;
    if (u >= 0 && v >= 0 && u + v <= 1 && t >= 0 && t <= 1) {
      return {0.0, t, tri.v0 + u * e1 + v * e2};
    }
  }

  SegmentTriangleClosest best;
  best.distance = std::numeric_limits<double>::infinity();
  // Near-ties (a segment parallel to a face) resolve toward the midpoint.
  auto consider = [&](double seg_param, const Vec3& seg_point, const Vec3& surf_point) {
    const double d = (seg_point - surf_point).norm();
    const bool closer = d < best.distance - 1e-12;
    const bool tie = !closer && d <= best.distance + 1e-12 &&
                     std::abs(seg_param - 0.5) < std::abs(best.segment_param - 0.5);
    if (closer || tie) best = {d, seg_param, surf_point};
  };
  const Vec3 mid = s0 + 0.5 * dir;
  consider(0.5, mid, closest_point_on_triangle(mid, tri));
  consider(0.0, s0, closest_point_on_triangle(s0, tri));
  consider(1.0, s1, closest_point_on_triangle(s1, tri));
  const Vec3* corners[3] = {&tri.v0, &tri.v1, &tri.v2};
  for (int k = 0; k < 3; ++k) {
    const SegSegClosest c = closest_segment_segment(s0, s1, *corners[k], *corners[(k + 1) % 3]);
    consider(c.s, c.c1, c.c2);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Separating-axis tests

namespace {

constexpr double kAxisEps = 1e-24;

template <std::size_t N>
void project(const std::array<Vec3, N>& pts, const Vec3& axis, double& lo, double& hi) {
  lo = hi = pts[0].dot(axis);
  for (std::size_t i = 1; i < N; ++i) {
    const double d = pts[i].dot(axis);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
}

template <std::size_t N, std::size_t M>
bool separated_on(const std::array<Vec3, N>& a, const std::array<Vec3, M>& b, const Vec3& axis) {
  if (axis.squaredNorm() < kAxisEps) return false;
  double alo, ahi, blo, bhi;
  project(a, axis, alo, ahi);
  project(b, axis, blo, bhi);
  return ahi < blo || bhi < alo;
}

}  // namespace

bool triangles_intersect(const Triangle& a, const Triangle& b) {
  const std::array<Vec3, 3> pa{a.v0, a.v1, a.v2};
  const std::array<Vec3, 3> pb{b.v0, b.v1, b.v2};
  const std::array<Vec3, 3> ea{a.v1 - a.v0, a.v2 - a.v1, a.v0 - a.v2};
  const std::array<Vec3, 3> eb{b.v1 - b.v0, b.v2 - b.v1, b.v0 - b.v2};
  const Vec3 na = ea[0].cross(ea[1]);
  const Vec3 nb = eb[0].cross(eb[1]);
  if (separated_on(pa, pb, na) || separated_on(pa, pb, nb)) return false;
  for (const Vec3& u : ea)
    for (const Vec3& v : eb)
      if (separated_on(pa, pb, u.cross(v))) return false;
  // In-plane edge normals settle the coplanar case.
  for (const Vec3& u : ea)
    if (separated_on(pa, pb, na.cross(u))) return false;
  for (const Vec3& v : eb)
    if (separated_on(pa, pb, nb.cross(v))) return false;
  return true;
}

bool obb_triangle_intersect(const Obb& box, const Triangle& tri) {
  const Rotation inv = box.pose.rotation.inverse();
  const std::array<Vec3, 3> t{inv * (tri.v0 - box.pose.translation),
                              inv * (tri.v1 - box.pose.translation),
                              inv * (tri.v2 - box.pose.translation)};
  const Vec3& h = box.half_extents;
  const std::array<Vec3, 8> corners{
      Vec3(-h.x(), -h.y(), -h.z()), Vec3(h.x(), -h.y(), -h.z()), Vec3(-h.x(), h.y(), -h.z()),
      Vec3(h.x(), h.y(), -h.z()),   Vec3(-h.x(), -h.y(), h.z()), Vec3(h.x(), -h.y(), h.z()),
      Vec3(-h.x(), h.y(), h.z()),   Vec3(h.x(), h.y(), h.z())};
  for (int k = 0; k < 3; ++k)
    if (separated_on(t, corners, Vec3::Unit(k))) return false;
  const std::array<Vec3, 3> e{t[1] - t[0], t[2] - t[1], t[0] - t[2]};
  if (separated_on(t, corners, e[0].cross(e[1]))) return false;
  for (int k = 0; k < 3; ++k)
    for (const Vec3& edge : e)
      if (separated_on(t, corners, Vec3::Unit(k).cross(edge))) return false;
  return true;
}

bool obb_aabb_intersect(const Obb& box, const Aabb& aabb) {
  if (aabb.empty()) return false;
  const Mat3& r = box.pose.rotation.matrix();
  const Vec3& h = box.half_extents;
  std::array<Vec3, 8> a, b;
  const Vec3 ah = aabb.half_extents(), ac = aabb.center();
  for (int i = 0; i < 8; ++i) {
    const Vec3 sign((i & 1) ? 1 : -1, (i & 2) ? 1 : -1, (i & 4) ? 1 : -1);
    a[i] = box.pose.translation + r * sign.cwiseProduct(h);
    b[i] = ac + sign.cwiseProduct(ah);
  }
  for (int k = 0; k < 3; ++k) {
    if (separated_on(a, b, Vec3::Unit(k))) return false;
    if (separated_on(a, b, r.col(k))) return false;
  }
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      if (separated_on(a, b, r.col(i).cross(Vec3::Unit(k)))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Inside test

namespace {

int signed_crossings(const TriangleMesh& mesh, const Vec3& origin, const Vec3& dir) {
  int winding = 0;
  for (std::size_t i = 0; i < mesh.triangle_count(); ++i) {
    const Triangle tri = mesh.triangle(i);
    const Vec3 e1 = tri.v1 - tri.v0, e2 = tri.v2 - tri.v0;
    const Vec3 pvec = dir.cross(e2);
    const double det = e1.dot(pvec);
    if (std::abs(det) < 1e-300) continue;
    const double inv = 1.0 / det;
    const Vec3 tvec = origin - tri.v0;
    const double u = tvec.dot(pvec) * inv;
    if (u < 0 || u > 1) continue;
    const Vec3 qvec = tvec.cross(e1);
    const double v = dir.dot(qvec) * inv;
    if (v < 0 || u + v > 1) continue;
    if (e2.dot(qvec) * inv <= 0) continue;
    // det = -dir . (e1 x e2): leaving through an outward face has det < 0.
    winding += det < 0 ? 1 : -1;
  }
  return winding;
}

}  // namespace

bool point_inside_mesh(const TriangleMesh& mesh, const Vec3& p) {
  static const std::array<Vec3, 3> dirs{Vec3(0.5377, 0.2171, 0.8147).normalized(),
                                        Vec3(-0.6931, 0.6244, -0.3603).normalized(),
                                        Vec3(0.1291, -0.9033, 0.4091).normalized()};
  if (!mesh.bounds().contains(p)) return false;
  int votes = 0;
  for (const Vec3& d : dirs) votes += signed_crossings(mesh, p, d) > 0 ? 1 : 0;
  return votes >= 2;
}

}  // namespace tgf
