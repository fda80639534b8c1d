#include "tgf/simd/kernels.hpp"

#include <cmath>

namespace tgf::simd {

void TriangleSoA::reserve(std::size_t n) {
  for (auto* v : {&v0x, &v0y, &v0z, &e1x, &e1y, &e1z, &e2x, &e2y, &e2z}) v->reserve(n);
}

void TriangleSoA::push_back(const double v0[3], const double v1[3], const double v2[3]) {
  v0x.push_back(v0[0]);
  v0y.push_back(v0[1]);
  v0z.push_back(v0[2]);
  e1x.push_back(v1[0] - v0[0]);
  e1y.push_back(v1[1] - v0[1]);
  e1z.push_back(v1[2] - v0[2]);
  e2x.push_back(v2[0] - v0[0]);
  e2y.push_back(v2[1] - v0[1]);
  e2z.push_back(v2[2] - v0[2]);
}

void FivePointSoA::reserve(std::size_t n) {
  for (auto& c : coords) c.reserve(n);
}

void FivePointSoA::push_back(const double pts[5][3]) {
  for (int k = 0; k < 5; ++k)
    for (int c = 0; c < 3; ++c) coords[3 * k + c].push_back(pts[k][c]);
}

namespace scalar {

RayHit nearest_ray_hit(const double origin[3], const double dir[3], const TriangleSoA& tris,
                       std::size_t begin, std::size_t end, double t_min, double t_max) {
  RayHit best{t_max, -1};
  const double ox = origin[0], oy = origin[1], oz = origin[2];
  const double dx = dir[0], dy = dir[1], dz = dir[2];
  for (std::size_t i = begin; i < end; ++i) {
    const double e1x = tris.e1x[i], e1y = tris.e1y[i], e1z = tris.e1z[i];
    const double e2x = tris.e2x[i], e2y = tris.e2y[i], e2z = tris.e2z[i];
    const double px = dy * e2z - dz * e2y;
    const double py = dz * e2x - dx * e2z;
    const double pz = dx * e2y - dy * e2x;
    const double det = e1x * px + e1y * py + e1z * pz;
    if (std::fabs(det) < kParallelEps) continue;
    const double inv = 1.0 / det;
    const double tx = ox - tris.v0x[i];
    const double ty = oy - tris.v0y[i];
    const double tz = oz - tris.v0z[i];
    const double u = (tx * px + ty * py + tz * pz) * inv;
    if (!(u >= 0.0 && u <= 1.0)) continue;
    const double qx = ty * e1z - tz * e1y;
    const double qy = tz * e1x - tx * e1z;
    const double qz = tx * e1y - ty * e1x;
    const double v = (dx * qx + dy * qy + dz * qz) * inv;
    if (!(v >= 0.0 && u + v <= 1.0)) continue;
    const double t = (e2x * qx + e2y * qy + e2z * qz) * inv;
    if (t > t_min && t < best.t) {
      best.t = t;
      best.index = static_cast<std::ptrdiff_t>(i);
    }
  }
  return best;
}

void squared_distances(const double q[3], PointsView pts, double* out) {
  for (std::size_t i = 0; i < pts.count; ++i) {
    const double dx = q[0] - pts.x[i];
    const double dy = q[1] - pts.y[i];
    const double dz = q[2] - pts.z[i];
    out[i] = dx * dx + dy * dy + dz * dz;
  }
}

void five_point_mean_distances(const double q[5][3], const FivePointSoA& set, double* out) {
  const std::size_t n = set.size();
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int k = 0; k < 5; ++k) {
      const double dx = q[k][0] - set.coords[3 * k][i];
      const double dy = q[k][1] - set.coords[3 * k + 1][i];
      const double dz = q[k][2] - set.coords[3 * k + 2][i];
      sum = sum + std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    out[i] = sum / 5.0;
  }
}

}  // namespace scalar
}  // namespace tgf::simd
