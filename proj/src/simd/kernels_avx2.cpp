// Compiled with -mavx2 (no -mfma); only reached after a runtime CPU check.

#include "tgf/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace tgf::simd::avx2 {

namespace {

inline __m256d load(const std::vector<double>& v, std::size_t i) {
  return _mm256_loadu_pd(v.data() + i);
}

}  // namespace

RayHit nearest_ray_hit(const double origin[3], const double dir[3], const TriangleSoA& tris,
                       std::size_t begin, std::size_t end, double t_min, double t_max) {
  RayHit best{t_max, -1};
  const __m256d ox = _mm256_set1_pd(origin[0]);
  const __m256d oy = _mm256_set1_pd(origin[1]);
  const __m256d oz = _mm256_set1_pd(origin[2]);
  const __m256d dx = _mm256_set1_pd(dir[0]);
  const __m256d dy = _mm256_set1_pd(dir[1]);
  const __m256d dz = _mm256_set1_pd(dir[2]);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d eps = _mm256_set1_pd(kParallelEps);
  const __m256d tmin = _mm256_set1_pd(t_min);
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));

  std::size_t i = begin;
  alignas(32) double tv[4];
  for (; i + 4 <= end; i += 4) {
    const __m256d e1x = load(tris.e1x, i), e1y = load(tris.e1y, i), e1z = load(tris.e1z, i);
    const __m256d e2x = load(tris.e2x, i), e2y = load(tris.e2y, i), e2z = load(tris.e2z, i);
    const __m256d px = _mm256_sub_pd(_mm256_mul_pd(dy, e2z), _mm256_mul_pd(dz, e2y));
    const __m256d py = _mm256_sub_pd(_mm256_mul_pd(dz, e2x), _mm256_mul_pd(dx, e2z));
    const __m256d pz = _mm256_sub_pd(_mm256_mul_pd(dx, e2y), _mm256_mul_pd(dy, e2x));
    const __m256d det = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(e1x, px), _mm256_mul_pd(e1y, py)), _mm256_mul_pd(e1z, pz));
    __m256d mask = _mm256_cmp_pd(_mm256_and_pd(det, abs_mask), eps, _CMP_NLT_UQ);
    const __m256d inv = _mm256_div_pd(one, det);
    const __m256d tx = _mm256_sub_pd(ox, load(tris.v0x, i));
    const __m256d ty = _mm256_sub_pd(oy, load(tris.v0y, i));
    const __m256d tz = _mm256_sub_pd(oz, load(tris.v0z, i));
    const __m256d u = _mm256_mul_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(tx, px), _mm256_mul_pd(ty, py)),
                      _mm256_mul_pd(tz, pz)),
        inv);
    mask = _mm256_and_pd(mask, _mm256_cmp_pd(u, zero, _CMP_GE_OQ));
    mask = _mm256_and_pd(mask, _mm256_cmp_pd(u, one, _CMP_LE_OQ));
    const __m256d qx = _mm256_sub_pd(_mm256_mul_pd(ty, e1z), _mm256_mul_pd(tz, e1y));
    const __m256d qy = _mm256_sub_pd(_mm256_mul_pd(tz, e1x), _mm256_mul_pd(tx, e1z));
    const __m256d qz = _mm256_sub_pd(_mm256_mul_pd(tx, e1y), _mm256_mul_pd(ty, e1x));
    const __m256d v = _mm256_mul_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, qx), _mm256_mul_pd(dy, qy)),
                      _mm256_mul_pd(dz, qz)),
        inv);
    mask = _mm256_and_pd(mask, _mm256_cmp_pd(v, zero, _CMP_GE_OQ));
    mask = _mm256_and_pd(mask, _mm256_cmp_pd(_mm256_add_pd(u, v), one, _CMP_LE_OQ));
    const __m256d t = _mm256_mul_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(e2x, qx), _mm256_mul_pd(e2y, qy)),
                      _mm256_mul_pd(e2z, qz)),
        inv);
    mask = _mm256_and_pd(mask, _mm256_cmp_pd(t, tmin, _CMP_GT_OQ));
    const int bits = _mm256_movemask_pd(mask);
    if (bits == 0) continue;
    _mm256_store_pd(tv, t);
    // Lane order reproduces the scalar first-minimum rule.
    for (int lane = 0; lane < 4; ++lane) {
      if ((bits >> lane) & 1) {
        if (tv[lane] < best.t) {
          best.t = tv[lane];
          best.index = static_cast<std::ptrdiff_t>(i) + lane;
        }
      }
    }
  }
  if (i < end) {
    RayHit tail = scalar::nearest_ray_hit(origin, dir, tris, i, end, t_min, best.t);
    if (tail.index >= 0) best = tail;
  }
  return best;
}

void squared_distances(const double q[3], PointsView pts, double* out) {
  const __m256d qx = _mm256_set1_pd(q[0]);
  const __m256d qy = _mm256_set1_pd(q[1]);
  const __m256d qz = _mm256_set1_pd(q[2]);
  std::size_t i = 0;
  for (; i + 4 <= pts.count; i += 4) {
    const __m256d dx = _mm256_sub_pd(qx, _mm256_loadu_pd(pts.x + i));
    const __m256d dy = _mm256_sub_pd(qy, _mm256_loadu_pd(pts.y + i));
    const __m256d dz = _mm256_sub_pd(qz, _mm256_loadu_pd(pts.z + i));
    const __m256d d2 = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                                     _mm256_mul_pd(dz, dz));
    _mm256_storeu_pd(out + i, d2);
  }
  if (i < pts.count) {
    PointsView rest{pts.x + i, pts.y + i, pts.z + i, pts.count - i};
    scalar::squared_distances(q, rest, out + i);
  }
}

void five_point_mean_distances(const double q[5][3], const FivePointSoA& set, double* out) {
  const std::size_t n = set.size();
  const __m256d five = _mm256_set1_pd(5.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d sum = _mm256_setzero_pd();
    for (int k = 0; k < 5; ++k) {
      const __m256d dx =
          _mm256_sub_pd(_mm256_set1_pd(q[k][0]), _mm256_loadu_pd(set.coords[3 * k].data() + i));
      const __m256d dy = _mm256_sub_pd(_mm256_set1_pd(q[k][1]),
                                       _mm256_loadu_pd(set.coords[3 * k + 1].data() + i));
      const __m256d dz = _mm256_sub_pd(_mm256_set1_pd(q[k][2]),
                                       _mm256_loadu_pd(set.coords[3 * k + 2].data() + i));
      const __m256d d2 = _mm256_add_pd(
          _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)), _mm256_mul_pd(dz, dz));
      sum = _mm256_add_pd(sum, _mm256_sqrt_pd(d2));
    }
    _mm256_storeu_pd(out + i, _mm256_div_pd(sum, five));
  }
  for (; i < n; ++i) {
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

}  // namespace tgf::simd::avx2
