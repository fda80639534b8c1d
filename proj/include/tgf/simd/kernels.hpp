#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference in
// tgf::simd::scalar and, on x86-64, an AVX2 variant in tgf::simd::avx2.
// The free functions in tgf::simd dispatch at runtime to the best variant the
// CPU supports. Variants must produce bit-identical results: the AVX2 lanes
// evaluate the exact scalar expression trees without fused multiply-add, and
// reductions run in index order.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace tgf::simd {

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend b);

/// Structure-of-arrays triangle storage in Möller–Trumbore form: first
/// vertex plus the two edge vectors leaving it.
class TriangleSoA {
 public:
  void reserve(std::size_t n);
  void push_back(const double v0[3], const double v1[3], const double v2[3]);
  std::size_t size() const { return v0x.size(); }

  std::vector<double> v0x, v0y, v0z;
  std::vector<double> e1x, e1y, e1z;
  std::vector<double> e2x, e2y, e2z;
};

/// Three coordinate arrays of equal length.
struct PointsView {
  const double* x = nullptr;
  const double* y = nullptr;
  const double* z = nullptr;
  std::size_t count = 0;
};

/// Five gripper skeleton points per grasp, stored as 15 coordinate arrays
/// (point k, axis c lives in coords[3 * k + c]).
class FivePointSoA {
 public:
  void reserve(std::size_t n);
  void push_back(const double pts[5][3]);
  std::size_t size() const { return coords[0].size(); }

  std::vector<double> coords[15];
};

struct RayHit {
  double t = 0.0;
  std::ptrdiff_t index = -1;  // -1: no hit
};

/// Determinant magnitude below which a ray is treated as parallel.
inline constexpr double kParallelEps = 1e-14;

/// Nearest intersection with triangles [begin, end) whose ray parameter lies in
/// (t_min, t_max). Earlier indices win exact ties.
using NearestRayHitFn = RayHit (*)(const double origin[3], const double dir[3],
                                   const TriangleSoA& tris, std::size_t begin,
                                   std::size_t end, double t_min, double t_max);
/// out[i] = |q - p_i|^2, evaluated as dx*dx + dy*dy + dz*dz.
using SquaredDistancesFn = void (*)(const double q[3], PointsView pts, double* out);
/// out[i] = mean over the five skeleton points of |q_k - p_ik|.
using FivePointMeanFn = void (*)(const double q[5][3], const FivePointSoA& set,
                                 double* out);

namespace scalar {
RayHit nearest_ray_hit(const double origin[3], const double dir[3], const TriangleSoA& tris,
                       std::size_t begin, std::size_t end, double t_min, double t_max);
void squared_distances(const double q[3], PointsView pts, double* out);
void five_point_mean_distances(const double q[5][3], const FivePointSoA& set, double* out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define TGF_HAVE_AVX2_KERNELS 1
namespace avx2 {
RayHit nearest_ray_hit(const double origin[3], const double dir[3], const TriangleSoA& tris,
                       std::size_t begin, std::size_t end, double t_min, double t_max);
void squared_distances(const double q[3], PointsView pts, double* out);
void five_point_mean_distances(const double q[5][3], const FivePointSoA& set, double* out);
}  // namespace avx2
#endif

bool backend_available(Backend b);
Backend active_backend();
/// Pins the dispatch table (tests, benchmarking). std::nullopt restores the
/// automatic choice. Throws InvalidArgument for an unavailable backend.
void force_backend(std::optional<Backend> b);

RayHit nearest_ray_hit(const double origin[3], const double dir[3], const TriangleSoA& tris,
                       std::size_t begin, std::size_t end, double t_min, double t_max);
void squared_distances(const double q[3], PointsView pts, std::span<double> out);
void five_point_mean_distances(const double q[5][3], const FivePointSoA& set,
                               std::span<double> out);

}  // namespace tgf::simd
