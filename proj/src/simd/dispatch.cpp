#include <atomic>
#include <cstdlib>
#include <cstring>

#include "tgf/error.hpp"
#include "tgf/simd/kernels.hpp"

namespace tgf::simd {

namespace {

struct KernelTable {
  Backend backend;
  NearestRayHitFn nearest_ray_hit;
  SquaredDistancesFn squared_distances;
  FivePointMeanFn five_point_mean_distances;
};

constexpr KernelTable kScalarTable{Backend::Scalar, &scalar::nearest_ray_hit,
                                   &scalar::squared_distances,
                                   &scalar::five_point_mean_distances};
#ifdef TGF_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2Table{Backend::Avx2, &avx2::nearest_ray_hit, &avx2::squared_distances,
                                 &avx2::five_point_mean_distances};
#endif

bool cpu_has_avx2() {
#ifdef TGF_HAVE_AVX2_KERNELS
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* table_for(Backend b) {
#ifdef TGF_HAVE_AVX2_KERNELS
  if (b == Backend::Avx2) return &kAvx2Table;
#endif
  (void)b;
  return &kScalarTable;
}

// TGF_SIMD=scalar pins the reference kernels for the whole process.
const KernelTable* automatic_table() {
  const char* env = std::getenv("TGF_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return &kScalarTable;
  return cpu_has_avx2() ? table_for(Backend::Avx2) : &kScalarTable;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{automatic_table()};
  return table;
}

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  return b == Backend::Scalar || (b == Backend::Avx2 && cpu_has_avx2());
}

Backend active_backend() { return current().load()->backend; }

void force_backend(std::optional<Backend> b) {
  if (!b) {
    current().store(automatic_table());
    return;
  }
  if (!backend_available(*b))
    throw Error(ErrorCode::InvalidArgument,
                "SIMD backend " + std::string(to_string(*b)) + " not available on this CPU");
  current().store(table_for(*b));
}

RayHit nearest_ray_hit(const double origin[3], const double dir[3], const TriangleSoA& tris,
                       std::size_t begin, std::size_t end, double t_min, double t_max) {
  return current().load(std::memory_order_relaxed)
      ->nearest_ray_hit(origin, dir, tris, begin, end, t_min, t_max);
}

void squared_distances(const double q[3], PointsView pts, std::span<double> out) {
  if (out.size() < pts.count)
    throw Error(ErrorCode::LengthMismatch, "squared_distances output too short");
  current().load(std::memory_order_relaxed)->squared_distances(q, pts, out.data());
}

void five_point_mean_distances(const double q[5][3], const FivePointSoA& set,
                               std::span<double> out) {
  if (out.size() < set.size())
    throw Error(ErrorCode::LengthMismatch, "five_point_mean_distances output too short");
  current().load(std::memory_order_relaxed)->five_point_mean_distances(q, set, out.data());
}

}  // namespace tgf::simd
