#pragma once

#include <cstdint>
#include <vector>

#include "tgf/mesh.hpp"
#include "tgf/simd/kernels.hpp"

namespace tgf {

struct Ray {
  Vec3 origin;
  Vec3 direction;
};

struct BvhHit {
  double t = 0.0;
  std::int64_t triangle = -1;  // index in the order triangles were added
  Vec3 point = Vec3::Zero();

  bool hit() const { return triangle >= 0; }
};

/// Median-split bounding volume hierarchy over world-space triangles.
/// Leaves hold up to kLeafSize triangles stored contiguously in SoA form and
/// are intersected with the dispatched ray kernel.
class TriangleBvh {
 public:
  static constexpr std::size_t kLeafSize = 8;

  TriangleBvh() = default;
  explicit TriangleBvh(const std::vector<Triangle>& triangles);

  /// Nearest hit with t in (t_min, t_max). Exact ties go to the triangle
  /// added first.
  BvhHit intersect(const Ray& ray, double t_min = 1e-9,
                   double t_max = std::numeric_limits<double>::infinity()) const;

  std::size_t triangle_count() const { return order_.size(); }

 private:
  struct Node {
    Aabb box;
    std::uint32_t begin = 0, end = 0;  // leaf triangle range
    std::int32_t left = -1, right = -1;
    bool leaf() const { return left < 0; }
  };

  std::int32_t build(std::vector<std::uint32_t>& ids, std::uint32_t begin, std::uint32_t end,
                     const std::vector<Triangle>& tris, const std::vector<Vec3>& centroids);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;  // SoA slot -> original triangle index
  simd::TriangleSoA soa_;
};

}  // namespace tgf
