#include "tgf/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tgf {

namespace {

// Slab test; returns entry distance or +inf when the ray misses the box
// within (t_min, t_max].
double ray_box_entry(const Ray& ray, const Vec3& inv_dir, const Aabb& box, double t_min,
                     double t_max) {
  double lo = t_min, hi = t_max;
  for (int k = 0; k < 3; ++k) {
    if (ray.direction[k] == 0.0) {
      if (ray.origin[k] < box.lo[k] || ray.origin[k] > box.hi[k])
        return std::numeric_limits<double>::infinity();
      continue;
    }
    double t0 = (box.lo[k] - ray.origin[k]) * inv_dir[k];
    double t1 = (box.hi[k] - ray.origin[k]) * inv_dir[k];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    if (lo > hi) return std::numeric_limits<double>::infinity();
  }
  return lo;
}

}  // namespace

TriangleBvh::TriangleBvh(const std::vector<Triangle>& triangles) {
  if (triangles.empty()) return;
  std::vector<Vec3> centroids(triangles.size());
  for (std::size_t i = 0; i < triangles.size(); ++i) centroids[i] = triangles[i].centroid();
  std::vector<std::uint32_t> ids(triangles.size());
  std::iota(ids.begin(), ids.end(), 0u);
  nodes_.reserve(2 * triangles.size() / kLeafSize + 1);
  build(ids, 0, static_cast<std::uint32_t>(ids.size()), triangles, centroids);

  order_ = std::move(ids);
  soa_.reserve(order_.size());
  for (std::uint32_t id : order_) {
    const Triangle& t = triangles[id];
    soa_.push_back(t.v0.data(), t.v1.data(), t.v2.data());
  }
}

std::int32_t TriangleBvh::build(std::vector<std::uint32_t>& ids, std::uint32_t begin,
                                std::uint32_t end, const std::vector<Triangle>& tris,
                                const std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box, cbox;
  for (std::uint32_t i = begin; i < end; ++i) {
    box.extend(Aabb::of(tris[ids[i]]));
    cbox.extend(centroids[ids[i]]);
  }
  nodes_[index].box = box;
  if (end - begin <= kLeafSize) {
    // Slot order inside a leaf follows insertion order so kernel ties match.
    std::sort(ids.begin() + begin, ids.begin() + end);
    nodes_[index].begin = begin;
    nodes_[index].end = end;
    return index;
  }
  int axis = 0;
  const Vec3 ext = cbox.hi - cbox.lo;
  if (ext.y() > ext[axis]) axis = 1;
  if (ext.z() > ext[axis]) axis = 2;
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(ids.begin() + begin, ids.begin() + mid, ids.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = centroids[a][axis], cb = centroids[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const std::int32_t left = build(ids, begin, mid, tris, centroids);
  const std::int32_t right = build(ids, mid, end, tris, centroids);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

BvhHit TriangleBvh::intersect(const Ray& ray, double t_min, double t_max) const {
  BvhHit best;
  best.t = t_max;
  if (nodes_.empty()) return best;
  const Vec3 inv_dir = ray.direction.cwiseInverse();

  std::int32_t stack[128];
  int top = 0;
  if (ray_box_entry(ray, inv_dir, nodes_[0].box, t_min, t_max) == std::numeric_limits<double>::infinity())
    return best;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.leaf()) {
      const double limit = std::nextafter(best.t, std::numeric_limits<double>::infinity());
      const simd::RayHit h = simd::nearest_ray_hit(ray.origin.data(), ray.direction.data(), soa_,
                                                   node.begin, node.end, t_min, limit);
      if (h.index >= 0) {
        const auto tri = static_cast<std::int64_t>(order_[static_cast<std::size_t>(h.index)]);
        if (h.t < best.t || (h.t == best.t && (best.triangle < 0 || tri < best.triangle))) {
          best.t = h.t;
          best.triangle = tri;
        }
      }
      continue;
    }
    const double tl = ray_box_entry(ray, inv_dir, nodes_[node.left].box, t_min, best.t);
    const double tr = ray_box_entry(ray, inv_dir, nodes_[node.right].box, t_min, best.t);
    const bool hit_l = tl != std::numeric_limits<double>::infinity();
    const bool hit_r = tr != std::numeric_limits<double>::infinity();
    // Push the farther child first so the nearer one is processed next.
    if (hit_l && hit_r) {
      if (tl <= tr) {
        stack[top++] = node.right;
        stack[top++] = node.left;
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    } else if (hit_l) {
      stack[top++] = node.left;
    } else if (hit_r) {
      stack[top++] = node.right;
    }
  }
  if (best.hit()) best.point = ray.origin + best.t * ray.direction;
  return best;
}

}  // namespace tgf
