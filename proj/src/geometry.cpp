#include "tgf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tgf/error.hpp"
#include "tgf/simd/kernels.hpp"

namespace tgf {

namespace {

constexpr double kDegenerateEps = 1e-8;
constexpr double kPairTol = 1e-6;

}  // namespace

Rotation Rotation::from_matrix(const Mat3& m, double tol) {
  if (!m.allFinite()) throw Error(ErrorCode::NotOrthonormal, "rotation has non-finite entries");
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > tol)
    throw Error(ErrorCode::NotOrthonormal,
                "rotation columns not orthonormal (max deviation " + std::to_string(ortho) + ")");
  const double det = m.determinant();
  if (std::abs(det - 1.0) > tol)
    throw Error(ErrorCode::NotOrthonormal,
                "rotation determinant " + std::to_string(det) + " is not +1");
  return Rotation(m);
}

Rotation Rotation::about_axis(const Vec3& axis, double angle) {
  return Rotation(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix());
}

void GripperSpec::validate() const {
  if (!(max_width > 0 && finger_length > 0 && base_depth > 0 && finger_thickness > 0))
    throw Error(ErrorCode::InvalidArgument, "gripper dimensions must be strictly positive");
  if (!(max_width > 2.0 * finger_thickness))
    throw Error(ErrorCode::InvalidArgument, "gripper max_width must exceed two finger thicknesses");
}

ApproachBaseline gram_schmidt_orthonormalize(const Vec3& a_raw, const Vec3& b_raw) {
  const double a_norm = a_raw.norm();
  if (!(a_norm > kDegenerateEps))
    throw Error(ErrorCode::DegenerateVectors, "approach vector has (near) zero norm");
  const Vec3 a = a_raw / a_norm;
  const Vec3 b_perp = b_raw - a.dot(b_raw) * a;
  const double b_norm = b_perp.norm();
  if (!(b_norm > kDegenerateEps))
    throw Error(ErrorCode::DegenerateVectors, "baseline vector is (near) parallel to approach");
  return {a, b_perp / b_norm};
}

Rotation rotation_from_approach_baseline(const Vec3& approach, const Vec3& baseline) {
  if (std::abs(approach.norm() - 1.0) > kPairTol || std::abs(baseline.norm() - 1.0) > kPairTol ||
      std::abs(approach.dot(baseline)) > kPairTol)
    throw Error(ErrorCode::NotOrthonormal, "approach/baseline pair is not orthonormal");
  Mat3 m;
  m.col(0) = baseline;
  m.col(1) = approach.cross(baseline);
  m.col(2) = approach;
  return Rotation::unchecked(m);
}

double rotation_angle(const Rotation& r1, const Rotation& r2) {
  // atan2 of sine and cosine stays accurate near 0 and pi, where acos alone
  // loses half the digits.
  const Mat3 m = r1.matrix() * r2.matrix().transpose();
  const Vec3 axis(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  return std::atan2(axis.norm() / 2.0, (m.trace() - 1.0) / 2.0);
}

GraspDistance grasp_distance(const GraspPose& g1, const GraspPose& g2,
                             GraspDistanceOptions options) {
  GraspDistance d;
  d.d_t = euclidean(g1.translation, g2.translation);
  d.d_alpha = rotation_angle(g1.rotation, g2.rotation);
  if (options.fold_jaw_symmetry) {
    const Rotation flipped = g2.rotation * Rotation::unchecked(Vec3(-1, -1, 1).asDiagonal());
    d.d_alpha = std::min(d.d_alpha, rotation_angle(g1.rotation, flipped));
  }
  return d;
}

FivePoints five_point_projection(const GraspPose& g, const GripperSpec& spec) {
  if (g.width > spec.max_width)
    throw Error(ErrorCode::WidthExceedsSpec, "grasp width " + std::to_string(g.width) +
                                                 " exceeds gripper max width " +
                                                 std::to_string(spec.max_width));
  const Vec3 a = g.approach();
  const Vec3 b = g.baseline();
  const Vec3& t = g.translation;
  const Vec3 half = (g.width / 2.0) * b;
  const Vec3 reach = spec.finger_length * a;
  return {t - spec.base_depth * a, t - half, t + half, t - half + reach, t + half + reach};
}

double five_point_mean_distance(const FivePoints& p, const FivePoints& q) {
  double sum = 0.0;
  for (int k = 0; k < 5; ++k) sum = sum + euclidean(p[k], q[k]);
  return sum / 5.0;
}

double grasp_pose_point_distance(const GraspPose& g1, const GraspPose& g2,
                                 const GripperSpec& spec) {
  return five_point_mean_distance(five_point_projection(g1, spec), five_point_projection(g2, spec));
}

double grasp_set_loss(std::span<const WeightedPrediction> preds, std::span<const GraspPose> gts,
                      const GripperSpec& spec) {
  if (preds.empty()) throw Error(ErrorCode::EmptyInput, "grasp_set_loss needs predictions");
  const bool any_weighted =
      std::any_of(preds.begin(), preds.end(), [](const auto& p) { return p.weight; });
  if (any_weighted && gts.empty())
    throw Error(ErrorCode::EmptyGroundTruth, "weighted prediction without ground truth");

  simd::FivePointSoA gt_points;
  gt_points.reserve(gts.size());
  for (const auto& g : gts) {
    const FivePoints fp = five_point_projection(g, spec);
    double raw[5][3];
    for (int k = 0; k < 5; ++k)
      for (int c = 0; c < 3; ++c) raw[k][c] = fp[k][c];
    gt_points.push_back(raw);
  }

  std::vector<double> dist(gts.size());
  double sum = 0.0;
  for (const auto& p : preds) {
    if (!p.weight) continue;
    const FivePoints fp = five_point_projection(p.pose, spec);
    double q[5][3];
    for (int k = 0; k < 5; ++k)
      for (int c = 0; c < 3; ++c) q[k][c] = fp[k][c];
    simd::five_point_mean_distances(q, gt_points, dist);
    sum += *std::min_element(dist.begin(), dist.end());
  }
  return sum / static_cast<double>(preds.size());
}

}  // namespace tgf
