#pragma once

// Rigid-body and grasp geometry: rotations, poses, the approach/baseline
// decomposition of a parallel-jaw grasp, the five-point gripper skeleton and
// the distances built on top of it.

#include <array>
#include <cmath>
#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace tgf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Proper rotation (element of SO(3)).
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Validates orthonormality and det = +1 within `tol`; throws NotOrthonormal.
  static Rotation from_matrix(const Mat3& m, double tol = 1e-9);
  /// Caller guarantees the invariants (internal composition paths).
  static Rotation unchecked(const Mat3& m) { return Rotation(m); }
  static Rotation identity() { return Rotation(); }
  /// Right-handed rotation by `angle` radians about unit `axis`.
  static Rotation about_axis(const Vec3& axis, double angle);
  static Rotation about_z(double angle) { return about_axis(Vec3::UnitZ(), angle); }

  const Mat3& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  /// Gripper axes: x = baseline, y = approach x baseline, z = approach.
  Vec3 baseline() const { return m_.col(0); }
  Vec3 approach() const { return m_.col(2); }

  Rotation inverse() const { return Rotation(m_.transpose()); }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  bool operator==(const Rotation& o) const { return m_ == o.m_; }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

struct RigidTransform {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform operator*(const RigidTransform& o) const {
    return {rotation * o.rotation, rotation * o.translation + translation};
  }
  RigidTransform inverse() const {
    Rotation inv = rotation.inverse();
    return {inv, -(inv * translation)};
  }
  bool operator==(const RigidTransform& o) const {
    return rotation == o.rotation && translation == o.translation;
  }
};

struct GripperSpec {
  double max_width = 0.08;
  double finger_length = 0.046;
  double base_depth = 0.02;
  double finger_thickness = 0.01;

  /// Throws InvalidArgument when a dimension is non-positive or the
  /// fingers would not fit inside the opening.
  void validate() const;
  bool operator==(const GripperSpec&) const = default;
};

struct GraspPose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
  double width = 0.0;

  Vec3 approach() const { return rotation.approach(); }
  Vec3 baseline() const { return rotation.baseline(); }

  /// Pose expressed in the parent frame of `frame` (width unchanged).
  GraspPose transformed(const RigidTransform& frame) const {
    return {frame.rotation * rotation, frame.apply(translation), width};
  }
  bool operator==(const GraspPose& o) const {
    return rotation == o.rotation && translation == o.translation && width == o.width;
  }
};

struct GraspDistance {
  double d_t = 0.0;      // meters
  double d_alpha = 0.0;  // radians, [0, pi]
};

struct ApproachBaseline {
  Vec3 approach;
  Vec3 baseline;
};

/// Normalizes `a_raw`, strips its component from `b_raw` and normalizes the
/// remainder. Throws DegenerateVectors when either norm falls below 1e-8.
ApproachBaseline gram_schmidt_orthonormalize(const Vec3& a_raw, const Vec3& b_raw);

/// Rotation with columns [b, a x b, a]. Throws NotOrthonormal when the pair
/// is off by more than 1e-6.
Rotation rotation_from_approach_baseline(const Vec3& approach, const Vec3& baseline);

/// Euclidean distance with a fixed evaluation order, shared by every metric so
/// that batched kernels and scalar paths agree bit-for-bit.
inline double euclidean(const Vec3& p, const Vec3& q) {
  const double dx = p.x() - q.x();
  const double dy = p.y() - q.y();
  const double dz = p.z() - q.z();
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Geodesic angle between two rotations, arccos((tr(R1 R2^T) - 1) / 2).
double rotation_angle(const Rotation& r1, const Rotation& r2);

struct GraspDistanceOptions {
  /// Also consider g2 rotated by pi about its approach axis (swapped jaws)
  /// and keep the smaller angle.
  bool fold_jaw_symmetry = false;
};

GraspDistance grasp_distance(const GraspPose& g1, const GraspPose& g2,
                             GraspDistanceOptions options = {});

/// Gripper skeleton: [root, left base, right base, left tip, right tip].
using FivePoints = std::array<Vec3, 5>;

/// Throws WidthExceedsSpec when g.width > spec.max_width.
FivePoints five_point_projection(const GraspPose& g, const GripperSpec& spec);

/// Mean Euclidean distance over the five corresponding skeleton points.
double grasp_pose_point_distance(const GraspPose& g1, const GraspPose& g2,
                                 const GripperSpec& spec);
double five_point_mean_distance(const FivePoints& p, const FivePoints& q);

struct WeightedPrediction {
  GraspPose pose;
  bool weight = true;  // the binary match indicator multiplying each term
};

/// (1/n) sum_i w_i min_u grasp_pose_point_distance(pred_i, gt_u).
/// Throws EmptyInput for no predictions and EmptyGroundTruth when a weighted
/// prediction has nothing to match against.
double grasp_set_loss(std::span<const WeightedPrediction> preds,
                      std::span<const GraspPose> gts, const GripperSpec& spec);

}  // namespace tgf
