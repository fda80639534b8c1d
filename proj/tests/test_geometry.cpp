#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "tgf/error.hpp"
#include "tgf/geometry.hpp"

using namespace tgf;
using std::numbers::pi;

namespace {

void expect_vec(const Vec3& got, const Vec3& want, double tol = 1e-12) {
  EXPECT_NEAR(got.x(), want.x(), tol);
  EXPECT_NEAR(got.y(), want.y(), tol);
  EXPECT_NEAR(got.z(), want.z(), tol);
}

GraspPose pose_at(const Vec3& t, double w = 0.04, const Mat3& r = Mat3::Identity()) {
  return {Rotation::from_matrix(r), t, w};
}

// Exhaustive reference for the set loss, computed from five_point_projection.
double brute_force_set_loss(const std::vector<WeightedPrediction>& preds,
                            const std::vector<GraspPose>& gts, const GripperSpec& spec) {
  double sum = 0.0;
  for (const auto& p : preds) {
    if (!p.weight) continue;
    const FivePoints a = five_point_projection(p.pose, spec);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : gts) {
      const FivePoints b = five_point_projection(g, spec);
      double d = 0.0;
      for (int k = 0; k < 5; ++k) d += euclidean(a[k], b[k]);
      best = std::min(best, d / 5.0);
    }
    sum += best;
  }
  return sum / static_cast<double>(preds.size());
}

}  // namespace

TEST(GramSchmidt, AlreadyOrthonormal) {
  const auto [a, b] = gram_schmidt_orthonormalize({0, 0, 1}, {1, 0, 0});
  expect_vec(a, {0, 0, 1});
  expect_vec(b, {1, 0, 0});
}

TEST(GramSchmidt, NormalizesAndStripsComponent) {
  const auto [a, b] = gram_schmidt_orthonormalize({0, 0, 2}, {1, 0, 1});
  expect_vec(a, {0, 0, 1});
  expect_vec(b, {1, 0, 0});
}

TEST(GramSchmidt, RandomPairsAreOrthonormal) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 ar(n(gen), n(gen), n(gen)), br(n(gen), n(gen), n(gen));
    const auto [a, b] = gram_schmidt_orthonormalize(ar, br);
    ASSERT_NEAR(a.norm(), 1.0, 1e-9);
    ASSERT_NEAR(b.norm(), 1.0, 1e-9);
    ASSERT_NEAR(a.dot(b), 0.0, 1e-9);
    ASSERT_NEAR(a.cross(ar.normalized()).norm(), 0.0, 1e-12);
    ASSERT_GT(b.dot(br), 0.0);
  }
}

TEST(GramSchmidt, DegenerateInputs) {
  EXPECT_TGF_ERROR(gram_schmidt_orthonormalize({0, 0, 0}, {1, 0, 0}), ErrorCode::DegenerateVectors);
  EXPECT_TGF_ERROR(gram_schmidt_orthonormalize({0, 0, 1}, {0, 0, 3}), ErrorCode::DegenerateVectors);
  EXPECT_TGF_ERROR(gram_schmidt_orthonormalize({0, 0, 1}, {1e-9, 0, 1}), ErrorCode::DegenerateVectors);
}

TEST(RotationFromApproachBaseline, Identity) {
  const Rotation r = rotation_from_approach_baseline({0, 0, 1}, {1, 0, 0});
  EXPECT_TRUE(r.matrix().isApprox(Mat3::Identity(), 1e-15));
}

TEST(RotationFromApproachBaseline, QuarterTurnAboutZ) {
  const Rotation r = rotation_from_approach_baseline({0, 0, 1}, {0, 1, 0});
  Mat3 want;
  want << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_TRUE(r.matrix().isApprox(want, 1e-15));
}

TEST(RotationFromApproachBaseline, RandomPairsAreProperRotations) {
  std::mt19937_64 gen(2);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = oracle::random_unit(gen);
    const Vec3 b = a.unitOrthogonal();
    const Rotation r = rotation_from_approach_baseline(a, b);
    ASSERT_NEAR(r.matrix().determinant(), 1.0, 1e-9);
    ASSERT_LT((r.matrix().transpose() * r.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    ASSERT_LT((r.approach() - a).norm(), 1e-15);
    ASSERT_LT((r.baseline() - b).norm(), 1e-15);
  }
}

TEST(RotationFromApproachBaseline, RoundTripsThroughAccessors) {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 m = oracle::random_rotation(gen);
    const Rotation r = Rotation::from_matrix(m);
    const Rotation back = rotation_from_approach_baseline(r.approach(), r.baseline());
    ASSERT_LT((back.matrix() - m).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(RotationFromApproachBaseline, RejectsNonOrthonormal) {
  EXPECT_TGF_ERROR(rotation_from_approach_baseline({0, 0, 1}, {1, 0, 0.01}), ErrorCode::NotOrthonormal);
  EXPECT_TGF_ERROR(rotation_from_approach_baseline({0, 0, 1.01}, {1, 0, 0}), ErrorCode::NotOrthonormal);
}

TEST(Rotation, FromMatrixValidates) {
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1;
  EXPECT_TGF_ERROR(Rotation::from_matrix(reflect), ErrorCode::NotOrthonormal);
  EXPECT_TGF_ERROR(Rotation::from_matrix(2.0 * Mat3::Identity()), ErrorCode::NotOrthonormal);
  EXPECT_NO_THROW(Rotation::from_matrix(oracle::axis_angle({1, 2, 3}, 0.7)));
}

TEST(Rotation, AboutAxisMatchesRodrigues) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (int i = 0; i < 200; ++i) {
    const Vec3 axis = oracle::random_unit(gen);
    const double th = u(gen);
    ASSERT_LT((Rotation::about_axis(axis, th).matrix() - oracle::axis_angle(axis, th)).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(GraspDistance, Identical) {
  const GraspPose g = pose_at({0.1, 0.2, 0.3});
  const GraspDistance d = grasp_distance(g, g);
  EXPECT_EQ(d.d_t, 0.0);
  EXPECT_EQ(d.d_alpha, 0.0);
}

TEST(GraspDistance, PureTranslation) {
  const GraspDistance d = grasp_distance(pose_at({0, 0, 0}), pose_at({0.03, 0, 0}));
  EXPECT_NEAR(d.d_t, 0.03, 1e-15);
  EXPECT_EQ(d.d_alpha, 0.0);
}

TEST(GraspDistance, QuarterTurn) {
  std::mt19937_64 gen(5);
  const Mat3 r1 = oracle::random_rotation(gen);
  const Mat3 r2 = r1 * oracle::axis_angle(Vec3::UnitZ(), pi / 2);
  const GraspDistance d = grasp_distance(pose_at({0, 0, 0}, 0.04, r1), pose_at({0, 0, 0}, 0.0, r2));
  EXPECT_NEAR(d.d_alpha, pi / 2, 1e-12);
  EXPECT_EQ(d.d_t, 0.0);
}

TEST(GraspDistance, MatchesQuaternionAngle) {
  std::mt19937_64 gen(6);
  for (int i = 0; i < 10000; ++i) {
    const Mat3 a = oracle::random_rotation(gen), b = oracle::random_rotation(gen);
    const double d = grasp_distance(pose_at({0, 0, 0}, 0, a), pose_at({0, 0, 0}, 0, b)).d_alpha;
    ASSERT_NEAR(d, oracle::quaternion_angle(a, b), 1e-6);
    ASSERT_GE(d, 0.0);
    ASSERT_LE(d, pi);
  }
}

TEST(GraspDistance, RecoversAxisAngle) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, pi);
  for (int i = 0; i < 100; ++i) {
    const Mat3 r = oracle::random_rotation(gen);
    const Vec3 axis = oracle::random_unit(gen);
    const double th = i == 0 ? 0.0 : (i == 1 ? pi : u(gen));
    const Mat3 r2 = r * oracle::axis_angle(axis, th);
    ASSERT_NEAR(rotation_angle(Rotation::from_matrix(r), Rotation::unchecked(r2)), th, 1e-6);
  }
}

TEST(GraspDistance, SymmetricAndRigidInvariant) {
  std::mt19937_64 gen(8);
  for (int i = 0; i < 1000; ++i) {
    const GraspPose g1 = oracle::random_grasp(gen), g2 = oracle::random_grasp(gen);
    const RigidTransform f{Rotation::from_matrix(oracle::random_rotation(gen)),
                           Vec3(gen() % 100 / 50.0 - 1, 0.3, -0.2)};
    const GraspDistance d = grasp_distance(g1, g2);
    const GraspDistance s = grasp_distance(g2, g1);
    const GraspDistance m = grasp_distance(g1.transformed(f), g2.transformed(f));
    ASSERT_EQ(d.d_t, s.d_t);
    ASSERT_NEAR(d.d_alpha, s.d_alpha, 1e-12);
    ASSERT_NEAR(d.d_t, m.d_t, 1e-9);
    ASSERT_NEAR(d.d_alpha, m.d_alpha, 1e-7);  // acos near 0 amplifies rounding
  }
}

TEST(GraspDistance, IgnoresWidth) {
  EXPECT_EQ(grasp_distance(pose_at({0, 0, 0}, 0.01), pose_at({0, 0, 0}, 0.07)).d_t, 0.0);
}

TEST(GraspDistance, OptionalJawFlipFolding) {
  const Mat3 flipped = oracle::axis_angle(Vec3::UnitZ(), pi);
  const GraspPose g1 = pose_at({0, 0, 0});
  const GraspPose g2 = pose_at({0, 0, 0}, 0.04, flipped);
  EXPECT_NEAR(grasp_distance(g1, g2).d_alpha, pi, 1e-7);
  EXPECT_NEAR(grasp_distance(g1, g2, {.fold_jaw_symmetry = true}).d_alpha, 0.0, 1e-7);
}

TEST(FivePoint, IdentityLayout) {
  const GripperSpec spec;
  const FivePoints p = five_point_projection(pose_at({0, 0, 0}, 0.08), spec);
  expect_vec(p[0], {0, 0, -0.02});
  expect_vec(p[1], {-0.04, 0, 0});
  expect_vec(p[2], {0.04, 0, 0});
  expect_vec(p[3], {-0.04, 0, 0.046});
  expect_vec(p[4], {0.04, 0, 0.046});
}

TEST(FivePoint, ZeroWidthCollapsesPairs) {
  std::mt19937_64 gen(9);
  GraspPose g = oracle::random_grasp(gen);
  g.width = 0.0;
  const FivePoints p = five_point_projection(g, GripperSpec{});
  EXPECT_EQ(p[1], p[2]);
  EXPECT_EQ(p[3], p[4]);
  EXPECT_LT((p[1] - g.translation).norm(), 1e-15);
  EXPECT_NEAR((p[3] - g.translation).cross(g.approach()).norm(), 0.0, 1e-12);
}

TEST(FivePoint, WidthExceedsSpec) {
  EXPECT_TGF_ERROR(five_point_projection(pose_at({0, 0, 0}, 0.0801), GripperSpec{}),
                   ErrorCode::WidthExceedsSpec);
}

TEST(FivePoint, TranslationMovesEveryPoint) {
  std::mt19937_64 gen(10);
  const GripperSpec spec;
  for (int i = 0; i < 1000; ++i) {
    GraspPose g = oracle::random_grasp(gen);
    const Vec3 delta = 0.05 * oracle::random_unit(gen);
    GraspPose h = g;
    h.translation += delta;
    const FivePoints p = five_point_projection(g, spec), q = five_point_projection(h, spec);
    for (int k = 0; k < 5; ++k) ASSERT_NEAR((q[k] - p[k]).norm(), delta.norm(), 1e-12);
  }
}

TEST(FivePoint, RigidMotionCommutes) {
  std::mt19937_64 gen(11);
  const GripperSpec spec;
  for (int i = 0; i < 1000; ++i) {
    const GraspPose g = oracle::random_grasp(gen);
    const RigidTransform f{Rotation::from_matrix(oracle::random_rotation(gen)), oracle::random_unit(gen)};
    const FivePoints p = five_point_projection(g, spec), q = five_point_projection(g.transformed(f), spec);
    for (int k = 0; k < 5; ++k) ASSERT_LT((f.apply(p[k]) - q[k]).norm(), 1e-12);
  }
}

TEST(PointDistance, Examples) {
  const GripperSpec spec;
  const GraspPose g = pose_at({0.1, 0, 0});
  EXPECT_EQ(grasp_pose_point_distance(g, g, spec), 0.0);
  EXPECT_NEAR(grasp_pose_point_distance(g, pose_at({0.11, 0, 0}), spec), 0.01, 1e-15);
}

TEST(PointDistance, MatchesIndependentMean) {
  std::mt19937_64 gen(12);
  const GripperSpec spec;
  for (int i = 0; i < 1000; ++i) {
    const GraspPose g1 = oracle::random_grasp(gen), g2 = oracle::random_grasp(gen);
    const FivePoints a = five_point_projection(g1, spec), b = five_point_projection(g2, spec);
    double mean = 0.0;
    for (int k = 0; k < 5; ++k) mean += (a[k] - b[k]).norm();
    mean /= 5.0;
    const double d = grasp_pose_point_distance(g1, g2, spec);
    ASSERT_NEAR(d, mean, 1e-15);
    ASSERT_EQ(d, grasp_pose_point_distance(g2, g1, spec));
    ASSERT_GT(d, 0.0);
  }
}

TEST(PointDistance, ZeroOnlyForIdenticalGrasps) {
  const GripperSpec spec;
  const GraspPose g = pose_at({0, 0, 0}, 0.04);
  EXPECT_GT(grasp_pose_point_distance(g, pose_at({0, 0, 0}, 0.05), spec), 0.0);
  EXPECT_GT(grasp_pose_point_distance(g, pose_at({0, 0, 0}, 0.04, oracle::axis_angle({0, 0, 1}, 1e-3)), spec),
            0.0);
}

TEST(GraspSetLoss, IdenticalSetsGiveZero) {
  std::mt19937_64 gen(13);
  std::vector<GraspPose> gts;
  std::vector<WeightedPrediction> preds;
  for (int i = 0; i < 5; ++i) {
    gts.push_back(oracle::random_grasp(gen));
    preds.push_back({gts.back(), true});
  }
  EXPECT_EQ(grasp_set_loss(preds, gts, GripperSpec{}), 0.0);
}

TEST(GraspSetLoss, TranslatedPrediction) {
  const GraspPose gt = pose_at({0.2, 0.1, 0});
  const std::vector<WeightedPrediction> preds{{pose_at({0.21, 0.1, 0}), true}};
  EXPECT_NEAR(grasp_set_loss(preds, std::vector<GraspPose>{gt}, GripperSpec{}), 0.01, 1e-12);
}

TEST(GraspSetLoss, PicksNearerGroundTruth) {
  const std::vector<GraspPose> gts{pose_at({0.05, 0, 0}), pose_at({0, 0.02, 0})};
  const std::vector<WeightedPrediction> preds{{pose_at({0, 0, 0}), true}};
  EXPECT_NEAR(grasp_set_loss(preds, gts, GripperSpec{}), 0.02, 1e-12);
}

TEST(GraspSetLoss, UnweightedTermsCountInDenominatorOnly) {
  const std::vector<GraspPose> gts{pose_at({0, 0, 0})};
  const std::vector<WeightedPrediction> preds{{pose_at({0.01, 0, 0}), true}, {pose_at({0.5, 0, 0}), false}};
  EXPECT_NEAR(grasp_set_loss(preds, gts, GripperSpec{}), 0.005, 1e-12);
}

TEST(GraspSetLoss, Errors) {
  const std::vector<WeightedPrediction> none;
  const std::vector<GraspPose> gts{pose_at({0, 0, 0})};
  EXPECT_TGF_ERROR(grasp_set_loss(none, gts, GripperSpec{}), ErrorCode::EmptyInput);
  const std::vector<WeightedPrediction> weighted{{pose_at({0, 0, 0}), true}};
  EXPECT_TGF_ERROR(grasp_set_loss(weighted, std::vector<GraspPose>{}, GripperSpec{}),
                   ErrorCode::EmptyGroundTruth);
  const std::vector<WeightedPrediction> unweighted{{pose_at({0, 0, 0}), false}};
  EXPECT_EQ(grasp_set_loss(unweighted, std::vector<GraspPose>{}, GripperSpec{}), 0.0);
}

TEST(GraspSetLoss, MatchesBruteForce) {
  std::mt19937_64 gen(14);
  std::uniform_int_distribution<int> size(1, 10), coin(0, 1);
  const GripperSpec spec;
  for (int i = 0; i < 1000; ++i) {
    std::vector<GraspPose> gts;
    std::vector<WeightedPrediction> preds;
    for (int k = size(gen); k > 0; --k) gts.push_back(oracle::random_grasp(gen));
    for (int k = size(gen); k > 0; --k) preds.push_back({oracle::random_grasp(gen), coin(gen) == 1});
    ASSERT_EQ(grasp_set_loss(preds, gts, spec), brute_force_set_loss(preds, gts, spec));
  }
}

TEST(GraspSetLoss, MonotoneWhenGroundTruthRecedes) {
  std::mt19937_64 gen(15);
  const GripperSpec spec;
  for (int i = 0; i < 200; ++i) {
    std::vector<GraspPose> gts;
    std::vector<WeightedPrediction> preds;
    for (int k = 0; k < 4; ++k) {
      gts.push_back(oracle::random_grasp(gen, 0.05));
      preds.push_back({oracle::random_grasp(gen, 0.05), true});
    }
    // Push every ground truth radially away from the prediction cloud by a
    // translation larger than the cloud, so every pairwise distance grows.
    std::vector<GraspPose> far = gts;
    for (auto& g : far) g.translation += 1.0 * g.translation.normalized() + Vec3(2.0, 0, 0);
    double before = grasp_set_loss(preds, gts, spec);
    double after = grasp_set_loss(preds, far, spec);
    ASSERT_GE(after, before);
  }
}
