#include <gtest/gtest.h>

#include <random>

#include "cvb/error.hpp"
#include "cvb/pose_eval.hpp"
#include "oracles.hpp"

namespace cvb {
namespace {

MatchSet matches_of(const testing::PosePairCase& c) {
  return {"pair", c.pixels1, c.pixels2, {}};
}

double direction_error_deg(const Vec3& a, const Vec3& b) {
  return rad2deg(angle_between(a, b));
}

Mat3 skew(const Vec3& t) {
  Mat3 s;
  s << 0, -t.z(), t.y(), t.z(), 0, -t.x(), -t.y(), t.x(), 0;
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Domain;
}

TEST(Essential, NoiselessMatchesRecoverPose) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto c = testing::make_pose_pair(100, seed);
    const auto m = matches_of(c);
    EssentialOptions opt;
    opt.seed = seed;
    const auto e = estimate_essential(m, c.k, c.k, opt);
    EXPECT_EQ(e.inlier_count, 100u);
    const Mat3 f = fundamental_from_essential(e.essential, c.k, c.k);
    for (std::size_t i = 0; i < m.size(); ++i) {
      EXPECT_LE(sampson_distance(f, m.points_a[i], m.points_b[i]), opt.threshold_px);
    }
    const auto pose = decompose_essential(e.essential, m, e.inliers, c.k, c.k);
    const PoseErrors err = pose_errors({pose.rotation, Vec3::Zero(), true, {}},
                                       {c.truth.rotation, Vec3::Zero()});
    EXPECT_LT(err.rotation_deg, 0.1);
    EXPECT_LT(direction_error_deg(pose.translation, c.truth.translation), 0.5);
    EXPECT_NEAR(pose.translation.norm(), 1.0, 1e-12);
  }
}

TEST(Essential, DeterministicUnderSeed) {
  auto c = testing::make_pose_pair(150, 3);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1.0);
  for (auto& p : c.pixels2) p += Vec2(n(rng), n(rng));
  EssentialOptions opt;
  opt.seed = 99;
  const auto a = estimate_essential(matches_of(c), c.k, c.k, opt);
  const auto b = estimate_essential(matches_of(c), c.k, c.k, opt);
  EXPECT_EQ(a.inliers, b.inliers);
  EXPECT_EQ(a.essential, b.essential);
  const Mat3 f = fundamental_from_essential(a.essential, c.k, c.k);
  for (std::size_t i = 0; i < c.pixels1.size(); ++i) {
    if (a.inliers[i]) EXPECT_LE(sampson_distance(f, c.pixels1[i], c.pixels2[i]), opt.threshold_px);
  }
}

TEST(Essential, TooFewMatches) {
  const auto c = testing::make_pose_pair(7, 1);
  EXPECT_EQ(code_of([&] { estimate_essential(matches_of(c), c.k, c.k, {}); }),
            ErrorCode::InsufficientMatches);
}

TEST(Essential, PureRotationIsDegenerate) {
  auto c = testing::make_pose_pair(100, 4);
  c.truth.translation = Vec3::Zero();
  const RelativePose to2 = c.truth.inverse();
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const Vec3 x2 = to2.apply(c.points[i]);
    const Vec3 h = c.k.matrix() * (x2 / x2.z());
    c.pixels2[i] = Vec2(h.x(), h.y());
  }
  EXPECT_EQ(code_of([&] { estimate_essential(matches_of(c), c.k, c.k, {}); }),
            ErrorCode::DegenerateGeometry);
  const auto rot = estimate_rotation_only(matches_of(c), c.k, c.k, {});
  EXPECT_LT((rot.rotation - c.truth.rotation).norm(), 1e-9);
}

TEST(EightPoint, ProjectsOntoEssentialManifold) {
  const auto c = testing::make_pose_pair(30, 8);
  std::vector<Vec2> x1, x2;
  const Mat3 k_inv = c.k.inverse_matrix();
  for (std::size_t i = 0; i < c.pixels1.size(); ++i) {
    x1.push_back((k_inv * c.pixels1[i].homogeneous()).hnormalized());
    x2.push_back((k_inv * c.pixels2[i].homogeneous()).hnormalized());
  }
  const Mat3 e = eight_point_essential(x1, x2);
  Eigen::JacobiSVD<Mat3> svd(e);
  const Vec3 s = svd.singularValues();
  EXPECT_NEAR(s(0), s(1), 1e-9 * s(0));
  EXPECT_NEAR(s(2), 0.0, 1e-9 * s(0));
  for (std::size_t i = 0; i < x1.size(); ++i) {
    EXPECT_NEAR(x1[i].homogeneous().dot(e * x2[i].homogeneous()), 0.0, 1e-9);
  }
}

TEST(Decompose, ConstructedEssentialIsExact) {
  const auto c = testing::make_pose_pair(50, 12);
  const Mat3 e = skew(c.truth.translation) * c.truth.rotation;
  const std::vector<bool> all(50, true);
  const auto pose = decompose_essential(e, matches_of(c), all, c.k, c.k);
  EXPECT_LT((pose.rotation - c.truth.rotation).norm(), 1e-6);
  EXPECT_LT((pose.translation - c.truth.translation.normalized()).norm(), 1e-6);
  EXPECT_FALSE(pose.metric);
}

TEST(Decompose, IdentityRotationSidewaysTranslation) {
  auto c = testing::make_pose_pair(40, 13);
  c.truth.rotation = Mat3::Identity();
  c.truth.translation = Vec3(1, 0, 0);
  const RelativePose to2 = c.truth.inverse();
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const Vec3 h = c.k.matrix() * (to2.apply(c.points[i]) / to2.apply(c.points[i]).z());
    c.pixels2[i] = Vec2(h.x(), h.y());
  }
  const auto est = estimate_essential(matches_of(c), c.k, c.k, {});
  const auto pose = decompose_essential(est.essential, matches_of(c), est.inliers, c.k, c.k);
  EXPECT_LT((pose.rotation - Mat3::Identity()).norm(), 1e-6);
  EXPECT_LT((pose.translation - Vec3(1, 0, 0)).norm(), 1e-6);
}

TEST(Decompose, PointOnBaselineIsAmbiguous) {
  const CameraIntrinsics k{500, 500, 320, 240, 640, 480};
  // Camera 2 straight ahead: the principal point of both images lies on the
  // baseline, so every candidate triangulates it the same way.
  const Mat3 e = skew(Vec3(0, 0, 1));
  MatchSet m{"p", {Vec2(320, 240)}, {Vec2(320, 240)}, {}};
  EXPECT_EQ(code_of([&] { decompose_essential(e, m, {true}, k, k); }),
            ErrorCode::AmbiguousDecomposition);
}

TEST(RecoverScale, ExactDepthsGiveExactScale) {
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    const auto c = testing::make_pose_pair(100, seed);
    PoseEstimate unit{c.truth.rotation, c.truth.translation.normalized(), false,
                      std::vector<bool>(100, true)};
    const auto metric = recover_scale(unit, matches_of(c), testing::sparse_depth(c), c.k, c.k);
    EXPECT_TRUE(metric.metric);
    EXPECT_NEAR(metric.translation.norm(), c.truth.translation.norm(),
                1e-6 * c.truth.translation.norm());
  }
}

TEST(RecoverScale, RobustToDepthNoise) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (std::uint64_t seed = 40; seed < 50; ++seed) {
    const auto c = testing::make_pose_pair(100, seed);
    DepthMap d = testing::sparse_depth(c);
    for (double& v : d.data())
      if (DepthMap::valid_value(v)) v *= 1.0 + u(rng);
    PoseEstimate unit{c.truth.rotation, c.truth.translation.normalized(), false, {}};
    const auto metric = recover_scale(unit, matches_of(c), d, c.k, c.k);
    EXPECT_NEAR(metric.translation.norm(), c.truth.translation.norm(),
                0.05 * c.truth.translation.norm());
  }
}

TEST(RecoverScale, NoValidDepthIsUnrecoverable) {
  const auto c = testing::make_pose_pair(20, 2);
  PoseEstimate unit{c.truth.rotation, c.truth.translation.normalized(), false, {}};
  EXPECT_EQ(code_of([&] {
              recover_scale(unit, matches_of(c), DepthMap(c.k.width, c.k.height), c.k, c.k);
            }),
            ErrorCode::ScaleUnrecoverable);
}

TEST(Triangulate, ParallelRaysAreEmpty) {
  EXPECT_FALSE(triangulate_depths(Vec3(0, 0, 1), Vec3(0, 0, 1), Mat3::Identity(), Vec3::Zero()));
  const auto d = triangulate_depths(Vec3(0, 0, 1), Vec3(-0.25, 0, 1), Mat3::Identity(),
                                    Vec3(1, 0, 0));
  ASSERT_TRUE(d);
  EXPECT_NEAR(d->x(), 4.0, 1e-12);
  EXPECT_NEAR(d->y(), 4.0, 1e-12);
}

TEST(PoseErrors, Definitions) {
  const RelativePose gt{testing::axis_angle(Vec3(1, 2, 3), 17.0), Vec3(1, -2, 0.5)};
  const PoseEstimate same{gt.rotation, gt.translation, true, {}};
  const auto zero = pose_errors(same, gt);
  EXPECT_NEAR(zero.rotation_deg, 0.0, 1e-6);
  EXPECT_EQ(zero.translation_m, 0.0);

  for (const Vec3& axis : {Vec3(1, 0, 0), Vec3(0, 1, 1), Vec3(-2, 1, 5)}) {
    const PoseEstimate turned{testing::axis_angle(axis, 30.0) * gt.rotation, gt.translation, true, {}};
    EXPECT_NEAR(pose_errors(turned, gt).rotation_deg, 30.0, 1e-9);
  }
  const PoseEstimate shifted{gt.rotation, gt.translation + Vec3(0, 0, 1.5), true, {}};
  EXPECT_NEAR(pose_errors(shifted, gt).translation_m, 1.5, 1e-12);
}

TEST(PoseErrors, RotationErrorIsSymmetricAndBounded) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    const Mat3 a = testing::random_rotation(rng);
    const Mat3 b = testing::random_rotation(rng);
    const double ab = pose_errors({a, Vec3::Zero(), true, {}}, {b, Vec3::Zero()}).rotation_deg;
    const double ba = pose_errors({b, Vec3::Zero(), true, {}}, {a, Vec3::Zero()}).rotation_deg;
    EXPECT_NEAR(ab, ba, 1e-9);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 180.0);
  }
  const Mat3 flip = testing::axis_angle(Vec3(0, 1, 0), 180.0);
  EXPECT_NEAR(pose_errors({flip, Vec3::Zero(), true, {}}, {Mat3::Identity(), Vec3::Zero()})
                  .rotation_deg,
              180.0, 1e-6);
}

TEST(Judge, StrictThresholds) {
  EXPECT_TRUE(judge("a", PoseErrors{4.9, 1.9}).success);
  EXPECT_FALSE(judge("a", PoseErrors{5.1, 1.0}).success);
  EXPECT_FALSE(judge("a", PoseErrors{1.0, 2.5}).success);
  EXPECT_FALSE(judge("a", PoseErrors{5.0, 1.0}).success);
  EXPECT_FALSE(judge("a", PoseErrors{1.0, 2.0}).success);
  const auto upstream = judge("b", std::nullopt, FailureReason::NoModelFound);
  EXPECT_FALSE(upstream.success);
  EXPECT_EQ(upstream.failure, FailureReason::NoModelFound);
  EXPECT_FALSE(upstream.rotation_err_deg);
}

TEST(FailureReason, StringRoundTrip) {
  for (auto r : {FailureReason::None, FailureReason::InsufficientMatches,
                 FailureReason::NoModelFound, FailureReason::DegenerateGeometry,
                 FailureReason::AmbiguousDecomposition, FailureReason::ScaleUnrecoverable,
                 FailureReason::MissingPair, FailureReason::MissingInput}) {
    EXPECT_EQ(failure_reason_from_string(to_string(r)), r);
  }
  EXPECT_FALSE(failure_reason_from_string("bogus"));
}

TEST(EvaluateMatches, OracleMatchesSucceed) {
  for (std::uint64_t seed = 60; seed < 70; ++seed) {
    const auto c = testing::make_pose_pair(100, seed);
    PairEvalOptions opt;
    opt.essential.seed = seed;
    const auto rec =
        evaluate_matches(matches_of(c), c.k, c.k, testing::sparse_depth(c), c.truth, opt);
    EXPECT_TRUE(rec.success) << seed;
    EXPECT_EQ(rec.source, PoseSource::Essential);
    EXPECT_LT(*rec.rotation_err_deg, 1e-6);
    EXPECT_LT(*rec.translation_err_m, 1e-6);
  }
}

TEST(EvaluateMatches, FailuresBecomeReasons) {
  const auto c = testing::make_pose_pair(5, 1);
  const auto rec = evaluate_matches(matches_of(c), c.k, c.k, testing::sparse_depth(c), c.truth, {});
  EXPECT_FALSE(rec.success);
  EXPECT_EQ(rec.failure, FailureReason::InsufficientMatches);

  auto rot = testing::make_pose_pair(60, 9);
  rot.truth.translation = Vec3::Zero();
  const RelativePose to2 = rot.truth.inverse();
  for (std::size_t i = 0; i < rot.points.size(); ++i) {
    const Vec3 x2 = to2.apply(rot.points[i]);
    const Vec3 h = rot.k.matrix() * (x2 / x2.z());
    rot.pixels2[i] = Vec2(h.x(), h.y());
  }
  PairEvalOptions strict;
  strict.rotation_fallback = false;
  EXPECT_EQ(evaluate_matches(matches_of(rot), rot.k, rot.k, testing::sparse_depth(rot),
                             rot.truth, strict)
                .failure,
            FailureReason::DegenerateGeometry);
  const auto fallback = evaluate_matches(matches_of(rot), rot.k, rot.k,
                                         testing::sparse_depth(rot), rot.truth, {});
  EXPECT_TRUE(fallback.success);
  EXPECT_EQ(fallback.source, PoseSource::RotationOnly);
}

TEST(EvaluatePose, ScoresExternalPose) {
  const RelativePose gt{testing::axis_angle(Vec3(0, 1, 0), 10.0), Vec3(2, 0, 1)};
  const RelativePose pred{testing::axis_angle(Vec3(0, 1, 0), 12.0), Vec3(2, 0, 2.5)};
  const auto rec = evaluate_pose("x", pred, gt);
  EXPECT_TRUE(rec.success);
  EXPECT_NEAR(*rec.rotation_err_deg, 2.0, 1e-9);
  EXPECT_NEAR(*rec.translation_err_m, 1.5, 1e-12);
  EXPECT_EQ(rec.source, PoseSource::External);
}

}  // namespace
}  // namespace cvb
