#include <gtest/gtest.h>

#include <cmath>

#include "cvb/covisibility.hpp"
#include "cvb/error.hpp"
#include "cvb/synth.hpp"
#include "oracles.hpp"

namespace cvb {
namespace {

const CameraIntrinsics kCam{300, 300, 160, 120, 320, 240};

synth::Plane wall_at(double z) {
  synth::Plane p;
  p.point = Vec3(0, 0, z);
  p.normal = Vec3(0, 0, -1);
  return p;
}

DepthMap constant_depth(double z) {
  DepthMap d(kCam.width, kCam.height);
  for (double& v : d.data()) v = z;
  return d;
}

ViewInput view_of(const synth::AnalyticScene& scene, const synth::Camera& cam) {
  const auto r = synth::render(scene, cam);
  return {cam.intrinsics, cam.pose, r.depth, r.normals};
}

ViewInput view_of(const synth::AnalyticScene& scene, const RigidPose& pose) {
  return view_of(scene, synth::Camera{kCam, pose});
}

TEST(WarpDepth, IdentityReproducesDepth) {
  const synth::AnalyticScene scene{{wall_at(9), synth::Sphere{Vec3(0.5, 0, 6), 1.0}}};
  const DepthMap d = synth::render(scene, {kCam, RigidPose{}}).depth;
  const WarpResult w = warp_depth(d, d, kCam, kCam, RelativePose{});
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) {
      ASSERT_EQ(w.flags.at(x, y), WarpFlag::Ok);
      EXPECT_NEAR(w.predicted.at(x, y), d.at(x, y), 1e-6);
    }
}

TEST(WarpDepth, ForwardMotionOnPlane) {
  RelativePose rel;
  rel.translation = Vec3(0, 0, 1);
  const WarpResult w = warp_depth(constant_depth(5), constant_depth(4), kCam, kCam, rel);
  std::size_t ok = 0;
  for (int y = 0; y < kCam.height; ++y)
    for (int x = 0; x < kCam.width; ++x) {
      if (w.flags.at(x, y) != WarpFlag::Ok) {
        EXPECT_EQ(w.flags.at(x, y), WarpFlag::OutOfView);
        continue;
      }
      ++ok;
      EXPECT_NEAR(w.predicted.at(x, y), 5.0, 1e-6);
    }
  // Camera 2 sees 4/5 of the field, so the central 0.8 x 0.8 region maps in.
  EXPECT_GT(ok, static_cast<std::size_t>(0.6 * kCam.width * kCam.height));
}

TEST(WarpDepth, OppositeFacingIsOutOfView) {
  RelativePose rel;
  rel.rotation = testing::axis_angle(Vec3::UnitY(), 180.0);
  const WarpResult w = warp_depth(constant_depth(5), constant_depth(5), kCam, kCam, rel);
  for (auto f : w.flags.data()) EXPECT_EQ(f, WarpFlag::OutOfView);
}

TEST(WarpDepth, FlagsInvalidSourceAndLookup) {
  DepthMap d1 = constant_depth(5);
  d1.at(3, 3) = std::nan("");
  const DepthMap d2(kCam.width, kCam.height);
  const WarpResult w = warp_depth(d1, d2, kCam, kCam, RelativePose{});
  EXPECT_EQ(w.flags.at(3, 3), WarpFlag::SourceInvalid);
  EXPECT_EQ(w.flags.at(4, 3), WarpFlag::LookupInvalid);
  EXPECT_THROW(warp_depth(DepthMap(10, 10), d2, kCam, kCam, RelativePose{}), Error);
}

TEST(Classify, ThresholdArithmetic) {
  const DepthMap d1 = constant_depth(10);
  WarpResult w{DepthMap(kCam.width, kCam.height),
               Raster<WarpFlag>(kCam.width, kCam.height, WarpFlag::Ok),
               Raster<Vec2>(kCam.width, kCam.height, Vec2::Zero())};
  NormalMap n(kCam.width, kCam.height);
  for (auto& v : n.data()) v = Vec3(0, 0, -1);
  for (double& v : w.predicted.data()) v = 10.6;
  EXPECT_EQ(classify(d1, w, n, {}, {}).count(CovisLabel::Occluded), d1.size());
  for (double& v : w.predicted.data()) v = 10.4;
  EXPECT_EQ(classify(d1, w, n, {}, {}).count(CovisLabel::CoVisible), d1.size());
  for (double& v : w.predicted.data()) v = 9.4;
  EXPECT_EQ(classify(d1, w, n, {}, {}).count(CovisLabel::Occluded), d1.size());
}

TEST(Classify, NormalFacingTestUsesOpticalAxis) {
  const DepthMap d1 = constant_depth(10);
  WarpResult w{d1, Raster<WarpFlag>(kCam.width, kCam.height, WarpFlag::Ok),
               Raster<Vec2>(kCam.width, kCam.height, Vec2::Zero())};
  NormalMap n(kCam.width, kCam.height);
  // Normal at 80 deg from camera 2's axis: rejected at eps 5 (limit 85 deg),
  // accepted at eps 15 (limit 75 deg).
  const Vec3 tilted(std::sin(deg2rad(80)), 0, std::cos(deg2rad(80)));
  for (auto& v : n.data()) v = tilted;
  EXPECT_EQ(classify(d1, w, n, {}, {0.05, 5.0}).count(CovisLabel::Occluded), d1.size());
  EXPECT_EQ(classify(d1, w, n, {}, {0.05, 15.0}).count(CovisLabel::CoVisible), d1.size());
  // Invalid normals skip the facing test.
  EXPECT_EQ(classify(d1, w, NormalMap(kCam.width, kCam.height), {}, {0.05, 5.0})
                .count(CovisLabel::CoVisible),
            d1.size());
}

TEST(Classify, ConfigValidation) {
  EXPECT_THROW((CovisParams{0.0, 5.0}.validate()), Error);
  EXPECT_THROW((CovisParams{1.0, 5.0}.validate()), Error);
  EXPECT_THROW((CovisParams{0.05, -1.0}.validate()), Error);
  EXPECT_THROW((CovisParams{0.05, 90.0}.validate()), Error);
  EXPECT_NO_THROW((CovisParams{0.05, 0.0}.validate()));
}

TEST(CovisibilityPair, IdentityIsAllCoVisible) {
  const synth::AnalyticScene scene{{wall_at(12), synth::Sphere{Vec3(-1, 0, 7), 1.0},
                                    synth::AxisBox{Vec3(1, -0.5, 6), Vec3(2.5, 1.5, 7.5)}}};
  const ViewInput v = view_of(scene, RigidPose{});
  const CovisPair c = covisibility_pair(v, v, {});
  EXPECT_EQ(c.forward.count(CovisLabel::CoVisible), c.forward.size());
  EXPECT_EQ(c.backward.count(CovisLabel::CoVisible), c.backward.size());
}

TEST(CovisibilityPair, SwapSymmetryIsExact) {
  for (const auto& f : synth::default_suite()) {
    const ViewInput a = view_of(f.scene, f.cam_a);
    const ViewInput b = view_of(f.scene, f.cam_b);
    const CovisPair ab = covisibility_pair(a, b, {});
    const CovisPair ba = covisibility_pair(b, a, {});
    EXPECT_EQ(ab.forward, ba.backward) << f.name;
    EXPECT_EQ(ab.backward, ba.forward) << f.name;
  }
}

TEST(CovisibilityPair, TwoPlaneOcclusionMatchesOracle) {
  // Near plane in front of the left half of view 2 only.
  synth::Plane near = wall_at(4);
  near.half_u = 1.0;
  near.half_v = 10.0;
  near.point = Vec3(-0.2, 0, 4);
  const synth::AnalyticScene scene{{wall_at(10), near}};
  const synth::Camera cam1{kCam, synth::look_at(Vec3(2.0, 0, 0), Vec3(0, 0, 10))};
  const synth::Camera cam2{kCam, synth::look_at(Vec3(0, 0, 0), Vec3(0, 0, 10))};
  const ViewInput a = view_of(scene, cam1.pose);
  const ViewInput b = view_of(scene, cam2.pose);
  const CovisPair c = covisibility_pair(a, b, {});
  const auto oracle = synth::oracle_covis(scene, cam1, cam2);
  EXPECT_GT(oracle.count(CovisLabel::Occluded), 2000u);
  EXPECT_GE(testing::agreement_outside_band(c.forward, oracle,
                                            testing::discontinuity_band(a.depth)),
            0.99);
}

TEST(CovisibilityPair, StreetSceneMatchesOracleBothWays) {
  for (const auto& f : synth::default_suite()) {
    if (f.name.rfind("street", 0) != 0) continue;
    const ViewInput a = view_of(f.scene, f.cam_a);
    const ViewInput b = view_of(f.scene, f.cam_b);
    const CovisPair c = covisibility_pair(a, b, {});
    EXPECT_GE(testing::agreement_outside_band(c.forward,
                                              synth::oracle_covis(f.scene, f.cam_a, f.cam_b),
                                              testing::discontinuity_band(a.depth)),
              0.99)
        << f.name;
    EXPECT_GE(testing::agreement_outside_band(c.backward,
                                              synth::oracle_covis(f.scene, f.cam_b, f.cam_a),
                                              testing::discontinuity_band(b.depth)),
              0.99)
        << f.name;
  }
}

class SuitePair : public ::testing::TestWithParam<int> {};

TEST_P(SuitePair, TauMonotonicity) {
  const auto f = synth::default_suite().at(GetParam());
  const ViewInput a = view_of(f.scene, f.cam_a);
  const ViewInput b = view_of(f.scene, f.cam_b);
  const auto tight = covisibility_pair(a, b, {0.02, 5.0}).forward;
  const auto loose = covisibility_pair(a, b, {0.10, 5.0}).forward;
  for (std::size_t i = 0; i < tight.size(); ++i) {
    if (tight.data()[i] == CovisLabel::CoVisible) {
      EXPECT_EQ(loose.data()[i], CovisLabel::CoVisible);
    }
  }
}

TEST_P(SuitePair, NormalRejectionShrinksAsEpsilonGrows) {
  const auto f = synth::default_suite().at(GetParam());
  const ViewInput a = view_of(f.scene, f.cam_a);
  const ViewInput b = view_of(f.scene, f.cam_b);
  // tau near 1 disables the depth test, so Occluded means rejected by normals.
  const auto small = covisibility_pair(a, b, {0.99, 2.0}).forward;
  const auto large = covisibility_pair(a, b, {0.99, 20.0}).forward;
  std::size_t small_rejected = 0, large_rejected = 0;
  for (std::size_t i = 0; i < small.size(); ++i) {
    small_rejected += small.data()[i] == CovisLabel::Occluded;
    large_rejected += large.data()[i] == CovisLabel::Occluded;
    if (large.data()[i] == CovisLabel::Occluded) {
      EXPECT_EQ(small.data()[i], CovisLabel::Occluded);
    }
  }
  EXPECT_LE(large_rejected, small_rejected);
}

// True if the 2x2 bilinear footprint around p lies on one smooth surface.
bool single_surface(const DepthMap& depth, const NormalMap& normals,
                    const Raster<std::uint8_t>& band, const Vec2& p) {
  const int x0 = static_cast<int>(std::floor(p.x()));
  const int y0 = static_cast<int>(std::floor(p.y()));
  if (x0 < 0 || y0 < 0 || x0 + 1 >= depth.width() || y0 + 1 >= depth.height()) return false;
  const Vec3 n0 = normals.at(x0, y0);
  for (int dy = 0; dy <= 1; ++dy)
    for (int dx = 0; dx <= 1; ++dx) {
      const int x = x0 + dx, y = y0 + dy;
      if (band.at(x, y) || !depth.valid(x, y) || !normals.valid(x, y)) return false;
      if (n0.dot(normals.at(x, y)) < std::cos(deg2rad(10.0))) return false;
    }
  return true;
}

// Pixels hidden by an occluder less than tau in front are co-visible by rule
// and do not round-trip, and lookups straddling a crease or a sub-tau step
// interpolate across surfaces. Both are excluded.
TEST_P(SuitePair, RoundTripWithinOnePixel) {
  const auto f = synth::default_suite().at(GetParam());
  const ViewInput a = view_of(f.scene, f.cam_a);
  const ViewInput b = view_of(f.scene, f.cam_b);
  const RelativePose rel = relative_pose(a.pose, b.pose);
  const WarpResult w = warp_depth(a.depth, b.depth, a.intrinsics, b.intrinsics, rel);
  const auto labels = classify(a.depth, w, a.normals, rel, {});
  const auto truth = synth::oracle_covis(f.scene, f.cam_a, f.cam_b);
  const auto band = testing::discontinuity_band(b.depth);
  for (int y = 0; y < a.depth.height(); ++y)
    for (int x = 0; x < a.depth.width(); ++x) {
      if (labels.at(x, y) != CovisLabel::CoVisible) continue;
      if (truth.at(x, y) != CovisLabel::CoVisible) continue;
      const Vec2 p12 = w.forward.at(x, y);
      if (!single_surface(b.depth, b.normals, band, p12)) continue;
      const auto d2 = sample_bilinear(b.depth, p12);
      ASSERT_TRUE(d2);
      const Vec2 back = project(rel.apply(backproject(p12, *d2, b.intrinsics)), a.intrinsics);
      EXPECT_LE((back - Vec2(x, y)).norm(), 1.0) << f.name << " " << x << "," << y;
    }
}

INSTANTIATE_TEST_SUITE_P(Fixtures, SuitePair, ::testing::Range(0, 12));

TEST(CovisibilityPair, ZeroBaselineHasNoDepthOcclusion) {
  const synth::AnalyticScene scene{{wall_at(8)}};
  const RigidPose a{};
  const RigidPose b{testing::axis_angle(Vec3::UnitY(), 6.0), Vec3::Zero()};
  const ViewInput va = view_of(scene, a);
  const ViewInput vb = view_of(scene, b);
  const RelativePose rel = relative_pose(a, b);
  const WarpResult w = warp_depth(va.depth, vb.depth, kCam, kCam, rel);
  for (int y = 0; y < kCam.height; ++y)
    for (int x = 0; x < kCam.width; ++x) {
      if (w.flags.at(x, y) != WarpFlag::Ok) continue;
      EXPECT_LE(std::abs(w.predicted.at(x, y) - va.depth.at(x, y)) / va.depth.at(x, y), 1e-4);
    }
  // No normals: only the depth test can produce Occluded.
  const auto labels =
      classify(va.depth, w, NormalMap(kCam.width, kCam.height), rel, {});
  EXPECT_EQ(labels.count(CovisLabel::Occluded), 0u);
}

TEST(CovisibilityPair, RelativeVariantMatchesAbsolute) {
  const auto f = synth::default_suite().at(2);
  const ViewInput a = view_of(f.scene, f.cam_a);
  const ViewInput b = view_of(f.scene, f.cam_b);
  const CovisPair abs = covisibility_pair(a, b, {});
  const CovisPair rel = covisibility_pair(a.intrinsics, a.depth, a.normals, b.intrinsics, b.depth, b.normals,
                                          relative_pose(a.pose, b.pose), {});
  EXPECT_EQ(abs.forward, rel.forward);
  std::size_t diff = 0;
  for (std::size_t i = 0; i < abs.backward.size(); ++i)
    diff += abs.backward.data()[i] != rel.backward.data()[i];
  EXPECT_LE(diff, abs.backward.size() / 1000);
}

}  // namespace
}  // namespace cvb
