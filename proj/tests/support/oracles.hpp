#pragma once

// Reference computations used by the tests. They are written independently of
// the library code paths they check: explicit matrix inverses instead of the
// closed-form pixel maps, unit-length rays instead of K^-1 rays, full sorts
// instead of selection.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "cvb/raster.hpp"
#include "cvb/synth.hpp"

namespace cvb::testing {

/// K^-1 through the adjugate of the full 3x3 matrix.
Mat3 explicit_inverse(const Mat3& m);

/// z-depth of the first surface seen through pixel (x, y), from a ray of unit
/// length intersected primitive by primitive. Empty on a miss.
std::optional<double> reference_depth(const synth::AnalyticScene& scene,
                                      const synth::Camera& camera, int x, int y);

struct ReferenceCriteria {
  double omega = 0.0;
  std::optional<double> delta;
  std::optional<double> theta_deg;
};

/// World points of every co-visible pixel in both views, distance ratio and
/// sight-line angle per point, lower median after a full sort.
ReferenceCriteria brute_force_criteria(const synth::Camera& cam1, const DepthMap& depth1,
                                       const CovisibilityMap& c12,
                                       const synth::Camera& cam2, const DepthMap& depth2,
                                       const CovisibilityMap& c21);

/// Pixels whose 8-neighbourhood holds a validity change or a relative depth
/// jump above 10%.
Raster<std::uint8_t> discontinuity_band(const DepthMap& depth);

/// Share of pixels outside the band where both maps carry the same label.
double agreement_outside_band(const CovisibilityMap& a, const CovisibilityMap& b,
                              const Raster<std::uint8_t>& band);

/// Uniformly distributed rotation (normalised Gaussian quaternion).
Mat3 random_rotation(std::mt19937_64& rng);

/// Rotation by angle_deg about a unit axis.
Mat3 axis_angle(const Vec3& axis, double angle_deg);

/// Ground-plane drive (dst, z = 0) and its image under the inverse of a known
/// similarity (src), with Gaussian noise on dst and a share of poses moved 5
/// to 15 m off in the ground plane.
struct TrajectoryCase {
  std::vector<Vec3> src;
  std::vector<Vec3> dst;
  std::vector<bool> clean;
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};
TrajectoryCase make_trajectory(std::size_t n, double outlier_share, double sigma,
                               std::uint64_t seed);

/// Random relative pose with points seen by both cameras: camera 1 at the
/// origin, camera 2 within a few meters and rotated up to 20 degrees.
struct PosePairCase {
  CameraIntrinsics k;
  RelativePose truth;                  // camera 2 -> camera 1
  std::vector<Vec3> points;            // camera-1 frame
  std::vector<Vec2> pixels1;
  std::vector<Vec2> pixels2;
};
PosePairCase make_pose_pair(std::size_t n_points, std::uint64_t seed);

/// Depth map of camera 1 holding each point's depth at its rounded pixel.
DepthMap sparse_depth(const PosePairCase& pair);

}  // namespace cvb::testing
