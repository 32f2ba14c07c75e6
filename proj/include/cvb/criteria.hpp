#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "cvb/covisibility.hpp"

namespace cvb {

/// Difficulty triple of an image pair.
struct PairCriteria {
  double omega = 0.0;      // overlap fraction in [0, 1]
  double delta = 1.0;      // scale ratio >= 1
  double theta_deg = 0.0;  // viewpoint angle in [0, 180]
};

/// Fraction of co-visible pixels over both images.
double overlap(const CovisibilityMap& c12, const CovisibilityMap& c21);

/// Inputs for one direction i -> j of the scale / angle statistics.
/// `translation` is camera j's center in the camera-i frame (t_ij).
struct DirectionInput {
  const DepthMap& depth;
  const CovisibilityMap& covis;
  const CameraIntrinsics& intrinsics;
  Vec3 translation;
};

/// Median over both directions of max(d_self/d_other, d_other/d_self), where
/// d_self and d_other are the distances from a co-visible point to its own and
/// to the other camera center. Throws EmptyCovisibility.
double scale_ratio(const DirectionInput& forward, const DirectionInput& backward);

/// Median angle in degrees between the two lines of sight of co-visible
/// points. Points coincident with the other camera center are skipped.
double viewpoint_angle_deg(const DirectionInput& forward,
                           const DirectionInput& backward);

/// Relative-pose form: rel maps camera-2 into camera-1 coordinates.
double scale_ratio(const DepthMap& depth1, const DepthMap& depth2,
                   const CovisibilityMap& c12, const CovisibilityMap& c21,
                   const CameraIntrinsics& k1, const CameraIntrinsics& k2,
                   const RelativePose& rel);
double viewpoint_angle_deg(const DepthMap& depth1, const DepthMap& depth2,
                           const CovisibilityMap& c12, const CovisibilityMap& c21,
                           const CameraIntrinsics& k1, const CameraIntrinsics& k2,
                           const RelativePose& rel);

/// Per-point terms, exposed for invariance checks.
double point_scale_ratio(const Vec3& point, const Vec3& other_center);
double point_sight_angle_deg(const Vec3& point, const Vec3& other_center);

struct CriteriaResult {
  std::optional<PairCriteria> criteria;  // empty when nothing is co-visible
  double omega = 0.0;
  std::size_t covis_ab = 0;
  std::size_t covis_ba = 0;
};

/// Criteria from precomputed co-visibility maps and absolute poses.
CriteriaResult criteria_from_maps(const ViewInput& view_a, const ViewInput& view_b,
                                  const CovisPair& covis);

/// Co-visibility in both directions followed by the three criteria.
CriteriaResult compute_criteria(const ViewInput& view_a, const ViewInput& view_b,
                                const CovisParams& params);

}  // namespace cvb
