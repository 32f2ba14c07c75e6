#pragma once

#include <cstdint>

#include "cvb/geometry.hpp"
#include "cvb/raster.hpp"

namespace cvb {

struct CovisParams {
  double tau = 0.05;          // relative depth tolerance
  double epsilon_deg = 5.0;   // normal-facing margin

  void validate() const;
};

enum class WarpFlag : std::uint8_t {
  Ok = 0,
  SourceInvalid = 1,   // D1 invalid at p1
  OutOfView = 2,       // outside image 2 or behind camera 2
  LookupInvalid = 3,   // every bilinear neighbour in D2 is invalid
};

struct WarpResult {
  DepthMap predicted;              // D1 predicted from D2
  Raster<WarpFlag> flags;
  Raster<Vec2> forward;            // p_{1->2}; NaN where not computed
};

/// Predicts D1 by warping D2 through the relative pose (cam2 -> cam1).
WarpResult warp_depth(const DepthMap& depth1, const DepthMap& depth2,
                      const CameraIntrinsics& k1, const CameraIntrinsics& k2,
                      const RelativePose& rel);

/// Relative depth test plus the normal-facing test against camera 2's
/// optical axis. A pixel without a valid normal skips the facing test.
CovisibilityMap classify(const DepthMap& depth1, const WarpResult& warp,
                         const NormalMap& normals1, const RelativePose& rel,
                         const CovisParams& params);

/// One image with everything needed for co-visibility.
struct ViewInput {
  CameraIntrinsics intrinsics;
  RigidPose pose;
  DepthMap depth;
  NormalMap normals;
};

struct CovisPair {
  CovisibilityMap forward;   // C_{1->2}, labels pixels of image 1
  CovisibilityMap backward;  // C_{2->1}, labels pixels of image 2
};

/// Both directions, each with its relative pose derived from the absolute
/// poses so that swapping the views swaps the outputs bit for bit.
CovisPair covisibility_pair(const ViewInput& view1, const ViewInput& view2,
                            const CovisParams& params);

/// Variant for callers holding only the relative pose; direction 2->1 uses
/// its inverse.
CovisPair covisibility_pair(const CameraIntrinsics& k1, const DepthMap& depth1,
                            const NormalMap& normals1,
                            const CameraIntrinsics& k2, const DepthMap& depth2,
                            const NormalMap& normals2, const RelativePose& rel,
                            const CovisParams& params);

}  // namespace cvb
