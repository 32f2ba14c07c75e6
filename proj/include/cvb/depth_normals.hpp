#pragma once

#include "cvb/geometry.hpp"
#include "cvb/raster.hpp"

namespace cvb {

constexpr int kDefaultNormalWindow = 5;

/// Per-pixel least-squares plane fit over the backprojected window x window
/// neighbourhood. Normals face the camera; pixels with fewer than 4 valid
/// neighbours or a degenerate fit are left invalid.
NormalMap normals_from_depth(const DepthMap& depth, const CameraIntrinsics& k,
                             int window = kDefaultNormalWindow);

struct AffineDepthAlignment {
  double scale = 1.0;
  double shift = 0.0;
  DepthMap aligned;
};

/// Robust (Tukey IRLS) fit of ref ~ scale * src + shift over jointly valid
/// pixels.
AffineDepthAlignment align_depth_affine(const DepthMap& src, const DepthMap& ref,
                                        int robust_iters = 10);

}  // namespace cvb
