#include "cvb/covisibility.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cvb/error.hpp"

namespace cvb {

void CovisParams::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) {
    std::ostringstream why;
    why << "tau must lie in (0, 1), got " << tau;
    fail(ErrorCode::Config, why.str());
  }
  if (!(epsilon_deg >= 0.0 && epsilon_deg < 90.0)) {
    std::ostringstream why;
    why << "epsilon must lie in [0, 90) degrees, got " << epsilon_deg;
    fail(ErrorCode::Config, why.str());
  }
}

namespace {

void check_shape(const DepthMap& depth, const CameraIntrinsics& k,
                 const char* which) {
  if (!depth.same_shape(k.width, k.height)) {
    std::ostringstream why;
    why << which << " is " << depth.width() << "x" << depth.height()
        << " but its intrinsics are " << k.width << "x" << k.height;
    fail(ErrorCode::Config, why.str());
  }
}

}  // namespace

WarpResult warp_depth(const DepthMap& depth1, const DepthMap& depth2,
                      const CameraIntrinsics& k1, const CameraIntrinsics& k2,
                      const RelativePose& rel) {
  k1.validate();
  k2.validate();
  check_shape(depth1, k1, "depth map 1");
  check_shape(depth2, k2, "depth map 2");

  const int w = depth1.width();
  const int h = depth1.height();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  WarpResult out{DepthMap(w, h), Raster<WarpFlag>(w, h, WarpFlag::SourceInvalid),
                 Raster<Vec2>(w, h, Vec2(nan, nan))};
  const Mat3 r_t = rel.rotation.transpose();

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!depth1.valid(x, y)) continue;
      const Vec3 x1 = backproject(Vec2(x, y), depth1.at(x, y), k1);
      const Vec3 x2 = r_t * (x1 - rel.translation);
      if (!(x2.z() > 0.0)) {
        out.flags.at(x, y) = WarpFlag::OutOfView;
        continue;
      }
      const Vec2 p12 = snap_to_border(project(x2, k2), k2);
      out.forward.at(x, y) = p12;
      if (!k2.contains(p12)) {
        out.flags.at(x, y) = WarpFlag::OutOfView;
        continue;
      }
      const auto d2 = sample_bilinear(depth2, p12);
      if (!d2) {
        out.flags.at(x, y) = WarpFlag::LookupInvalid;
        continue;
      }
      const Vec3 back = rel.apply(backproject(p12, *d2, k2));
      out.predicted.at(x, y) = back.z();
      out.flags.at(x, y) = WarpFlag::Ok;
    }
  }
  return out;
}

CovisibilityMap classify(const DepthMap& depth1, const WarpResult& warp,
                         const NormalMap& normals1, const RelativePose& rel,
                         const CovisParams& params) {
  params.validate();
  const int w = depth1.width();
  const int h = depth1.height();
  if (!warp.flags.same_shape(w, h) || !normals1.same_shape(w, h)) {
    fail(ErrorCode::Config, "classify inputs differ in size");
  }
  const Mat3 r_t = rel.rotation.transpose();
  // Facing test rejects when angle(z, R^T n) < 90 - eps, i.e. when the z
  // component of the rotated unit normal exceeds cos(90 - eps).
  const double facing_limit = std::cos(deg2rad(90.0 - params.epsilon_deg));

  CovisibilityMap labels(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      CovisLabel& label = labels.at(x, y);
      switch (warp.flags.at(x, y)) {
        case WarpFlag::SourceInvalid:
        case WarpFlag::LookupInvalid:
          label = CovisLabel::Invalid;
          continue;
        case WarpFlag::OutOfView:
          label = CovisLabel::OutOfView;
          continue;
        case WarpFlag::Ok:
          break;
      }
      const double d1 = depth1.at(x, y);
      const double predicted = warp.predicted.at(x, y);
      if (std::abs(predicted - d1) / d1 > params.tau) {
        label = CovisLabel::Occluded;
        continue;
      }
      if (normals1.valid(x, y)) {
        const Vec3 n2 = r_t * normals1.at(x, y);
        if (n2.z() / n2.norm() > facing_limit) {
          label = CovisLabel::Occluded;
          continue;
        }
      }
      label = CovisLabel::CoVisible;
    }
  }
  return labels;
}

namespace {

CovisibilityMap one_direction(const CameraIntrinsics& k1, const DepthMap& d1,
                              const NormalMap& n1, const CameraIntrinsics& k2,
                              const DepthMap& d2, const RelativePose& rel,
                              const CovisParams& params) {
  const WarpResult warp = warp_depth(d1, d2, k1, k2, rel);
  return classify(d1, warp, n1, rel, params);
}

}  // namespace

CovisPair covisibility_pair(const ViewInput& view1, const ViewInput& view2,
                            const CovisParams& params) {
  params.validate();
  const RelativePose rel12 = relative_pose(view1.pose, view2.pose);
  const RelativePose rel21 = relative_pose(view2.pose, view1.pose);
  return {one_direction(view1.intrinsics, view1.depth, view1.normals,
                        view2.intrinsics, view2.depth, rel12, params),
          one_direction(view2.intrinsics, view2.depth, view2.normals,
                        view1.intrinsics, view1.depth, rel21, params)};
}

CovisPair covisibility_pair(const CameraIntrinsics& k1, const DepthMap& depth1,
                            const NormalMap& normals1,
                            const CameraIntrinsics& k2, const DepthMap& depth2,
                            const NormalMap& normals2, const RelativePose& rel,
                            const CovisParams& params) {
  params.validate();
  return {one_direction(k1, depth1, normals1, k2, depth2, rel, params),
          one_direction(k2, depth2, normals2, k1, depth1, rel.inverse(), params)};
}

}  // namespace cvb
