#include "cvb/criteria.hpp"

#include <algorithm>
#include <vector>

#include "cvb/error.hpp"
#include "cvb/numeric.hpp"

namespace cvb {

double overlap(const CovisibilityMap& c12, const CovisibilityMap& c21) {
  const double total = static_cast<double>(c12.size() + c21.size());
  if (!(total > 0.0)) return 0.0;
  return static_cast<double>(c12.count(CovisLabel::CoVisible) +
                             c21.count(CovisLabel::CoVisible)) /
         total;
}

double point_scale_ratio(const Vec3& point, const Vec3& other_center) {
  const double d_self = point.norm();
  const double d_other = (point - other_center).norm();
  return std::max(d_self / d_other, d_other / d_self);
}

double point_sight_angle_deg(const Vec3& point, const Vec3& other_center) {
  return rad2deg(angle_between(point, point - other_center));
}

namespace {

enum class Statistic { ScaleRatio, SightAngle };

void collect(const DirectionInput& dir, Statistic stat, std::vector<double>& out) {
  const int w = dir.covis.width();
  const int h = dir.covis.height();
  if (!dir.depth.same_shape(w, h)) {
    fail(ErrorCode::Config, "co-visibility map and depth map differ in size");
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (dir.covis.at(x, y) != CovisLabel::CoVisible || !dir.depth.valid(x, y)) {
        continue;
      }
      const Vec3 point = backproject(Vec2(x, y), dir.depth.at(x, y), dir.intrinsics);
      if (!((point - dir.translation).norm() > 0.0)) continue;
      out.push_back(stat == Statistic::ScaleRatio
                        ? point_scale_ratio(point, dir.translation)
                        : point_sight_angle_deg(point, dir.translation));
    }
  }
}

double median_statistic(const DirectionInput& fwd, const DirectionInput& bwd,
                        Statistic stat) {
  std::vector<double> values;
  collect(fwd, stat, values);
  collect(bwd, stat, values);
  if (values.empty()) {
    fail(ErrorCode::EmptyCovisibility, "no co-visible pixels in either direction");
  }
  return lower_median(std::move(values));
}

}  // namespace

double scale_ratio(const DirectionInput& forward, const DirectionInput& backward) {
  return median_statistic(forward, backward, Statistic::ScaleRatio);
}

double viewpoint_angle_deg(const DirectionInput& forward,
                           const DirectionInput& backward) {
  return median_statistic(forward, backward, Statistic::SightAngle);
}

double scale_ratio(const DepthMap& depth1, const DepthMap& depth2,
                   const CovisibilityMap& c12, const CovisibilityMap& c21,
                   const CameraIntrinsics& k1, const CameraIntrinsics& k2,
                   const RelativePose& rel) {
  return scale_ratio(DirectionInput{depth1, c12, k1, rel.translation},
                     DirectionInput{depth2, c21, k2, rel.inverse().translation});
}

double viewpoint_angle_deg(const DepthMap& depth1, const DepthMap& depth2,
                           const CovisibilityMap& c12, const CovisibilityMap& c21,
                           const CameraIntrinsics& k1, const CameraIntrinsics& k2,
                           const RelativePose& rel) {
  return viewpoint_angle_deg(
      DirectionInput{depth1, c12, k1, rel.translation},
      DirectionInput{depth2, c21, k2, rel.inverse().translation});
}

CriteriaResult criteria_from_maps(const ViewInput& view_a, const ViewInput& view_b,
                                  const CovisPair& covis) {
  CriteriaResult result;
  result.omega = overlap(covis.forward, covis.backward);
  result.covis_ab = covis.forward.count(CovisLabel::CoVisible);
  result.covis_ba = covis.backward.count(CovisLabel::CoVisible);

  const DirectionInput fwd{view_a.depth, covis.forward, view_a.intrinsics,
                           relative_pose(view_a.pose, view_b.pose).translation};
  const DirectionInput bwd{view_b.depth, covis.backward, view_b.intrinsics,
                           relative_pose(view_b.pose, view_a.pose).translation};
  try {
    result.criteria = PairCriteria{result.omega, scale_ratio(fwd, bwd),
                                   viewpoint_angle_deg(fwd, bwd)};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyCovisibility) throw;
  }
  return result;
}

CriteriaResult compute_criteria(const ViewInput& view_a, const ViewInput& view_b,
                                const CovisParams& params) {
  return criteria_from_maps(view_a, view_b, covisibility_pair(view_a, view_b, params));
}

}  // namespace cvb
