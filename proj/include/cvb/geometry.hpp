#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace cvb {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole calibration. Pixel centers sit at integer coordinates with the
/// origin at the center of the top-left pixel.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws ErrorCode::Config when the calibration is not usable.
  void validate() const;

  Mat3 matrix() const;
  Mat3 inverse_matrix() const;

  /// True when (x, y) lies in [0, width-1] x [0, height-1].
  bool contains(const Vec2& p) const {
    return p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= width - 1 &&
           p.y() <= height - 1;
  }
};

/// World-from-camera pose: X_world = rotation * X_cam + center.
struct RigidPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 center = Vec3::Zero();

  static RigidPose from_quaternion(const Eigen::Quaterniond& q_wxyz,
                                   const Vec3& center);
  Eigen::Quaterniond quaternion() const;

  Vec3 to_camera(const Vec3& world) const {
    return rotation.transpose() * (world - center);
  }
  Vec3 to_world(const Vec3& cam) const { return rotation * cam + center; }

  void validate() const;
};

/// Maps camera-2 coordinates into camera-1 coordinates: X1 = R12 * X2 + t12.
/// t12 is camera 2's center expressed in the camera-1 frame.
struct RelativePose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x2) const { return rotation * x2 + translation; }

  /// The camera-1 -> camera-2 map.
  RelativePose inverse() const;
};

/// Planar ground-truth pose (position on the ground plane plus heading).
struct GroundPlanePose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;  // (-pi, pi]
};

/// d * K^-1 * (px, py, 1). The returned z equals d exactly.
Vec3 backproject(const Vec2& pixel, double depth, const CameraIntrinsics& k);

/// Perspective projection; the result may fall outside the image.
Vec2 project(const Vec3& point, const CameraIntrinsics& k);

/// Moves coordinates lying within tol outside [0, size-1] onto the border.
/// Projections of border pixels land a rounding error off the edge.
inline constexpr double kBorderSnapPx = 1e-6;
Vec2 snap_to_border(const Vec2& p, const CameraIntrinsics& k, double tol = kBorderSnapPx);

RelativePose relative_pose(const RigidPose& pose1, const RigidPose& pose2);

/// Rotation orthonormality check with tolerance on R^T R - I.
bool is_rotation(const Mat3& r, double tol = 1e-9);

/// Angle in radians between two vectors, stable near 0 and pi.
double angle_between(const Vec3& a, const Vec3& b);

constexpr double kPi = 3.14159265358979323846;
inline double rad2deg(double r) { return r * 180.0 / kPi; }
inline double deg2rad(double d) { return d * kPi / 180.0; }

}  // namespace cvb
