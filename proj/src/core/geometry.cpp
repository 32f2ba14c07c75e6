#include "cvb/geometry.hpp"

#include <cmath>
#include <sstream>

#include "cvb/error.hpp"

namespace cvb {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Domain: return "DomainError";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::EmptyCovisibility: return "EmptyCovisibility";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::NoModelFound: return "NoModelFound";
    case ErrorCode::InsufficientMatches: return "InsufficientMatches";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::AmbiguousDecomposition: return "AmbiguousDecomposition";
    case ErrorCode::ScaleUnrecoverable: return "ScaleUnrecoverable";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Format: return "FormatError";
  }
  return "Unknown";
}

void CameraIntrinsics::validate() const {
  std::ostringstream why;
  if (!(fx > 0.0) || !(fy > 0.0)) {
    why << "focal lengths must be positive (fx=" << fx << ", fy=" << fy << ")";
  } else if (width < 2 || height < 2) {
    why << "image must be at least 2x2 (got " << width << "x" << height << ")";
  } else if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
    why << "principal point (" << cx << ", " << cy << ") outside the image";
  } else {
    return;
  }
  fail(ErrorCode::Config, why.str());
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Mat3 CameraIntrinsics::inverse_matrix() const {
  Mat3 k;
  k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k;
}

RigidPose RigidPose::from_quaternion(const Eigen::Quaterniond& q,
                                     const Vec3& center) {
  if (!(q.norm() > 0.0)) {
    fail(ErrorCode::Config, "zero quaternion");
  }
  RigidPose pose;
  pose.rotation = q.normalized().toRotationMatrix();
  pose.center = center;
  return pose;
}

Eigen::Quaterniond RigidPose::quaternion() const {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  // Canonical sign keeps serialized poses stable.
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

void RigidPose::validate() const {
  if (!is_rotation(rotation) || !center.allFinite()) {
    fail(ErrorCode::Config, "pose rotation is not orthonormal with det +1");
  }
}

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= 10.0 * tol;
}

RelativePose RelativePose::inverse() const {
  RelativePose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Vec3 backproject(const Vec2& p, double depth, const CameraIntrinsics& k) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    std::ostringstream why;
    why << "backproject needs a positive finite depth, got " << depth;
    fail(ErrorCode::Domain, why.str());
  }
  return {depth * (p.x() - k.cx) / k.fx, depth * (p.y() - k.cy) / k.fy, depth};
}

Vec2 project(const Vec3& x, const CameraIntrinsics& k) {
  if (!(x.z() > 0.0)) {
    fail(ErrorCode::BehindCamera, "point is not in front of the camera");
  }
  return {k.fx * x.x() / x.z() + k.cx, k.fy * x.y() / x.z() + k.cy};
}

Vec2 snap_to_border(const Vec2& p, const CameraIntrinsics& k, double tol) {
  const auto snap = [tol](double v, double hi) {
    if (v < 0.0 && v >= -tol) return 0.0;
    if (v > hi && v <= hi + tol) return hi;
    return v;
  };
  return {snap(p.x(), k.width - 1), snap(p.y(), k.height - 1)};
}

RelativePose relative_pose(const RigidPose& pose1, const RigidPose& pose2) {
  RelativePose rel;
  if (pose1.rotation == pose2.rotation && pose1.center == pose2.center) {
    return rel;
  }
  rel.rotation = pose1.rotation.transpose() * pose2.rotation;
  rel.translation = pose1.rotation.transpose() * (pose2.center - pose1.center);
  return rel;
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace cvb
