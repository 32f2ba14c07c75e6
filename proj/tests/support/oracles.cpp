#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cvb::testing {

Mat3 explicit_inverse(const Mat3& m) {
  Mat3 adj;
  adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double det = m(0, 0) * adj(0, 0) + m(0, 1) * adj(1, 0) + m(0, 2) * adj(2, 0);
  return adj / det;
}

namespace {

constexpr double kMinRange = 1e-9;

// Ray length to each primitive along a unit direction.
std::optional<double> range_to(const synth::Plane& p, const Vec3& o, const Vec3& u) {
  const double denom = p.normal.dot(u);
  if (denom == 0.0) return std::nullopt;
  const double s = p.normal.dot(p.point - o) / denom;
  if (s <= kMinRange) return std::nullopt;
  if (std::isfinite(p.half_u) || std::isfinite(p.half_v)) {
    const Vec3 rel = o + s * u - p.point;
    const Vec3 v_axis = p.normal.cross(p.u_axis);
    if (std::abs(rel.dot(p.u_axis)) > p.half_u || std::abs(rel.dot(v_axis)) > p.half_v) {
      return std::nullopt;
    }
  }
  return s;
}

std::optional<double> range_to(const synth::Sphere& sp, const Vec3& o, const Vec3& u) {
  // |o + s u - c|^2 = r^2 with |u| = 1.
  const Vec3 oc = o - sp.center;
  const double half_b = oc.dot(u);
  const double c = oc.squaredNorm() - sp.radius * sp.radius;
  const double disc = half_b * half_b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  for (double s : {-half_b - root, -half_b + root}) {
    if (s > kMinRange) return s;
  }
  return std::nullopt;
}

std::optional<double> range_to(const synth::AxisBox& b, const Vec3& o, const Vec3& u) {
  // Test the six faces one by one and keep the nearest in-face hit.
  std::optional<double> best;
  for (int axis = 0; axis < 3; ++axis) {
    if (u[axis] == 0.0) continue;
    for (double face : {b.lo[axis], b.hi[axis]}) {
      const double s = (face - o[axis]) / u[axis];
      if (s <= kMinRange) continue;
      const Vec3 q = o + s * u;
      bool inside = true;
      for (int other = 0; other < 3; ++other) {
        if (other == axis) continue;
        if (q[other] < b.lo[other] - 1e-12 || q[other] > b.hi[other] + 1e-12) inside = false;
      }
      if (inside && (!best || s < *best)) best = s;
    }
  }
  return best;
}

}  // namespace

std::optional<double> reference_depth(const synth::AnalyticScene& scene,
                                      const synth::Camera& camera, int x, int y) {
  const Mat3 k_inv = explicit_inverse(camera.intrinsics.matrix());
  const Vec3 cam_dir = k_inv * Vec3(x, y, 1.0);
  const Vec3 u = (camera.pose.rotation * cam_dir).normalized();
  const Vec3 axis = camera.pose.rotation.col(2);
  std::optional<double> nearest;
  for (const auto& prim : scene.primitives) {
    const auto s = std::visit([&](const auto& p) { return range_to(p, camera.pose.center, u); }, prim);
    if (s && (!nearest || *s < *nearest)) nearest = s;
  }
  if (!nearest) return std::nullopt;
  return *nearest * u.dot(axis);
}

namespace {

double sorted_lower_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

void collect(const synth::Camera& self, const DepthMap& depth, const CovisibilityMap& covis,
             const Vec3& other_center, std::vector<double>& ratios,
             std::vector<double>& angles) {
  const Mat3 k_inv = explicit_inverse(self.intrinsics.matrix());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (covis.at(x, y) != CovisLabel::CoVisible) continue;
      const Vec3 world =
          self.pose.rotation * (depth.at(x, y) * (k_inv * Vec3(x, y, 1.0))) + self.pose.center;
      const Vec3 a = world - self.pose.center;
      const Vec3 b = world - other_center;
      const double da = a.norm();
      const double db = b.norm();
      ratios.push_back(std::max(da, db) / std::min(da, db));
      if (db == 0.0) continue;
      const double c = std::clamp(a.dot(b) / (da * db), -1.0, 1.0);
      angles.push_back(std::acos(c) * 180.0 / kPi);
    }
  }
}

}  // namespace

ReferenceCriteria brute_force_criteria(const synth::Camera& cam1, const DepthMap& depth1,
                                       const CovisibilityMap& c12,
                                       const synth::Camera& cam2, const DepthMap& depth2,
                                       const CovisibilityMap& c21) {
  std::vector<double> ratios;
  std::vector<double> angles;
  collect(cam1, depth1, c12, cam2.pose.center, ratios, angles);
  collect(cam2, depth2, c21, cam1.pose.center, ratios, angles);
  ReferenceCriteria out;
  const double total = static_cast<double>(c12.size() + c21.size());
  out.omega = static_cast<double>(ratios.size()) / total;
  if (!ratios.empty()) out.delta = sorted_lower_median(ratios);
  if (!angles.empty()) out.theta_deg = sorted_lower_median(angles);
  return out;
}

Raster<std::uint8_t> discontinuity_band(const DepthMap& d) {
  Raster<std::uint8_t> band(d.width(), d.height(), 0);
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      for (int dy = -1; dy <= 1 && !band.at(x, y); ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int u = x + dx;
          const int v = y + dy;
          if (u < 0 || v < 0 || u >= d.width() || v >= d.height()) continue;
          const bool a = d.valid(x, y);
          const bool b = d.valid(u, v);
          if (a != b) {
            band.at(x, y) = 1;
            break;
          }
          if (!a) continue;
          const double p = d.at(x, y);
          const double q = d.at(u, v);
          if (std::abs(p - q) / std::min(p, q) > 0.1) {
            band.at(x, y) = 1;
            break;
          }
        }
      }
    }
  }
  return band;
}

double agreement_outside_band(const CovisibilityMap& a, const CovisibilityMap& b,
                              const Raster<std::uint8_t>& band) {
  std::size_t agree = 0;
  std::size_t total = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (band.at(x, y)) continue;
      ++total;
      if (a.at(x, y) == b.at(x, y)) ++agree;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(total);
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

Mat3 axis_angle(const Vec3& axis, double angle_deg) {
  return Eigen::AngleAxisd(deg2rad(angle_deg), axis.normalized()).toRotationMatrix();
}

TrajectoryCase make_trajectory(std::size_t n, double outlier_share, double sigma,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TrajectoryCase out;
  out.scale = 0.37;
  out.rotation = axis_angle(Vec3(0.3, -1.0, 0.4), 57.0);
  out.translation = Vec3(12.0, -4.0, 2.5);

  // A winding drive, about 1 m between poses.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> outlier(n, false);
  const auto n_out = static_cast<std::size_t>(std::llround(outlier_share * n));
  for (std::size_t i = 0; i < n_out; ++i) outlier[order[i]] = true;

  const Mat3 r_inv = out.rotation.transpose();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i);
    const Vec3 truth(s + 8.0 * std::sin(s / 25.0), 20.0 * std::sin(s / 40.0), 0.0);
    Vec3 observed = truth + Vec3(noise(rng), noise(rng), noise(rng));
    if (outlier[i]) {
      const double ang = 2.0 * kPi * unit(rng);
      const double mag = 5.0 + 10.0 * unit(rng);
      observed += mag * Vec3(std::cos(ang), std::sin(ang), 0.0);
    }
    // src is the reconstruction: dst = scale * R * src + t.
    out.src.push_back(r_inv * (observed - out.translation) / out.scale);
    out.dst.push_back(truth);
    out.clean.push_back(!outlier[i]);
  }
  return out;
}

PosePairCase make_pose_pair(std::size_t n_points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PosePairCase out;
  out.k = CameraIntrinsics{500, 500, 320, 240, 640, 480};
  const Vec3 axis(unit(rng) - 0.5, unit(rng) - 0.5, unit(rng) - 0.5);
  const Mat3 r12 = axis_angle(axis, 20.0 * unit(rng));
  // Camera 2's center in camera-1 coordinates, at least 0.5 m away.
  Vec3 c2(unit(rng) - 0.5, unit(rng) - 0.5, unit(rng) - 0.5);
  c2 = c2.normalized() * (0.5 + 2.5 * unit(rng));
  out.truth.rotation = r12;
  out.truth.translation = c2;

  const RelativePose to2 = out.truth.inverse();
  while (out.points.size() < n_points) {
    // Integer pixels in image 1 so that a sparse depth map is exact there.
    const Vec2 p(std::floor(unit(rng) * out.k.width), std::floor(unit(rng) * out.k.height));
    if (!out.k.contains(p)) continue;
    bool taken = false;
    for (const Vec2& q : out.pixels1) taken = taken || (q - p).squaredNorm() < 8.0;
    if (taken) continue;
    const double depth = 6.0 + 14.0 * unit(rng);
    const Vec3 x1 = depth * (explicit_inverse(out.k.matrix()) * Vec3(p.x(), p.y(), 1.0));
    const Vec3 x2 = to2.apply(x1);
    if (x2.z() <= 0.5) continue;
    const Vec3 h = out.k.matrix() * (x2 / x2.z());
    const Vec2 q(h.x(), h.y());
    if (!out.k.contains(q)) continue;
    out.points.push_back(x1);
    out.pixels1.push_back(p);
    out.pixels2.push_back(q);
  }
  return out;
}

DepthMap sparse_depth(const PosePairCase& pair) {
  DepthMap d(pair.k.width, pair.k.height);
  for (std::size_t i = 0; i < pair.points.size(); ++i) {
    const Vec2& p = pair.pixels1[i];
    d.at(static_cast<int>(p.x()), static_cast<int>(p.y())) = pair.points[i].z();
  }
  return d;
}

}  // namespace cvb::testing
