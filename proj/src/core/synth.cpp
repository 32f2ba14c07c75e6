#include "cvb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cvb/error.hpp"
#include "cvb/numeric.hpp"

namespace cvb::synth {

namespace {

constexpr double kMinT = 1e-9;
constexpr double kOcclusionTol = 1e-6;

std::optional<Hit> hit_plane(const Plane& p, const Vec3& o, const Vec3& d) {
  const double denom = p.normal.dot(d);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double t = p.normal.dot(p.point - o) / denom;
  if (!(t > kMinT)) return std::nullopt;
  if (std::isfinite(p.half_u) || std::isfinite(p.half_v)) {
    const Vec3 r = o + t * d - p.point;
    const Vec3 v_axis = p.normal.cross(p.u_axis);
    if (std::abs(r.dot(p.u_axis)) > p.half_u || std::abs(r.dot(v_axis)) > p.half_v)
      return std::nullopt;
  }
  return Hit{t, p.normal};
}

std::optional<Hit> hit_sphere(const Sphere& s, const Vec3& o, const Vec3& d) {
  const Vec3 oc = o - s.center;
  const double a = d.squaredNorm();
  const double b = 2.0 * oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  // Numerically stable root pair.
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double t0 = q / a;
  double t1 = q != 0.0 ? c / q : t0;
  if (t0 > t1) std::swap(t0, t1);
  const double t = t0 > kMinT ? t0 : t1;
  if (!(t > kMinT)) return std::nullopt;
  return Hit{t, (o + t * d - s.center) / s.radius};
}

std::optional<Hit> hit_box(const AxisBox& box, const Vec3& o, const Vec3& d) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int near_axis = -1, far_axis = -1;
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (o[i] < box.lo[i] || o[i] > box.hi[i]) return std::nullopt;
      continue;
    }
    double t1 = (box.lo[i] - o[i]) / d[i];
    double t2 = (box.hi[i] - o[i]) / d[i];
    if (t1 > t2) std::swap(t1, t2);
    if (t1 > t_near) { t_near = t1; near_axis = i; }
    if (t2 < t_far) { t_far = t2; far_axis = i; }
  }
  if (t_near > t_far || !(t_far > kMinT)) return std::nullopt;
  Vec3 n = Vec3::Zero();
  if (t_near > kMinT) {
    n[near_axis] = d[near_axis] > 0.0 ? -1.0 : 1.0;
    return Hit{t_near, n};
  }
  n[far_axis] = d[far_axis] > 0.0 ? 1.0 : -1.0;
  return Hit{t_far, n};
}

Vec3 pixel_ray(const CameraIntrinsics& k, double x, double y) {
  return {(x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0};
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

void AnalyticScene::validate() const {
  if (primitives.empty()) fail(ErrorCode::Config, "scene has no primitives");
  for (const auto& prim : primitives) {
    std::visit(
        [](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Plane>) {
            if (!p.point.allFinite() || std::abs(p.normal.norm() - 1.0) > 1e-9 ||
                std::abs(p.u_axis.norm() - 1.0) > 1e-9 || std::abs(p.normal.dot(p.u_axis)) > 1e-9)
              fail(ErrorCode::Config, "plane needs a finite point and orthonormal axes");
            if (!(p.half_u > 0.0) || !(p.half_v > 0.0))
              fail(ErrorCode::Config, "plane extents must be positive");
          } else if constexpr (std::is_same_v<T, Sphere>) {
            if (!p.center.allFinite() || !(p.radius > 0.0) || !std::isfinite(p.radius))
              fail(ErrorCode::Config, "sphere needs a finite center and positive radius");
          } else {
            if (!p.lo.allFinite() || !p.hi.allFinite() || !(p.lo.array() < p.hi.array()).all())
              fail(ErrorCode::Config, "box needs finite corners with lo < hi");
          }
        },
        prim);
  }
}

std::optional<Hit> intersect(const Primitive& primitive, const Vec3& origin,
                             const Vec3& direction) {
  return std::visit(
      [&](const auto& p) -> std::optional<Hit> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Plane>) return hit_plane(p, origin, direction);
        else if constexpr (std::is_same_v<T, Sphere>) return hit_sphere(p, origin, direction);
        else return hit_box(p, origin, direction);
      },
      primitive);
}

std::optional<Hit> cast_ray(const AnalyticScene& scene, const Vec3& origin,
                            const Vec3& direction) {
  std::optional<Hit> best;
  for (const auto& prim : scene.primitives) {
    const auto h = intersect(prim, origin, direction);
    if (h && (!best || h->t < best->t)) best = h;
  }
  return best;
}

bool on_surface(const Primitive& primitive, const Vec3& x, double tol) {
  return std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Plane>) {
          return std::abs(p.normal.dot(x - p.point)) <= tol;
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return std::abs((x - p.center).norm() - p.radius) <= tol;
        } else {
          const bool inside = ((x.array() >= p.lo.array() - tol) &&
                               (x.array() <= p.hi.array() + tol)).all();
          const double face = std::min((x - p.lo).cwiseAbs().minCoeff(),
                                       (x - p.hi).cwiseAbs().minCoeff());
          return inside && face <= tol;
        }
      },
      primitive);
}

Rendering render(const AnalyticScene& scene, const Camera& camera) {
  const CameraIntrinsics& k = camera.intrinsics;
  k.validate();
  camera.pose.validate();
  Rendering out{DepthMap(k.width, k.height), NormalMap(k.width, k.height)};
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Vec3 ray = pixel_ray(k, x, y);
      const auto hit = cast_ray(scene, camera.pose.center, camera.pose.rotation * ray);
      if (!hit) continue;
      Vec3 n = camera.pose.rotation.transpose() * hit->normal;
      if (n.dot(ray) > 0.0) n = -n;
      out.depth.at(x, y) = hit->t;
      out.normals.at(x, y) = n;
    }
  }
  return out;
}

CovisibilityMap oracle_covis(const AnalyticScene& scene, const Camera& cam1,
                             const Camera& cam2) {
  const CameraIntrinsics& k1 = cam1.intrinsics;
  const CameraIntrinsics& k2 = cam2.intrinsics;
  CovisibilityMap out(k1.width, k1.height);
  for (int y = 0; y < k1.height; ++y) {
    for (int x = 0; x < k1.width; ++x) {
      const Vec3 dir = cam1.pose.rotation * pixel_ray(k1, x, y);
      const auto hit = cast_ray(scene, cam1.pose.center, dir);
      if (!hit) continue;
      const Vec3 point = cam1.pose.center + hit->t * dir;
      const Vec3 in2 = cam2.pose.to_camera(point);
      if (!(in2.z() > 0.0) || !k2.contains(snap_to_border(project(in2, k2), k2))) {
        out.at(x, y) = CovisLabel::OutOfView;
        continue;
      }
      const Vec3 facing1 = hit->normal.dot(dir) > 0.0 ? Vec3(-hit->normal) : hit->normal;
      const Vec3 sight2 = point - cam2.pose.center;
      const double dist = sight2.norm();
      if (facing1.dot(sight2) >= 0.0) {
        out.at(x, y) = CovisLabel::Occluded;
        continue;
      }
      const auto blocker = cast_ray(scene, cam2.pose.center, sight2 / dist);
      const bool occluded = blocker && blocker->t < dist - kOcclusionTol;
      out.at(x, y) = occluded ? CovisLabel::Occluded : CovisLabel::CoVisible;
    }
  }
  return out;
}

RigidPose look_at(const Vec3& center, const Vec3& target, const Vec3& up) {
  const Vec3 z = (target - center).normalized();
  const Vec3 x = (-up).cross(z).normalized();
  const Vec3 y = z.cross(x);
  RigidPose pose;
  pose.rotation.col(0) = x;
  pose.rotation.col(1) = y;
  pose.rotation.col(2) = z;
  pose.center = center;
  return pose;
}

CriteriaResult enumerate_criteria(const Camera& cam1, const DepthMap& depth1,
                                  const CovisibilityMap& c12, const Camera& cam2,
                                  const DepthMap& depth2, const CovisibilityMap& c21) {
  std::vector<double> ratios, angles;
  std::size_t counts[2] = {0, 0};
  const auto walk = [&](const Camera& self, const Camera& other, const DepthMap& depth,
                        const CovisibilityMap& covis, std::size_t& count) {
    for (int y = 0; y < covis.height(); ++y) {
      for (int x = 0; x < covis.width(); ++x) {
        if (covis.at(x, y) != CovisLabel::CoVisible) continue;
        ++count;
        const Vec3 world = self.pose.rotation * (depth.at(x, y) * pixel_ray(self.intrinsics, x, y)) +
                           self.pose.center;
        const Vec3 to_self = world - self.pose.center;
        const Vec3 to_other = world - other.pose.center;
        const double a = to_self.norm();
        const double b = to_other.norm();
        if (b == 0.0) continue;
        ratios.push_back(std::max(a, b) / std::min(a, b));
        angles.push_back(rad2deg(std::atan2(to_self.cross(to_other).norm(), to_self.dot(to_other))));
      }
    }
  };
  walk(cam1, cam2, depth1, c12, counts[0]);
  walk(cam2, cam1, depth2, c21, counts[1]);

  CriteriaResult out;
  out.covis_ab = counts[0];
  out.covis_ba = counts[1];
  const double total = static_cast<double>(c12.size() + c21.size());
  out.omega = total > 0.0 ? static_cast<double>(counts[0] + counts[1]) / total : 0.0;
  if (!ratios.empty()) {
    const auto r = sorted(ratios);
    const auto t = sorted(angles);
    const std::size_t mid = (r.size() - 1) / 2;
    out.criteria = PairCriteria{out.omega, r[mid], t[mid]};
  }
  return out;
}

namespace {

CameraIntrinsics default_intrinsics(double f = 300.0) {
  return {f, f, 160.0, 120.0, 320, 240};
}

Plane wall(double z) { return Plane{{0, 0, z}, {0, 0, -1}, {1, 0, 0}}; }
Plane back_wall(double z) { return Plane{{0, 0, z}, {0, 0, 1}, {1, 0, 0}}; }
Plane floor_at(double y) { return Plane{{0, y, 0}, {0, -1, 0}, {1, 0, 0}}; }

AnalyticScene room() {
  return {{wall(12.0), floor_at(1.5), Sphere{{-1.5, 0.3, 7.0}, 0.6},
           AxisBox{{1.0, -0.5, 6.0}, {2.5, 1.5, 7.5}}}};
}

AnalyticScene street() {
  return {{floor_at(1.5), wall(80.0),
           AxisBox{{-12.0, -8.0, 5.0}, {-6.0, 1.5, 70.0}},
           AxisBox{{6.0, -8.0, 5.0}, {12.0, 1.5, 70.0}},
           AxisBox{{-3.0, 0.0, 12.0}, {-1.2, 1.5, 16.0}},
           AxisBox{{1.5, 0.2, 20.0}, {3.3, 1.5, 25.0}}}};
}

Camera cam(const Vec3& center, const Vec3& target, double f = 300.0) {
  return {default_intrinsics(f), look_at(center, target)};
}

// Two cameras on a circle of `radius` around `focus`, `span_deg` apart.
std::pair<Camera, Camera> arc(const Vec3& focus, double radius, double span_deg) {
  const double h = deg2rad(span_deg / 2.0);
  const Vec3 a = focus + radius * Vec3(-std::sin(h), 0.0, -std::cos(h));
  const Vec3 b = focus + radius * Vec3(std::sin(h), 0.0, -std::cos(h));
  return {cam(a, focus), cam(b, focus)};
}

}  // namespace

std::vector<Fixture> default_suite() {
  std::vector<Fixture> suite;
  const Vec3 o = Vec3::Zero();
  const Vec3 ahead(0, 0, 1);
  const auto yaw_target = [](double deg) {
    return Vec3(std::sin(deg2rad(deg)), 0.0, std::cos(deg2rad(deg)));
  };

  suite.push_back({"identity", room(), cam(o, ahead), cam(o, ahead)});
  suite.push_back({"pure_rotation", room(), cam(o, ahead), cam(o, yaw_target(12.0))});
  suite.push_back({"stereo_baseline", room(), cam(o, ahead), cam({0.8, 0, 0}, {0.8, 0, 1})});
  suite.push_back({"forward_halving", AnalyticScene{{wall(10.0)}}, cam(o, ahead, 2000.0),
                   cam({0, 0, 5}, {0, 0, 6}, 2000.0)});
  {
    AnalyticScene scene{{wall(10.0), floor_at(2.0), AxisBox{{-3.5, -1.0, 8.0}, {-2.0, 2.0, 9.0}},
                         Sphere{{2.5, 0.5, 8.5}, 0.8}}};
    auto [a, b] = arc({0, 0, 10}, 10.0, 30.0);
    suite.push_back({"arc30_equalradius", scene, a, b});
  }
  {
    AnalyticScene scene = room();
    scene.primitives.push_back(back_wall(-12.0));
    suite.push_back({"opposite_view", scene, cam(o, ahead), cam(o, -ahead)});
  }
  suite.push_back({"street_forward", street(), cam(o, ahead), cam({0, 0, 4}, {0, 0, 5})});
  suite.push_back({"street_lateral", street(), cam(o, ahead),
                   cam({1.5, 0, 1}, Vec3(1.5, 0, 1) + yaw_target(3.0))});
  {
    AnalyticScene scene{{wall(10.0), Plane{{0, 0, 5}, {0, 0, -1}, {1, 0, 0}, 1.0, 1.0},
                         floor_at(2.5)}};
    suite.push_back({"two_plane_occlusion", scene, cam(o, ahead), cam({1.5, 0, 0}, {0, 0, 7.5})});
  }
  {
    const Vec3 center(0, 0, 8);
    AnalyticScene scene{{Sphere{center, 0.65}, AxisBox{{-1.6, 0.5, 9.0}, {-0.8, 2.5, 10.0}},
                         wall(16.0), floor_at(2.5)}};
    const double a = deg2rad(40.0);
    const Vec3 orbit = center + 8.0 * Vec3(std::sin(a), 0.0, -std::cos(a));
    suite.push_back({"sphere_orbit", scene, cam(o, center), cam(orbit, center)});
  }
  {
    // No free-standing occluders: at this baseline an occluder's depth in view
    // a can match the hidden surface behind it within tau.
    AnalyticScene scene{{wall(10.0), floor_at(2.0)}};
    auto [a, b] = arc({0, 0, 10}, 8.0, 70.0);
    suite.push_back({"arc70", scene, a, b});
  }
  {
    AnalyticScene scene{{wall(20.0), floor_at(3.0), AxisBox{{-1.0, -1.0, 18.5}, {0.0, 0.0, 19.5}}}};
    suite.push_back({"scale_zoom", scene, cam(o, ahead), cam({0, 0, 15}, {0, 0, 16})});
  }
  return suite;
}

MatchSet oracle_matches(const Fixture& fixture, const Rendering& render_a,
                        const CovisibilityMap& c_ab, std::size_t count, std::uint64_t seed) {
  MatchSet m;
  m.pair_id = fixture.name;
  std::vector<std::pair<int, int>> pool;
  for (int y = 0; y < c_ab.height(); ++y)
    for (int x = 0; x < c_ab.width(); ++x)
      if (c_ab.at(x, y) == CovisLabel::CoVisible) pool.emplace_back(x, y);
  std::mt19937_64 rng(seed);
  const std::size_t take = std::min(count, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
  }
  pool.resize(take);
  std::sort(pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return std::tie(a.second, a.first) < std::tie(b.second, b.first); });
  const Camera& a = fixture.cam_a;
  const Camera& b = fixture.cam_b;
  for (const auto& [x, y] : pool) {
    const Vec3 world =
        a.pose.rotation * (render_a.depth.at(x, y) * pixel_ray(a.intrinsics, x, y)) + a.pose.center;
    m.points_a.emplace_back(x, y);
    m.points_b.push_back(project(b.pose.to_camera(world), b.intrinsics));
  }
  return m;
}

void make_fixture_suite(const std::filesystem::path& out_dir, const SuiteOptions& options) {
  const auto suite = default_suite();
  std::vector<CameraRecord> cameras;
  std::vector<PairRecord> pairs;
  std::vector<CriteriaRecord> criteria;
  std::vector<MatchSet> matches;
  const auto depth_dir = out_dir / "depth";
  const auto normal_dir = out_dir / "normal";
  const auto covis_dir = out_dir / "oracle_covis";
  for (const auto& d : {depth_dir, normal_dir, covis_dir}) std::filesystem::create_directories(d);

  for (std::size_t i = 0; i < suite.size(); ++i) {
    const Fixture& f = suite[i];
    f.scene.validate();
    const std::string id_a = f.name + "_a";
    const std::string id_b = f.name + "_b";
    const Rendering ra = render(f.scene, f.cam_a);
    const Rendering rb = render(f.scene, f.cam_b);
    write_depth(depth_file(depth_dir, id_a), ra.depth);
    write_depth(depth_file(depth_dir, id_b), rb.depth);
    write_normals(normal_file(normal_dir, id_a), ra.normals);
    write_normals(normal_file(normal_dir, id_b), rb.normals);
    const CovisibilityMap c_ab = oracle_covis(f.scene, f.cam_a, f.cam_b);
    const CovisibilityMap c_ba = oracle_covis(f.scene, f.cam_b, f.cam_a);
    write_covis(covis_file(covis_dir, f.name, true), c_ab);
    write_covis(covis_file(covis_dir, f.name, false), c_ba);

    cameras.push_back({id_a, f.cam_a.intrinsics, f.cam_a.pose});
    cameras.push_back({id_b, f.cam_b.intrinsics, f.cam_b.pose});
    pairs.push_back({f.name, id_a, id_b});

    // Oracle criteria see the stored (f32) depths, like every downstream stage.
    const auto c = enumerate_criteria(f.cam_a, quantize_f32(ra.depth), c_ab, f.cam_b,
                                      quantize_f32(rb.depth), c_ba);
    criteria.push_back({f.name, id_a, id_b, c.criteria, c.omega, c.covis_ab, c.covis_ba});
    matches.push_back(oracle_matches(f, ra, c_ab, options.matches_per_pair,
                                     splitmix64(options.seed ^ splitmix64(i + 1))));
  }
  write_cameras(out_dir / "cameras.json", cameras);
  write_pairs(out_dir / "pairs.jsonl", pairs);
  write_criteria(out_dir / "oracle_criteria.jsonl", criteria);
  write_matches(out_dir / "matches.jsonl", matches);
}

}  // namespace cvb::synth
