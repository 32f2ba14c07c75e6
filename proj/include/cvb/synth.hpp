#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cvb/criteria.hpp"
#include "cvb/io.hpp"

namespace cvb::synth {

/// Plane through `point` with unit `normal`. A finite rectangle when both
/// half extents are finite, measured along `u_axis` and normal x u_axis.
struct Plane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 u_axis = Vec3::UnitX();
  double half_u = std::numeric_limits<double>::infinity();
  double half_v = std::numeric_limits<double>::infinity();
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

struct AxisBox {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();
};

using Primitive = std::variant<Plane, Sphere, AxisBox>;

struct AnalyticScene {
  std::vector<Primitive> primitives;

  /// Throws Config for an empty scene or non-finite / degenerate primitives.
  void validate() const;
};

struct Hit {
  double t = 0.0;   // ray parameter
  Vec3 normal;      // unit, world frame, outward for closed shapes
};

/// Nearest hit with t > 1e-9 along origin + t * direction.
std::optional<Hit> intersect(const Primitive& primitive, const Vec3& origin,
                             const Vec3& direction);
std::optional<Hit> cast_ray(const AnalyticScene& scene, const Vec3& origin,
                            const Vec3& direction);

/// True when `point` lies on the primitive within tol (implicit equation).
bool on_surface(const Primitive& primitive, const Vec3& point, double tol);

struct Camera {
  CameraIntrinsics intrinsics;
  RigidPose pose;
};

struct Rendering {
  DepthMap depth;
  NormalMap normals;  // camera frame, facing the camera
};

/// Ray per pixel with direction R * (K^-1 p), so the hit parameter is z-depth.
Rendering render(const AnalyticScene& scene, const Camera& camera);

/// Exact labels for pixels of view 1 with respect to view 2.
CovisibilityMap oracle_covis(const AnalyticScene& scene, const Camera& cam1,
                             const Camera& cam2);

/// Camera at `center` looking at `target`; image y points along -up.
RigidPose look_at(const Vec3& center, const Vec3& target, const Vec3& up = -Vec3::UnitY());

/// Criteria by direct enumeration of world points (distances and sight
/// lines to both camera centers) over co-visible pixels.
CriteriaResult enumerate_criteria(const Camera& cam1, const DepthMap& depth1,
                                  const CovisibilityMap& c12, const Camera& cam2,
                                  const DepthMap& depth2, const CovisibilityMap& c21);

struct Fixture {
  std::string name;
  AnalyticScene scene;
  Camera cam_a;
  Camera cam_b;
};

/// The default suite: identity, pure rotation, forward motion, arcs,
/// opposite views, street scenes, occlusion and large scale change.
std::vector<Fixture> default_suite();

struct SuiteOptions {
  std::uint64_t seed = 1;
  std::size_t matches_per_pair = 200;
};

/// Writes cameras.json, pairs.jsonl, depth/, normal/, oracle_covis/,
/// oracle_criteria.jsonl and matches.jsonl (ground-truth correspondences).
void make_fixture_suite(const std::filesystem::path& out_dir, const SuiteOptions& options);

/// Ground-truth matches: co-visible integer pixels of image a with their
/// exact projections into image b, sampled without replacement.
MatchSet oracle_matches(const Fixture& fixture, const Rendering& render_a,
                        const CovisibilityMap& c_ab, std::size_t count, std::uint64_t seed);

}  // namespace cvb::synth
