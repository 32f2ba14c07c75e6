#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvb/geometry.hpp"
#include "cvb/raster.hpp"

namespace cvb {

/// Correspondences between image 1 (points_a) and image 2 (points_b).
struct MatchSet {
  std::string pair_id;
  std::vector<Vec2> points_a;
  std::vector<Vec2> points_b;
  std::vector<double> confidence;  // optional, empty or one per match

  std::size_t size() const { return points_a.size(); }
};

struct EssentialOptions {
  double threshold_px = 0.5;   // Sampson distance
  int max_iters = 10000;
  double confidence = 0.999;
  int max_local_rounds = 10;
  /// Share of essential inliers a pure rotation must also explain for the
  /// pair to be reported as DegenerateGeometry.
  double rotation_only_ratio = 0.9;
  std::uint64_t seed = 0;
};

struct EssentialEstimate {
  Mat3 essential = Mat3::Zero();  // x1^T E x2 = 0 for normalised points
  std::vector<bool> inliers;
  std::size_t inlier_count = 0;
  int iterations = 0;
};

/// F = K1^-T E K2^-1, so that p1^T F p2 = 0 in pixels.
Mat3 fundamental_from_essential(const Mat3& essential, const CameraIntrinsics& k1,
                                const CameraIntrinsics& k2);

/// First-order geometric error of a correspondence under F, in pixels.
double sampson_distance(const Mat3& fundamental, const Vec2& p1, const Vec2& p2);

/// Hartley-normalised 8-point fit on normalised image points, projected onto
/// the essential manifold (two equal singular values, one zero).
Mat3 eight_point_essential(std::span<const Vec2> x1, std::span<const Vec2> x2);

/// LO-RANSAC with 8-point minimal samples and a fixed Sampson threshold.
/// Throws InsufficientMatches, NoModelFound or DegenerateGeometry.
EssentialEstimate estimate_essential(const MatchSet& matches, const CameraIntrinsics& k1,
                                     const CameraIntrinsics& k2,
                                     const EssentialOptions& options);

struct PoseEstimate {
  Mat3 rotation = Mat3::Identity();  // camera-2 -> camera-1, like RelativePose
  Vec3 translation = Vec3::Zero();   // unit length unless metric
  bool metric = false;
  std::vector<bool> inliers;

  RelativePose as_relative() const { return {rotation, translation}; }
};

/// Picks the (R, t) candidate with most points in front of both cameras.
/// Throws AmbiguousDecomposition on a tie.
PoseEstimate decompose_essential(const Mat3& essential, const MatchSet& matches,
                                 const std::vector<bool>& inliers,
                                 const CameraIntrinsics& k1, const CameraIntrinsics& k2);

/// Depths (z in camera 1 and camera 2) of a correspondence triangulated
/// under X1 = R X2 + t. Empty when the rays are parallel.
std::optional<Vec2> triangulate_depths(const Vec3& ray1, const Vec3& ray2,
                                       const Mat3& rotation, const Vec3& translation);

/// Metric translation from the median of D1(p1) / lambda1 over inliers.
PoseEstimate recover_scale(const PoseEstimate& estimate, const MatchSet& matches,
                           const DepthMap& depth1, const CameraIntrinsics& k1,
                           const CameraIntrinsics& k2);

/// Rotation-only fit (x1 ~ R x2) by 2-point RANSAC on bearings, refined on
/// its inliers. Used when the baseline is too small for an essential matrix.
PoseEstimate estimate_rotation_only(const MatchSet& matches, const CameraIntrinsics& k1,
                                    const CameraIntrinsics& k2,
                                    const EssentialOptions& options);

struct PoseErrors {
  double rotation_deg = 0.0;
  double translation_m = 0.0;
};

/// Geodesic rotation angle and Euclidean translation distance.
PoseErrors pose_errors(const PoseEstimate& estimate, const RelativePose& truth);

inline constexpr double kSuccessRotationDeg = 5.0;
inline constexpr double kSuccessTranslationM = 2.0;

enum class FailureReason {
  None,
  InsufficientMatches,
  NoModelFound,
  DegenerateGeometry,
  AmbiguousDecomposition,
  ScaleUnrecoverable,
  MissingPair,
  MissingInput,
};

std::string_view to_string(FailureReason reason);
std::optional<FailureReason> failure_reason_from_string(std::string_view text);

/// How a pose was obtained for a pair.
enum class PoseSource { Essential, RotationOnly, External, None };
std::string_view to_string(PoseSource source);

struct EvalRecord {
  std::string pair_id;
  std::optional<double> rotation_err_deg;
  std::optional<double> translation_err_m;
  bool success = false;
  FailureReason failure = FailureReason::None;
  PoseSource source = PoseSource::None;
  std::size_t matches = 0;
  std::size_t inliers = 0;
};

/// success = rotation < 5 deg and translation < 2 m, strictly.
EvalRecord judge(std::string pair_id, const std::optional<PoseErrors>& errors,
                 FailureReason upstream = FailureReason::None);

struct PairEvalOptions {
  EssentialOptions essential;
  bool rotation_fallback = true;
};

/// estimate -> decompose -> recover scale -> errors -> judge. Library errors
/// become failure reasons on the record.
EvalRecord evaluate_matches(const MatchSet& matches, const CameraIntrinsics& k1,
                            const CameraIntrinsics& k2, const DepthMap& depth1,
                            const RelativePose& truth, const PairEvalOptions& options);

/// Scores an externally supplied metric relative pose.
EvalRecord evaluate_pose(const std::string& pair_id, const RelativePose& predicted,
                         const RelativePose& truth);

}  // namespace cvb
