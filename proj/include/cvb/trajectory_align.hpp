#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cvb/geometry.hpp"

namespace cvb {

/// x -> scale * rotation * x + translation
struct Sim3 {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return scale * (rotation * x) + translation; }
};

/// Closed-form least-squares similarity (Umeyama). Throws InsufficientData
/// below 3 points and DegenerateConfiguration for collinear input.
Sim3 umeyama_sim3(std::span<const Vec3> src, std::span<const Vec3> dst);

struct AlignmentOptions {
  double threshold = 1.0;       // meters, ground-plane residual
  int max_iters = 5000;
  double confidence = 0.999;
  int max_local_rounds = 10;
  std::uint64_t seed = 0;
};

struct AlignmentResult {
  Sim3 transform;
  std::vector<bool> inlier_mask;
  std::vector<double> residuals;   // meters, in the ground plane
  std::size_t inlier_count = 0;
  int iterations = 0;
};

/// LO-RANSAC over minimal 3-point similarity fits. dst centers are ground
/// truth on the z = 0 plane; residuals are measured in x, y only.
AlignmentResult lo_ransac_align(std::span<const Vec3> src, std::span<const Vec3> dst,
                                const AlignmentOptions& options);

/// Residual of one correspondence under a similarity, in the ground plane.
double ground_residual(const Sim3& sim, const Vec3& src, const Vec3& dst);

/// Inlier poses mapped into the metric frame; outliers are dropped.
std::vector<RigidPose> apply_and_filter(std::span<const RigidPose> poses,
                                        const AlignmentResult& result);

}  // namespace cvb
