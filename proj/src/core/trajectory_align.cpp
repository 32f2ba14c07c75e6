#include "cvb/trajectory_align.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>

#include "cvb/error.hpp"
#include "cvb/numeric.hpp"

namespace cvb {

Sim3 umeyama_sim3(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size()) {
    fail(ErrorCode::Config, "similarity fit needs matching point counts");
  }
  if (src.size() < 3) {
    fail(ErrorCode::InsufficientData, "similarity fit needs at least 3 points");
  }
  const auto n = static_cast<Eigen::Index>(src.size());
  Eigen::Matrix3Xd a(3, n), b(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a.col(i) = src[static_cast<std::size_t>(i)];
    b.col(i) = dst[static_cast<std::size_t>(i)];
  }
  const Eigen::Matrix3Xd ac = a.colwise() - a.rowwise().mean();
  const Eigen::Matrix3Xd bc = b.colwise() - b.rowwise().mean();
  const Vec3 sa = Eigen::JacobiSVD<Mat3>(ac * ac.transpose()).singularValues();
  const Vec3 sx = Eigen::JacobiSVD<Mat3>(bc * ac.transpose()).singularValues();
  if (!(sa[0] > 0.0) || sa[1] <= 1e-12 * sa[0] || sx[1] <= 1e-12 * sx[0]) {
    fail(ErrorCode::DegenerateConfiguration,
         "correspondences are collinear or coincident");
  }

  const Eigen::Matrix4d t = Eigen::umeyama(a, b, true);
  Sim3 sim;
  const Mat3 sr = t.topLeftCorner<3, 3>();
  sim.scale = std::cbrt(sr.determinant());
  sim.rotation = sr / sim.scale;
  sim.translation = t.topRightCorner<3, 1>();
  if (!(sim.scale > 0.0) || !sim.rotation.allFinite()) {
    fail(ErrorCode::DegenerateConfiguration, "similarity fit did not converge");
  }
  return sim;
}

double ground_residual(const Sim3& sim, const Vec3& src, const Vec3& dst) {
  const Vec3 mapped = sim.apply(src);
  return std::hypot(mapped.x() - dst.x(), mapped.y() - dst.y());
}

namespace {

std::size_t count_inliers(const Sim3& sim, std::span<const Vec3> src,
                          std::span<const Vec3> dst, double threshold,
                          std::vector<std::size_t>* indices = nullptr) {
  if (indices) indices->clear();
  std::size_t count = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (ground_residual(sim, src[i], dst[i]) < threshold) {
      ++count;
      if (indices) indices->push_back(i);
    }
  }
  return count;
}

// Refit on the inlier set until it stops changing. The model is only replaced
// when the refit keeps at least as many inliers.
void local_optimize(Sim3& model, std::size_t& count, std::span<const Vec3> src,
                    std::span<const Vec3> dst, const AlignmentOptions& opt) {
  std::vector<std::size_t> current;
  count_inliers(model, src, dst, opt.threshold, &current);
  std::vector<Vec3> s, d;
  std::vector<std::size_t> next;
  for (int round = 0; round < opt.max_local_rounds; ++round) {
    if (current.size() < 3) return;
    s.clear();
    d.clear();
    for (std::size_t i : current) {
      s.push_back(src[i]);
      d.push_back(dst[i]);
    }
    Sim3 refit;
    try {
      refit = umeyama_sim3(s, d);
    } catch (const Error&) {
      return;
    }
    const std::size_t refit_count = count_inliers(refit, src, dst, opt.threshold, &next);
    if (refit_count < count) return;
    model = refit;
    count = refit_count;
    if (next == current) return;
    current.swap(next);
  }
}

int required_iterations(double inlier_ratio, double confidence, int cap) {
  const double p_good = std::pow(inlier_ratio, 3);
  if (p_good >= 1.0) return 1;
  if (p_good <= 0.0) return cap;
  const double k = std::log(1.0 - confidence) / std::log(1.0 - p_good);
  return static_cast<int>(std::min<double>(cap, std::ceil(k)));
}

}  // namespace

AlignmentResult lo_ransac_align(std::span<const Vec3> src, std::span<const Vec3> dst,
                                const AlignmentOptions& opt) {
  if (src.size() != dst.size()) {
    fail(ErrorCode::Config, "alignment needs matching pose counts");
  }
  if (src.size() < 3) {
    fail(ErrorCode::InsufficientData, "alignment needs at least 3 correspondences");
  }
  if (!(opt.threshold > 0.0) || opt.max_iters < 1) {
    fail(ErrorCode::Config, "alignment threshold and iteration cap must be positive");
  }

  const std::uint64_t n = src.size();
  std::mt19937_64 rng(opt.seed);
  Sim3 best;
  std::size_t best_count = 0;
  int needed = opt.max_iters;
  int it = 0;
  std::vector<Vec3> s(3), d(3);
  for (; it < needed; ++it) {
    std::uint64_t idx[3];
    idx[0] = uniform_index(rng, n);
    do idx[1] = uniform_index(rng, n); while (idx[1] == idx[0]);
    do idx[2] = uniform_index(rng, n); while (idx[2] == idx[0] || idx[2] == idx[1]);
    for (int j = 0; j < 3; ++j) {
      s[j] = src[idx[j]];
      d[j] = dst[idx[j]];
    }
    Sim3 model;
    try {
      model = umeyama_sim3(s, d);
    } catch (const Error&) {
      continue;
    }
    std::size_t count = count_inliers(model, src, dst, opt.threshold);
    if (count <= best_count) continue;
    local_optimize(model, count, src, dst, opt);
    best = model;
    best_count = count;
    needed = std::min(needed, required_iterations(static_cast<double>(best_count) / n,
                                                  opt.confidence, opt.max_iters));
  }
  if (best_count < 3) {
    fail(ErrorCode::NoModelFound, "no similarity explains 3 or more poses");
  }

  AlignmentResult result;
  result.transform = best;
  result.iterations = it;
  result.residuals.resize(src.size());
  result.inlier_mask.resize(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    result.residuals[i] = ground_residual(best, src[i], dst[i]);
    result.inlier_mask[i] = result.residuals[i] < opt.threshold;
    result.inlier_count += result.inlier_mask[i] ? 1 : 0;
  }
  return result;
}

std::vector<RigidPose> apply_and_filter(std::span<const RigidPose> poses,
                                        const AlignmentResult& result) {
  if (poses.size() != result.inlier_mask.size()) {
    fail(ErrorCode::Config, "pose count does not match the alignment mask");
  }
  std::vector<RigidPose> out;
  out.reserve(result.inlier_count);
  const Sim3& sim = result.transform;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (!result.inlier_mask[i]) continue;
    RigidPose p;
    p.rotation = sim.rotation * poses[i].rotation;
    p.center = sim.apply(poses[i].center);
    out.push_back(p);
  }
  return out;
}

}  // namespace cvb
