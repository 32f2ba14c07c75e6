#include "cvb/pose_eval.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <array>
#include <limits>
#include <random>

#include "cvb/error.hpp"
#include "cvb/numeric.hpp"

namespace cvb {

namespace {

constexpr int kMinimalSample = 8;

Vec2 normalized_point(const Vec2& p, const CameraIntrinsics& k) {
  return {(p.x() - k.cx) / k.fx, (p.y() - k.cy) / k.fy};
}

Vec3 ray_of(const Vec2& p, const CameraIntrinsics& k) {
  const Vec2 n = normalized_point(p, k);
  return {n.x(), n.y(), 1.0};
}

// Similarity taking the points to zero centroid and mean distance sqrt(2).
Mat3 hartley_transform(std::span<const Vec2> pts) {
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double dist = 0.0;
  for (const auto& p : pts) dist += (p - mean).norm();
  dist /= static_cast<double>(pts.size());
  const double s = dist > 0.0 ? std::sqrt(2.0) / dist : 1.0;
  Mat3 t;
  t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return t;
}

Mat3 kabsch(std::span<const Vec3> a, std::span<const Vec3> b) {
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) h += a[i] * b[i].transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

// Pixel distance between p1 and the image-1 projection of R * ray(p2).
double rotation_transfer_error(const Mat3& r, const Vec2& p1, const Vec2& p2,
                               const CameraIntrinsics& k1, const CameraIntrinsics& k2) {
  const Vec3 x = r * ray_of(p2, k2);
  if (!(x.z() > 0.0)) return std::numeric_limits<double>::infinity();
  const Vec2 q{k1.fx * x.x() / x.z() + k1.cx, k1.fy * x.y() / x.z() + k1.cy};
  return (q - p1).norm();
}

std::size_t score_essential(const Mat3& f, const MatchSet& m, double threshold,
                            std::vector<bool>* mask) {
  std::size_t count = 0;
  if (mask) mask->assign(m.size(), false);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (sampson_distance(f, m.points_a[i], m.points_b[i]) <= threshold) {
      ++count;
      if (mask) (*mask)[i] = true;
    }
  }
  return count;
}

int required_iterations(double inlier_ratio, int sample, double confidence, int cap) {
  const double p_good = std::pow(inlier_ratio, sample);
  if (p_good >= 1.0) return 1;
  if (p_good <= 0.0) return cap;
  const double k = std::log(1.0 - confidence) / std::log1p(-p_good);
  return static_cast<int>(std::min<double>(cap, std::ceil(k)));
}

void check_matches(const MatchSet& m) {
  if (m.points_a.size() != m.points_b.size()) {
    fail(ErrorCode::Format, "match set " + m.pair_id + " has unequal point lists");
  }
}

}  // namespace

Mat3 fundamental_from_essential(const Mat3& e, const CameraIntrinsics& k1,
                                const CameraIntrinsics& k2) {
  return k1.inverse_matrix().transpose() * e * k2.inverse_matrix();
}

double sampson_distance(const Mat3& f, const Vec2& p1, const Vec2& p2) {
  const Vec3 x1(p1.x(), p1.y(), 1.0);
  const Vec3 x2(p2.x(), p2.y(), 1.0);
  const Vec3 l1 = f * x2;
  const Vec3 l2 = f.transpose() * x1;
  const double e = x1.dot(l1);
  const double denom = l1.x() * l1.x() + l1.y() * l1.y() + l2.x() * l2.x() + l2.y() * l2.y();
  if (!(denom > 0.0)) return e == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(e) / std::sqrt(denom);
}

Mat3 eight_point_essential(std::span<const Vec2> x1, std::span<const Vec2> x2) {
  const Mat3 t1 = hartley_transform(x1);
  const Mat3 t2 = hartley_transform(x2);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(std::max<std::size_t>(x1.size(), 9)), 9);
  a.setZero();
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const Vec3 u = t1 * Vec3(x1[i].x(), x1[i].y(), 1.0);
    const Vec3 v = t2 * Vec3(x2[i].x(), x2[i].y(), 1.0);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(static_cast<Eigen::Index>(i), 3 * r + c) = u[r] * v[c];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd e = svd.matrixV().col(8);
  Mat3 en;
  en << e[0], e[1], e[2], e[3], e[4], e[5], e[6], e[7], e[8];
  Mat3 essential = t1.transpose() * en * t2;

  Eigen::JacobiSVD<Mat3> esvd(essential, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = esvd.singularValues();
  const double sigma = 0.5 * (s[0] + s[1]);
  essential = esvd.matrixU() * Vec3(sigma, sigma, 0.0).asDiagonal() *
              esvd.matrixV().transpose();
  const double norm = essential.norm();
  return norm > 0.0 ? Mat3(essential / norm) : essential;
}

EssentialEstimate estimate_essential(const MatchSet& m, const CameraIntrinsics& k1,
                                     const CameraIntrinsics& k2,
                                     const EssentialOptions& opt) {
  check_matches(m);
  if (m.size() < static_cast<std::size_t>(kMinimalSample)) {
    fail(ErrorCode::InsufficientMatches,
         "pair " + m.pair_id + " has " + std::to_string(m.size()) + " matches, need 8");
  }
  if (!(opt.threshold_px > 0.0)) fail(ErrorCode::Config, "threshold must be positive");

  std::vector<Vec2> x1(m.size()), x2(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    x1[i] = normalized_point(m.points_a[i], k1);
    x2[i] = normalized_point(m.points_b[i], k2);
  }
  const auto fundamental = [&](const Mat3& e) { return fundamental_from_essential(e, k1, k2); };

  std::mt19937_64 rng(opt.seed);
  const std::uint64_t n = m.size();
  EssentialEstimate best;
  std::vector<Vec2> s1(kMinimalSample), s2(kMinimalSample);
  std::vector<std::uint64_t> picked;
  std::vector<bool> mask;
  int needed = opt.max_iters;
  int it = 0;
  for (; it < needed; ++it) {
    picked.clear();
    while (picked.size() < static_cast<std::size_t>(kMinimalSample)) {
      const std::uint64_t j = uniform_index(rng, n);
      if (std::find(picked.begin(), picked.end(), j) == picked.end()) picked.push_back(j);
    }
    for (int j = 0; j < kMinimalSample; ++j) {
      s1[j] = x1[picked[j]];
      s2[j] = x2[picked[j]];
    }
    Mat3 e = eight_point_essential(s1, s2);
    if (!e.allFinite()) continue;
    std::size_t count = score_essential(fundamental(e), m, opt.threshold_px, &mask);
    if (count <= best.inlier_count) continue;

    // Local optimisation: refit on the inlier set while it does not shrink.
    for (int round = 0; round < opt.max_local_rounds; ++round) {
      std::vector<Vec2> i1, i2;
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (mask[i]) {
          i1.push_back(x1[i]);
          i2.push_back(x2[i]);
        }
      }
      if (i1.size() < static_cast<std::size_t>(kMinimalSample)) break;
      const Mat3 refit = eight_point_essential(i1, i2);
      std::vector<bool> refit_mask;
      const std::size_t refit_count =
          score_essential(fundamental(refit), m, opt.threshold_px, &refit_mask);
      if (refit_count < count) break;
      const bool same = refit_mask == mask;
      e = refit;
      count = refit_count;
      mask.swap(refit_mask);
      if (same) break;
    }
    best.essential = e;
    best.inlier_count = count;
    best.inliers = mask;
    needed = std::min(needed, required_iterations(static_cast<double>(count) / n,
                                                  kMinimalSample, opt.confidence,
                                                  opt.max_iters));
  }
  best.iterations = it;
  if (best.inlier_count < static_cast<std::size_t>(kMinimalSample)) {
    fail(ErrorCode::NoModelFound, "pair " + m.pair_id + ": fewer than 8 inliers");
  }

  // A pure rotation satisfies the epipolar constraint for any baseline
  // direction, so test whether a rotation alone explains the inliers.
  std::vector<Vec3> b1, b2;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (best.inliers[i]) {
      b1.push_back(ray_of(m.points_a[i], k1).normalized());
      b2.push_back(ray_of(m.points_b[i], k2).normalized());
    }
  }
  const Mat3 r = kabsch(b1, b2);
  std::size_t explained = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (best.inliers[i] &&
        rotation_transfer_error(r, m.points_a[i], m.points_b[i], k1, k2) <= opt.threshold_px) {
      ++explained;
    }
  }
  if (static_cast<double>(explained) >= opt.rotation_only_ratio * best.inlier_count) {
    fail(ErrorCode::DegenerateGeometry,
         "pair " + m.pair_id + ": matches are explained by a pure rotation");
  }
  return best;
}

std::optional<Vec2> triangulate_depths(const Vec3& ray1, const Vec3& ray2,
                                       const Mat3& rotation, const Vec3& translation) {
  // lambda1 * ray1 - lambda2 * R * ray2 = t, least squares.
  const Vec3 a = ray1;
  const Vec3 b = -(rotation * ray2);
  const double aa = a.dot(a), ab = a.dot(b), bb = b.dot(b);
  const double det = aa * bb - ab * ab;
  if (!(det > 1e-14 * aa * bb)) return std::nullopt;
  const double at = a.dot(translation), bt = b.dot(translation);
  const double l1 = (bb * at - ab * bt) / det;
  const double l2 = (aa * bt - ab * at) / det;
  // Depths along rays with unit z are z-depths.
  return Vec2(l1 * ray1.z(), l2 * ray2.z());
}

PoseEstimate decompose_essential(const Mat3& e, const MatchSet& m,
                                 const std::vector<bool>& inliers,
                                 const CameraIntrinsics& k1, const CameraIntrinsics& k2) {
  check_matches(m);
  if (inliers.size() != m.size()) fail(ErrorCode::Config, "inlier mask size mismatch");
  Eigen::JacobiSVD<Mat3> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  if (u.determinant() < 0) u.col(2) *= -1.0;
  if (v.determinant() < 0) v.col(2) *= -1.0;
  Mat3 w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Mat3 r1 = u * w * v.transpose();
  const Mat3 r2 = u * w.transpose() * v.transpose();
  const Vec3 t = u.col(2).normalized();
  const std::array<std::pair<Mat3, Vec3>, 4> candidates{
      {{r1, t}, {r1, -t}, {r2, t}, {r2, -t}}};

  std::array<std::size_t, 4> front{};
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!inliers[i]) continue;
      const auto d = triangulate_depths(ray_of(m.points_a[i], k1), ray_of(m.points_b[i], k2),
                                        candidates[c].first, candidates[c].second);
      if (d && d->x() > 0.0 && d->y() > 0.0) ++front[c];
    }
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return front[a] > front[b]; });
  if (front[order[0]] == front[order[1]]) {
    fail(ErrorCode::AmbiguousDecomposition,
         "pair " + m.pair_id + ": cheirality does not single out a decomposition");
  }
  PoseEstimate est;
  est.rotation = candidates[order[0]].first;
  est.translation = candidates[order[0]].second;
  est.inliers = inliers;
  return est;
}

PoseEstimate recover_scale(const PoseEstimate& est, const MatchSet& m,
                           const DepthMap& depth1, const CameraIntrinsics& k1,
                           const CameraIntrinsics& k2) {
  check_matches(m);
  if (!depth1.same_shape(k1.width, k1.height)) {
    fail(ErrorCode::Config, "depth map 1 does not match its intrinsics");
  }
  std::vector<double> ratios;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i < est.inliers.size() && !est.inliers[i]) continue;
    const auto d = sample_bilinear(depth1, m.points_a[i]);
    if (!d) continue;
    const auto lambda = triangulate_depths(ray_of(m.points_a[i], k1),
                                           ray_of(m.points_b[i], k2), est.rotation,
                                           est.translation);
    if (!lambda || !(lambda->x() > 0.0)) continue;
    ratios.push_back(*d / lambda->x());
  }
  if (ratios.empty()) {
    fail(ErrorCode::ScaleUnrecoverable,
         "pair " + m.pair_id + ": no inlier with valid depth and positive triangulation");
  }
  const double s = lower_median(std::move(ratios));
  if (!(s > 0.0) || !std::isfinite(s)) {
    fail(ErrorCode::ScaleUnrecoverable, "pair " + m.pair_id + ": non-positive scale");
  }
  PoseEstimate out = est;
  out.translation = s * est.translation;
  out.metric = true;
  return out;
}

PoseEstimate estimate_rotation_only(const MatchSet& m, const CameraIntrinsics& k1,
                                    const CameraIntrinsics& k2, const EssentialOptions& opt) {
  check_matches(m);
  if (m.size() < 2) fail(ErrorCode::InsufficientMatches, "rotation fit needs 2 matches");
  std::vector<Vec3> b1(m.size()), b2(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    b1[i] = ray_of(m.points_a[i], k1).normalized();
    b2[i] = ray_of(m.points_b[i], k2).normalized();
  }
  const auto inliers_of = [&](const Mat3& r, std::vector<bool>& mask) {
    mask.assign(m.size(), false);
    std::size_t count = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (rotation_transfer_error(r, m.points_a[i], m.points_b[i], k1, k2) <= opt.threshold_px) {
        mask[i] = true;
        ++count;
      }
    }
    return count;
  };

  std::mt19937_64 rng(opt.seed);
  const std::uint64_t n = m.size();
  Mat3 best_r = Mat3::Identity();
  std::size_t best = 0;
  std::vector<bool> best_mask, mask;
  int needed = opt.max_iters;
  for (int it = 0; it < needed; ++it) {
    const std::uint64_t i = uniform_index(rng, n);
    std::uint64_t j;
    do j = uniform_index(rng, n); while (j == i);
    const std::array<Vec3, 2> a{b1[i], b1[j]};
    const std::array<Vec3, 2> b{b2[i], b2[j]};
    Mat3 r = kabsch(a, b);
    std::size_t count = inliers_of(r, mask);
    if (count <= best) continue;
    if (count >= 2) {
      std::vector<Vec3> ia, ib;
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (mask[k]) {
          ia.push_back(b1[k]);
          ib.push_back(b2[k]);
        }
      }
      const Mat3 refit = kabsch(ia, ib);
      std::vector<bool> refit_mask;
      const std::size_t refit_count = inliers_of(refit, refit_mask);
      if (refit_count >= count) {
        r = refit;
        count = refit_count;
        mask.swap(refit_mask);
      }
    }
    best_r = r;
    best = count;
    best_mask = mask;
    needed = std::min(needed, required_iterations(static_cast<double>(best) / n, 2,
                                                  opt.confidence, opt.max_iters));
  }
  if (best < 2) fail(ErrorCode::NoModelFound, "pair " + m.pair_id + ": no rotation model");
  PoseEstimate est;
  est.rotation = best_r;
  est.translation = Vec3::Zero();
  est.metric = true;
  est.inliers = best_mask;
  return est;
}

PoseErrors pose_errors(const PoseEstimate& est, const RelativePose& truth) {
  const Mat3 d = est.rotation * truth.rotation.transpose();
  const double c = std::clamp((d.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Vec3 axis(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
  // atan2 form agrees with arccos((trace - 1) / 2) but keeps precision near 0.
  const double angle = std::atan2(0.5 * axis.norm(), c);
  return {rad2deg(angle), (est.translation - truth.translation).norm()};
}

std::string_view to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::None: return "none";
    case FailureReason::InsufficientMatches: return "insufficient_matches";
    case FailureReason::NoModelFound: return "no_model_found";
    case FailureReason::DegenerateGeometry: return "degenerate_geometry";
    case FailureReason::AmbiguousDecomposition: return "ambiguous_decomposition";
    case FailureReason::ScaleUnrecoverable: return "scale_unrecoverable";
    case FailureReason::MissingPair: return "missing_pair";
    case FailureReason::MissingInput: return "missing_input";
  }
  return "none";
}

std::optional<FailureReason> failure_reason_from_string(std::string_view text) {
  for (auto r : {FailureReason::None, FailureReason::InsufficientMatches,
                 FailureReason::NoModelFound, FailureReason::DegenerateGeometry,
                 FailureReason::AmbiguousDecomposition, FailureReason::ScaleUnrecoverable,
                 FailureReason::MissingPair, FailureReason::MissingInput}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

std::string_view to_string(PoseSource source) {
  switch (source) {
    case PoseSource::Essential: return "essential";
    case PoseSource::RotationOnly: return "rotation_only";
    case PoseSource::External: return "external";
    case PoseSource::None: return "none";
  }
  return "none";
}

EvalRecord judge(std::string pair_id, const std::optional<PoseErrors>& errors,
                 FailureReason upstream) {
  EvalRecord rec;
  rec.pair_id = std::move(pair_id);
  rec.failure = upstream;
  if (errors) {
    rec.rotation_err_deg = errors->rotation_deg;
    rec.translation_err_m = errors->translation_m;
  }
  rec.success = upstream == FailureReason::None && errors &&
                errors->rotation_deg < kSuccessRotationDeg &&
                errors->translation_m < kSuccessTranslationM;
  return rec;
}

namespace {

FailureReason reason_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InsufficientMatches: return FailureReason::InsufficientMatches;
    case ErrorCode::DegenerateGeometry: return FailureReason::DegenerateGeometry;
    case ErrorCode::AmbiguousDecomposition: return FailureReason::AmbiguousDecomposition;
    case ErrorCode::ScaleUnrecoverable: return FailureReason::ScaleUnrecoverable;
    case ErrorCode::NoModelFound: return FailureReason::NoModelFound;
    default: return FailureReason::NoModelFound;
  }
}

}  // namespace

EvalRecord evaluate_matches(const MatchSet& m, const CameraIntrinsics& k1,
                            const CameraIntrinsics& k2, const DepthMap& depth1,
                            const RelativePose& truth, const PairEvalOptions& options) {
  PoseEstimate metric;
  PoseSource source = PoseSource::Essential;
  std::size_t inliers = 0;
  try {
    try {
      const EssentialEstimate e = estimate_essential(m, k1, k2, options.essential);
      inliers = e.inlier_count;
      const PoseEstimate unit = decompose_essential(e.essential, m, e.inliers, k1, k2);
      metric = recover_scale(unit, m, depth1, k1, k2);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::DegenerateGeometry || !options.rotation_fallback) throw;
      metric = estimate_rotation_only(m, k1, k2, options.essential);
      source = PoseSource::RotationOnly;
      inliers = static_cast<std::size_t>(
          std::count(metric.inliers.begin(), metric.inliers.end(), true));
    }
  } catch (const Error& err) {
    EvalRecord rec = judge(m.pair_id, std::nullopt, reason_for(err.code()));
    rec.matches = m.size();
    return rec;
  }
  EvalRecord rec = judge(m.pair_id, pose_errors(metric, truth));
  rec.source = source;
  rec.matches = m.size();
  rec.inliers = inliers;
  return rec;
}

EvalRecord evaluate_pose(const std::string& pair_id, const RelativePose& predicted,
                         const RelativePose& truth) {
  PoseEstimate est;
  est.rotation = predicted.rotation;
  est.translation = predicted.translation;
  est.metric = true;
  EvalRecord rec = judge(pair_id, pose_errors(est, truth));
  rec.source = PoseSource::External;
  return rec;
}

}  // namespace cvb
