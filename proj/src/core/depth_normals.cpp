#include "cvb/depth_normals.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "cvb/error.hpp"
#include "cvb/numeric.hpp"

namespace cvb {

namespace {

constexpr int kMinPlanePoints = 4;
constexpr int kMinAlignPixels = 16;
constexpr double kTukeyC = 4.685;
constexpr double kMadToSigma = 1.4826;

struct WeightedLine {
  double scale;
  double shift;
};

WeightedLine weighted_fit(const std::vector<double>& s,
                          const std::vector<double>& r,
                          const std::vector<double>& w) {
  double sw = 0.0, ms = 0.0, mr = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sw += w[i];
    ms += w[i] * s[i];
    mr += w[i] * r[i];
  }
  if (!(sw > 0.0)) fail(ErrorCode::DegenerateFit, "all alignment weights are zero");
  ms /= sw;
  mr /= sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double ds = s[i] - ms;
    sxx += w[i] * ds * ds;
    sxy += w[i] * ds * (r[i] - mr);
  }
  if (!(sxx > 1e-18 * sw * (1.0 + ms * ms))) {
    fail(ErrorCode::DegenerateFit, "source depth is constant over the fit support");
  }
  const double a = sxy / sxx;
  return {a, mr - a * ms};
}

}  // namespace

NormalMap normals_from_depth(const DepthMap& depth, const CameraIntrinsics& k,
                             int window) {
  if (window < 3 || window % 2 == 0) {
    fail(ErrorCode::Config, "normal window must be odd and >= 3, got " +
                                std::to_string(window));
  }
  k.validate();
  if (!depth.same_shape(k.width, k.height)) {
    fail(ErrorCode::Config, "depth map size does not match intrinsics");
  }
  if (depth.valid_count() < static_cast<std::size_t>(window)) {
    fail(ErrorCode::InsufficientData, "too few valid depth pixels for normals");
  }

  const int half = window / 2;
  const int w = depth.width();
  const int h = depth.height();

  // Backproject once; the window fits reuse the points.
  std::vector<Vec3> points(depth.size());
  std::vector<char> valid(depth.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (depth.valid(x, y)) {
        points[static_cast<std::size_t>(y) * w + x] =
            backproject(Vec2(x, y), depth.at(x, y), k);
        valid[static_cast<std::size_t>(y) * w + x] = 1;
      }
    }
  }

  NormalMap normals(w, h);
  Eigen::SelfAdjointEigenSolver<Mat3> solver;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!valid[static_cast<std::size_t>(y) * w + x]) continue;
      Vec3 mean = Vec3::Zero();
      int n = 0;
      for (int v = std::max(0, y - half); v <= std::min(h - 1, y + half); ++v) {
        for (int u = std::max(0, x - half); u <= std::min(w - 1, x + half); ++u) {
          const std::size_t i = static_cast<std::size_t>(v) * w + u;
          if (valid[i]) {
            mean += points[i];
            ++n;
          }
        }
      }
      if (n < kMinPlanePoints) continue;
      mean /= n;
      Mat3 cov = Mat3::Zero();
      for (int v = std::max(0, y - half); v <= std::min(h - 1, y + half); ++v) {
        for (int u = std::max(0, x - half); u <= std::min(w - 1, x + half); ++u) {
          const std::size_t i = static_cast<std::size_t>(v) * w + u;
          if (valid[i]) {
            const Vec3 d = points[i] - mean;
            cov.noalias() += d * d.transpose();
          }
        }
      }
      solver.computeDirect(cov);
      const Vec3 ev = solver.eigenvalues();
      // Collinear support leaves the plane orientation undetermined.
      if (!(ev[2] > 0.0) || ev[1] <= 1e-10 * ev[2]) continue;
      Vec3 normal = solver.eigenvectors().col(0).normalized();
      const Vec3 ray = k.inverse_matrix() * Vec3(x, y, 1.0);
      const double facing = normal.dot(ray.normalized());
      if (std::abs(facing) < 1e-9) continue;
      if (facing > 0.0) normal = -normal;
      normals.at(x, y) = normal;
    }
  }
  return normals;
}

AffineDepthAlignment align_depth_affine(const DepthMap& src, const DepthMap& ref,
                                        int robust_iters) {
  if (!src.same_shape(ref)) {
    fail(ErrorCode::Config, "depth maps to align differ in size");
  }
  std::vector<double> s, r;
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      if (src.valid(x, y) && ref.valid(x, y)) {
        s.push_back(src.at(x, y));
        r.push_back(ref.at(x, y));
      }
    }
  }
  if (s.size() < static_cast<std::size_t>(kMinAlignPixels)) {
    fail(ErrorCode::InsufficientData,
         "need at least 16 jointly valid pixels, found " + std::to_string(s.size()));
  }

  std::vector<double> weights(s.size(), 1.0);
  WeightedLine fit = weighted_fit(s, r, weights);

  // Scale floor keeps exact fits from collapsing the Tukey window to zero.
  const double ref_level = lower_median(r);
  const double sigma_floor = 1e-12 * (1.0 + std::abs(ref_level));
  std::vector<double> residuals(s.size());
  for (int iter = 0; iter < robust_iters; ++iter) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      residuals[i] = std::abs(fit.scale * s[i] + fit.shift - r[i]);
    }
    const double sigma = std::max(kMadToSigma * lower_median(residuals), sigma_floor);
    const double c = kTukeyC * sigma;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double u = residuals[i] / c;
      weights[i] = u < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
    }
    const WeightedLine next = weighted_fit(s, r, weights);
    const bool settled = std::abs(next.scale - fit.scale) <= 1e-15 * std::abs(fit.scale) &&
                         std::abs(next.shift - fit.shift) <= 1e-15 * (1.0 + std::abs(fit.shift));
    fit = next;
    if (settled) break;
  }
  if (!(fit.scale > 0.0)) {
    fail(ErrorCode::DegenerateFit, "alignment produced a non-positive scale");
  }

  AffineDepthAlignment out{fit.scale, fit.shift, DepthMap(src.width(), src.height())};
  auto in = src.data();
  auto dst = out.aligned.data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (DepthMap::valid_value(in[i])) {
      const double v = fit.scale * in[i] + fit.shift;
      if (DepthMap::valid_value(v)) dst[i] = v;
    }
  }
  return out;
}

}  // namespace cvb
