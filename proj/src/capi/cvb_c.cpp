#include "cvb/cvb.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <new>
#include <string>
#include <variant>

#include "cvb/covisibility.hpp"
#include "cvb/criteria.hpp"
#include "cvb/depth_normals.hpp"
#include "cvb/error.hpp"
#include "cvb/pipeline.hpp"
#include "cvb/pose_eval.hpp"
#include "cvb/raster.hpp"
#include "cvb/trajectory_align.hpp"

struct cvb_context {
  std::string last_error;
  int threads = 1;
  cvb_log_fn log = nullptr;
  void* log_user = nullptr;
};

struct cvb_raster {
  std::variant<cvb::DepthMap, cvb::NormalMap, cvb::CovisibilityMap> image;
};

namespace {

using namespace cvb;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct InvalidArgument {
  std::string message;
};

cvb_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Domain: return CVB_ERR_DOMAIN;
    case ErrorCode::BehindCamera: return CVB_ERR_BEHIND_CAMERA;
    case ErrorCode::Config: return CVB_ERR_CONFIG;
    case ErrorCode::InsufficientData: return CVB_ERR_INSUFFICIENT_DATA;
    case ErrorCode::DegenerateFit: return CVB_ERR_DEGENERATE_FIT;
    case ErrorCode::EmptyCovisibility: return CVB_ERR_EMPTY_COVISIBILITY;
    case ErrorCode::DegenerateConfiguration: return CVB_ERR_DEGENERATE_CONFIGURATION;
    case ErrorCode::NoModelFound: return CVB_ERR_NO_MODEL_FOUND;
    case ErrorCode::InsufficientMatches: return CVB_ERR_INSUFFICIENT_MATCHES;
    case ErrorCode::DegenerateGeometry: return CVB_ERR_DEGENERATE_GEOMETRY;
    case ErrorCode::AmbiguousDecomposition: return CVB_ERR_AMBIGUOUS_DECOMPOSITION;
    case ErrorCode::ScaleUnrecoverable: return CVB_ERR_SCALE_UNRECOVERABLE;
    case ErrorCode::Io: return CVB_ERR_IO;
    case ErrorCode::Format: return CVB_ERR_FORMAT;
  }
  return CVB_ERR_INTERNAL;
}

// Runs fn, translating every exception into a status and a context message.
template <typename Fn>
cvb_status guarded(cvb_context* ctx, Fn&& fn) {
  if (!ctx) return CVB_ERR_INVALID_ARGUMENT;
  ctx->last_error.clear();
  cvb_status status = CVB_OK;
  try {
    fn();
    return CVB_OK;
  } catch (const InvalidArgument& e) {
    ctx->last_error = e.message;
    status = CVB_ERR_INVALID_ARGUMENT;
  } catch (const Error& e) {
    ctx->last_error = e.what();
    status = status_of(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    ctx->last_error = e.what();
    status = CVB_ERR_IO;
  } catch (const std::bad_alloc&) {
    ctx->last_error = "out of memory";
    status = CVB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    ctx->last_error = e.what();
    status = CVB_ERR_INTERNAL;
  } catch (...) {
    ctx->last_error = "unknown error";
    status = CVB_ERR_INTERNAL;
  }
  return status;
}

template <typename T>
const T& require(const T* p, const char* name) {
  if (!p) throw InvalidArgument{std::string(name) + " is NULL"};
  return *p;
}

template <typename T>
T& output(T* p, const char* name) {
  if (!p) throw InvalidArgument{std::string(name) + " is NULL"};
  return *p;
}

std::filesystem::path path_of(const char* p, const char* name) {
  if (!p || !*p) throw InvalidArgument{std::string(name) + " is required"};
  return p;
}

std::filesystem::path optional_path(const char* p) {
  return p && *p ? std::filesystem::path(p) : std::filesystem::path();
}

CameraIntrinsics intrinsics_of(const cvb_intrinsics& k) {
  return {k.fx, k.fy, k.cx, k.cy, k.width, k.height};
}

Mat3 mat_of(const double m[9]) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = m[i];
  return r;
}

void store(const Mat3& m, double out[9]) {
  for (int i = 0; i < 9; ++i) out[i] = m(i / 3, i % 3);
}

void store(const Vec3& v, double out[3]) {
  for (int i = 0; i < 3; ++i) out[i] = v[i];
}

RigidPose pose_of(const cvb_pose& p) {
  RigidPose pose;
  pose.rotation = mat_of(p.rotation);
  pose.center = Vec3(p.center[0], p.center[1], p.center[2]);
  return pose;
}

template <typename T>
const T& raster_as(const cvb_raster* r, const char* name) {
  const auto& raster = require(r, name);
  const T* image = std::get_if<T>(&raster.image);
  if (!image) throw InvalidArgument{std::string(name) + " has the wrong raster kind"};
  return *image;
}

cvb_raster* wrap(auto image) {
  return new cvb_raster{std::move(image)};
}

ViewInput view_of(const cvb_view& v, const char* name) {
  ViewInput out;
  out.intrinsics = intrinsics_of(v.intrinsics);
  out.pose = pose_of(v.pose);
  out.depth = raster_as<DepthMap>(v.depth, name);
  if (v.normals) {
    out.normals = raster_as<NormalMap>(v.normals, name);
  } else {
    out.normals = NormalMap(out.depth.width(), out.depth.height());
  }
  return out;
}

pipeline::StageContext stage_context(const cvb_context* ctx) {
  pipeline::StageContext sc;
  sc.threads = ctx->threads;
  if (ctx->log) {
    const cvb_log_fn fn = ctx->log;
    void* user = ctx->log_user;
    sc.log = [fn, user](pipeline::LogLevel level, std::string_view msg) {
      const std::string text(msg);
      fn(level == pipeline::LogLevel::Warning ? CVB_LOG_WARNING : CVB_LOG_INFO, text.c_str(),
         user);
    };
  }
  return sc;
}

AlignmentOptions align_options_of(const cvb_align_options& o) {
  AlignmentOptions a;
  a.threshold = o.threshold;
  a.max_iters = o.max_iters;
  a.confidence = o.confidence;
  a.max_local_rounds = o.max_local_rounds;
  a.seed = o.seed;
  return a;
}

PairEvalOptions pose_options_of(const cvb_pose_options& o) {
  PairEvalOptions p;
  p.essential.threshold_px = o.threshold_px;
  p.essential.max_iters = o.max_iters;
  p.essential.confidence = o.confidence;
  p.essential.seed = o.seed;
  p.rotation_fallback = o.rotation_fallback != 0;
  return p;
}

MissingPolicy policy_of(cvb_missing_policy p) {
  return p == CVB_MISSING_EXCLUDE ? MissingPolicy::Exclude : MissingPolicy::CountAsFailure;
}

}  // namespace

extern "C" {

const char* cvb_version(void) { return "0.1.0"; }

const char* cvb_status_string(cvb_status status) {
  switch (status) {
    case CVB_OK: return "ok";
    case CVB_ERR_DOMAIN: return "domain error";
    case CVB_ERR_BEHIND_CAMERA: return "point behind camera";
    case CVB_ERR_CONFIG: return "invalid configuration";
    case CVB_ERR_INSUFFICIENT_DATA: return "insufficient data";
    case CVB_ERR_DEGENERATE_FIT: return "degenerate fit";
    case CVB_ERR_EMPTY_COVISIBILITY: return "empty co-visibility";
    case CVB_ERR_DEGENERATE_CONFIGURATION: return "degenerate configuration";
    case CVB_ERR_NO_MODEL_FOUND: return "no model found";
    case CVB_ERR_INSUFFICIENT_MATCHES: return "insufficient matches";
    case CVB_ERR_DEGENERATE_GEOMETRY: return "degenerate geometry";
    case CVB_ERR_AMBIGUOUS_DECOMPOSITION: return "ambiguous decomposition";
    case CVB_ERR_SCALE_UNRECOVERABLE: return "scale unrecoverable";
    case CVB_ERR_IO: return "i/o error";
    case CVB_ERR_FORMAT: return "malformed input";
    case CVB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CVB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

cvb_status cvb_context_create(cvb_context** out) {
  if (!out) return CVB_ERR_INVALID_ARGUMENT;
  *out = new (std::nothrow) cvb_context();
  return *out ? CVB_OK : CVB_ERR_INTERNAL;
}

void cvb_context_destroy(cvb_context* ctx) { delete ctx; }

const char* cvb_last_error(const cvb_context* ctx) {
  return ctx ? ctx->last_error.c_str() : "";
}

cvb_status cvb_set_threads(cvb_context* ctx, int32_t threads) {
  return guarded(ctx, [&] {
    if (threads < 1) throw InvalidArgument{"threads must be >= 1"};
    ctx->threads = threads;
  });
}

void cvb_set_logger(cvb_context* ctx, cvb_log_fn fn, void* user) {
  if (!ctx) return;
  ctx->log = fn;
  ctx->log_user = user;
}

cvb_status cvb_pose_from_quaternion(cvb_context* ctx, const double q_wxyz[4],
                                    const double center[3], cvb_pose* out) {
  return guarded(ctx, [&] {
    require(q_wxyz, "q_wxyz");
    require(center, "center");
    auto& o = output(out, "out");
    const RigidPose p = RigidPose::from_quaternion(
        Eigen::Quaterniond(q_wxyz[0], q_wxyz[1], q_wxyz[2], q_wxyz[3]),
        Vec3(center[0], center[1], center[2]));
    store(p.rotation, o.rotation);
    store(p.center, o.center);
  });
}

cvb_status cvb_relative_pose_between(cvb_context* ctx, const cvb_pose* pose1,
                                     const cvb_pose* pose2, cvb_relative_pose* out) {
  return guarded(ctx, [&] {
    const RigidPose a = pose_of(require(pose1, "pose1"));
    const RigidPose b = pose_of(require(pose2, "pose2"));
    a.validate();
    b.validate();
    auto& o = output(out, "out");
    const RelativePose r = relative_pose(a, b);
    store(r.rotation, o.rotation);
    store(r.translation, o.translation);
  });
}

cvb_status cvb_backproject(cvb_context* ctx, const cvb_intrinsics* k, double px, double py,
                           double depth, double out_xyz[3]) {
  return guarded(ctx, [&] {
    const CameraIntrinsics ki = intrinsics_of(require(k, "k"));
    ki.validate();
    require(out_xyz, "out_xyz");
    store(backproject(Vec2(px, py), depth, ki), out_xyz);
  });
}

cvb_status cvb_project(cvb_context* ctx, const cvb_intrinsics* k, const double xyz[3],
                       double out_px[2]) {
  return guarded(ctx, [&] {
    const CameraIntrinsics ki = intrinsics_of(require(k, "k"));
    ki.validate();
    require(xyz, "xyz");
    require(out_px, "out_px");
    const Vec2 p = project(Vec3(xyz[0], xyz[1], xyz[2]), ki);
    out_px[0] = p.x();
    out_px[1] = p.y();
  });
}

cvb_status cvb_raster_from_depth(cvb_context* ctx, int32_t width, int32_t height,
                                 const double* samples, cvb_raster** out) {
  return guarded(ctx, [&] {
    require(samples, "samples");
    require(out, "out");
    if (width <= 0 || height <= 0) throw InvalidArgument{"raster size must be positive"};
    DepthMap d(width, height);
    auto data = d.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      data[i] = DepthMap::valid_value(samples[i]) ? samples[i] : kNaN;
    }
    *out = wrap(std::move(d));
  });
}

cvb_status cvb_raster_read(cvb_context* ctx, cvb_raster_kind kind, const char* path,
                           cvb_raster** out) {
  return guarded(ctx, [&] {
    const auto p = path_of(path, "path");
    require(out, "out");
    switch (kind) {
      case CVB_RASTER_DEPTH: *out = wrap(read_depth(p)); break;
      case CVB_RASTER_NORMAL: *out = wrap(read_normals(p)); break;
      case CVB_RASTER_COVIS: *out = wrap(read_covis(p)); break;
      default: throw InvalidArgument{"unknown raster kind"};
    }
  });
}

cvb_status cvb_raster_write(cvb_context* ctx, const cvb_raster* raster, const char* path) {
  return guarded(ctx, [&] {
    const auto p = path_of(path, "path");
    std::visit(
        [&](const auto& image) {
          using T = std::decay_t<decltype(image)>;
          if constexpr (std::is_same_v<T, DepthMap>) write_depth(p, image);
          else if constexpr (std::is_same_v<T, NormalMap>) write_normals(p, image);
          else write_covis(p, image);
        },
        require(raster, "raster").image);
  });
}

void cvb_raster_destroy(cvb_raster* raster) { delete raster; }

cvb_status cvb_raster_info(cvb_context* ctx, const cvb_raster* raster, cvb_raster_kind* kind,
                           int32_t* width, int32_t* height) {
  return guarded(ctx, [&] {
    const auto& r = require(raster, "raster");
    if (kind) *kind = static_cast<cvb_raster_kind>(r.image.index());
    std::visit(
        [&](const auto& image) {
          if (width) *width = image.width();
          if (height) *height = image.height();
        },
        r.image);
  });
}

cvb_status cvb_raster_copy(cvb_context* ctx, const cvb_raster* raster, double* out,
                           size_t capacity) {
  return guarded(ctx, [&] {
    require(out, "out");
    std::visit(
        [&](const auto& image) {
          using T = std::decay_t<decltype(image)>;
          const std::size_t channels = std::is_same_v<T, NormalMap> ? 3 : 1;
          if (capacity < image.size() * channels) throw InvalidArgument{"buffer too small"};
          std::size_t i = 0;
          for (const auto& v : image.data()) {
            if constexpr (std::is_same_v<T, NormalMap>) {
              for (int c = 0; c < 3; ++c) out[i++] = v[c];
            } else {
              out[i++] = static_cast<double>(v);
            }
          }
        },
        require(raster, "raster").image);
  });
}

cvb_status cvb_raster_count_label(cvb_context* ctx, const cvb_raster* covis, int32_t label,
                                  uint64_t* out) {
  return guarded(ctx, [&] {
    const auto& c = raster_as<CovisibilityMap>(covis, "covis");
    if (label < 0 || label > 3) throw InvalidArgument{"label must be in [0, 3]"};
    output(out, "out") = c.count(static_cast<CovisLabel>(label));
  });
}

cvb_status cvb_normals_from_depth(cvb_context* ctx, const cvb_raster* depth,
                                  const cvb_intrinsics* k, int32_t window, cvb_raster** out) {
  return guarded(ctx, [&] {
    const auto& d = raster_as<DepthMap>(depth, "depth");
    const CameraIntrinsics ki = intrinsics_of(require(k, "k"));
    ki.validate();
    require(out, "out");
    *out = wrap(normals_from_depth(d, ki, window));
  });
}

cvb_status cvb_align_depth_affine(cvb_context* ctx, const cvb_raster* src,
                                  const cvb_raster* ref, double* scale, double* shift,
                                  cvb_raster** aligned) {
  return guarded(ctx, [&] {
    auto result = align_depth_affine(raster_as<DepthMap>(src, "src"),
                                     raster_as<DepthMap>(ref, "ref"));
    if (scale) *scale = result.scale;
    if (shift) *shift = result.shift;
    if (aligned) *aligned = wrap(std::move(result.aligned));
  });
}

cvb_status cvb_covisibility(cvb_context* ctx, const cvb_view* view1, const cvb_view* view2,
                            double tau, double epsilon_deg, cvb_raster** covis12,
                            cvb_raster** covis21) {
  return guarded(ctx, [&] {
    require(covis12, "covis12");
    require(covis21, "covis21");
    const ViewInput a = view_of(require(view1, "view1"), "view1");
    const ViewInput b = view_of(require(view2, "view2"), "view2");
    CovisPair pair = covisibility_pair(a, b, CovisParams{tau, epsilon_deg});
    *covis12 = wrap(std::move(pair.forward));
    *covis21 = wrap(std::move(pair.backward));
  });
}

cvb_status cvb_criteria_from_maps(cvb_context* ctx, const cvb_view* view_a,
                                  const cvb_view* view_b, const cvb_raster* covis_ab,
                                  const cvb_raster* covis_ba, cvb_criteria* out) {
  return guarded(ctx, [&] {
    auto& o = output(out, "out");
    const ViewInput a = view_of(require(view_a, "view_a"), "view_a");
    const ViewInput b = view_of(require(view_b, "view_b"), "view_b");
    const CovisPair covis{raster_as<CovisibilityMap>(covis_ab, "covis_ab"),
                          raster_as<CovisibilityMap>(covis_ba, "covis_ba")};
    const CriteriaResult r = criteria_from_maps(a, b, covis);
    o.defined = r.criteria.has_value() ? 1 : 0;
    o.omega = r.omega;
    o.delta = r.criteria ? r.criteria->delta : kNaN;
    o.theta_deg = r.criteria ? r.criteria->theta_deg : kNaN;
    o.covis_ab = r.covis_ab;
    o.covis_ba = r.covis_ba;
  });
}

void cvb_align_options_init(cvb_align_options* options) {
  if (!options) return;
  const AlignmentOptions d;
  *options = {d.threshold, d.max_iters, d.confidence, d.max_local_rounds, d.seed};
}

cvb_status cvb_align_sim3(cvb_context* ctx, const double* src, const double* dst, size_t n,
                          const cvb_align_options* options, cvb_sim3_result* out,
                          uint8_t* inlier_mask) {
  return guarded(ctx, [&] {
    require(src, "src");
    require(dst, "dst");
    auto& o = output(out, "out");
    std::vector<Vec3> s(n), d(n);
    for (size_t i = 0; i < n; ++i) {
      s[i] = Vec3(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
      d[i] = Vec3(dst[3 * i], dst[3 * i + 1], dst[3 * i + 2]);
    }
    const AlignmentResult r =
        lo_ransac_align(s, d, align_options_of(require(options, "options")));
    o.scale = r.transform.scale;
    store(r.transform.rotation, o.rotation);
    store(r.transform.translation, o.translation);
    o.inlier_count = r.inlier_count;
    o.iterations = r.iterations;
    if (inlier_mask) {
      for (size_t i = 0; i < n; ++i) inlier_mask[i] = r.inlier_mask[i] ? 1 : 0;
    }
  });
}

void cvb_pose_options_init(cvb_pose_options* options) {
  if (!options) return;
  const PairEvalOptions d;
  *options = {d.essential.threshold_px, d.essential.max_iters, d.essential.confidence,
              d.essential.seed, d.rotation_fallback ? 1 : 0};
}

cvb_status cvb_evaluate_matches(cvb_context* ctx, const double* points_a, const double* points_b,
                                size_t n, const cvb_intrinsics* k1, const cvb_intrinsics* k2,
                                const cvb_raster* depth1, const cvb_relative_pose* truth,
                                const cvb_pose_options* options, cvb_eval_result* out) {
  return guarded(ctx, [&] {
    if (n > 0) {
      require(points_a, "points_a");
      require(points_b, "points_b");
    }
    auto& o = output(out, "out");
    MatchSet m;
    for (size_t i = 0; i < n; ++i) {
      m.points_a.emplace_back(points_a[2 * i], points_a[2 * i + 1]);
      m.points_b.emplace_back(points_b[2 * i], points_b[2 * i + 1]);
    }
    const auto& t = require(truth, "truth");
    const RelativePose rel{mat_of(t.rotation), Vec3(t.translation[0], t.translation[1],
                                                     t.translation[2])};
    const CameraIntrinsics ka = intrinsics_of(require(k1, "k1"));
    const CameraIntrinsics kb = intrinsics_of(require(k2, "k2"));
    ka.validate();
    kb.validate();
    const EvalRecord r = evaluate_matches(m, ka, kb, raster_as<DepthMap>(depth1, "depth1"), rel,
                                          pose_options_of(require(options, "options")));
    o.success = r.success ? 1 : 0;
    o.failure = to_string(r.failure).data();
    o.rotation_err_deg = r.rotation_err_deg.value_or(kNaN);
    o.translation_err_m = r.translation_err_m.value_or(kNaN);
    o.inliers = r.inliers;
  });
}

void cvb_align_stage_init(cvb_align_stage* stage) {
  if (!stage) return;
  *stage = {};
  cvb_align_options_init(&stage->options);
}

void cvb_covis_stage_init(cvb_covis_stage* stage) {
  if (!stage) return;
  *stage = {};
  const CovisParams d;
  stage->tau = d.tau;
  stage->epsilon_deg = d.epsilon_deg;
  stage->normal_window = kDefaultNormalWindow;
}

void cvb_criteria_stage_init(cvb_criteria_stage* stage) {
  if (stage) *stage = {};
}

void cvb_build_stage_init(cvb_build_stage* stage) {
  if (!stage) return;
  *stage = {};
  const pipeline::BuildStage d;
  stage->target = d.target;
  stage->seed = d.seed;
}

void cvb_eval_stage_init(cvb_eval_stage* stage) {
  if (!stage) return;
  *stage = {};
  cvb_pose_options_init(&stage->options);
  stage->options.seed = pipeline::EvalStage{}.seed;
  stage->missing = CVB_MISSING_AS_FAILURE;
}

void cvb_report_stage_init(cvb_report_stage* stage) {
  if (stage) *stage = {};
}

void cvb_synth_stage_init(cvb_synth_stage* stage) {
  if (!stage) return;
  *stage = {};
  stage->suite = "default";
  stage->seed = 1;
}

cvb_status cvb_run_align(cvb_context* ctx, const cvb_align_stage* stage) {
  return guarded(ctx, [&] {
    const auto& s = require(stage, "stage");
    pipeline::AlignStage a;
    a.reconstructed = path_of(s.reconstructed, "reconstructed");
    a.ground_truth = path_of(s.ground_truth, "ground_truth");
    a.out_cameras = path_of(s.out_cameras, "out_cameras");
    a.out_report = path_of(s.out_report, "out_report");
    a.options = align_options_of(s.options);
    pipeline::run_align(a, stage_context(ctx));
  });
}

cvb_status cvb_run_covis(cvb_context* ctx, const cvb_covis_stage* stage) {
  return guarded(ctx, [&] {
    const auto& s = require(stage, "stage");
    pipeline::CovisStage c;
    c.cameras = path_of(s.cameras, "cameras");
    c.pairs = path_of(s.pairs, "pairs");
    c.depth_dir = path_of(s.depth_dir, "depth_dir");
    c.normal_dir = optional_path(s.normal_dir);
    c.out_dir = path_of(s.out_dir, "out_dir");
    c.params = {s.tau, s.epsilon_deg};
    c.normal_window = s.normal_window;
    pipeline::run_covis(c, stage_context(ctx));
  });
}

cvb_status cvb_run_criteria(cvb_context* ctx, const cvb_criteria_stage* stage) {
  return guarded(ctx, [&] {
    const auto& s = require(stage, "stage");
    pipeline::CriteriaStage c;
    c.cameras = path_of(s.cameras, "cameras");
    c.pairs = path_of(s.pairs, "pairs");
    c.depth_dir = path_of(s.depth_dir, "depth_dir");
    c.covis_dir = path_of(s.covis_dir, "covis_dir");
    c.out = path_of(s.out, "out");
    pipeline::run_criteria(c, stage_context(ctx));
  });
}

cvb_status cvb_run_build(cvb_context* ctx, const cvb_build_stage* stage) {
  return guarded(ctx, [&] {
    const auto& s = require(stage, "stage");
    pipeline::BuildStage b;
    b.criteria = path_of(s.criteria, "criteria");
    b.out = path_of(s.out, "out");
    b.target = s.target;
    b.seed = s.seed;
    b.all_boxes = s.all_boxes != 0;
    pipeline::run_build(b, stage_context(ctx));
  });
}

cvb_status cvb_run_eval(cvb_context* ctx, const cvb_eval_stage* stage) {
  return guarded(ctx, [&] {
    const auto& s = require(stage, "stage");
    pipeline::EvalStage e;
    e.manifest = path_of(s.manifest, "manifest");
    e.ground_truth = path_of(s.ground_truth, "ground_truth");
    e.matches = optional_path(s.matches);
    e.poses = optional_path(s.poses);
    e.depth_dir = optional_path(s.depth_dir);
    e.pairs = optional_path(s.pairs);
    e.out_dir = path_of(s.out_dir, "out_dir");
    if (s.method && *s.method) e.method = s.method;
    e.options = pose_options_of(s.options);
    e.seed = s.options.seed;
    e.missing = policy_of(s.missing);
    pipeline::run_eval(e, stage_context(ctx));
  });
}

cvb_status cvb_run_report(cvb_context* ctx, const cvb_report_stage* stage) {
  return guarded(ctx, [&] {
    const auto& s = require(stage, "stage");
    pipeline::ReportStage r;
    r.manifest = path_of(s.manifest, "manifest");
    r.out_dir = path_of(s.out_dir, "out_dir");
    r.missing = policy_of(s.missing);
    if (s.count > 0) {
      require(s.methods, "methods");
      require(s.records, "records");
    }
    for (size_t i = 0; i < s.count; ++i) {
      if (!s.methods[i]) throw InvalidArgument{"methods[" + std::to_string(i) + "] is NULL"};
      r.records.emplace_back(s.methods[i], path_of(s.records[i], "records"));
    }
    pipeline::run_report(r, stage_context(ctx));
  });
}

cvb_status cvb_run_synth(cvb_context* ctx, const cvb_synth_stage* stage) {
  return guarded(ctx, [&] {
    const auto& s = require(stage, "stage");
    pipeline::SynthStage y;
    if (s.suite && *s.suite) y.suite = s.suite;
    y.seed = s.seed;
    y.out_dir = path_of(s.out_dir, "out_dir");
    pipeline::run_synth(y, stage_context(ctx));
  });
}

}  // extern "C"
