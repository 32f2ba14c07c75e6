/* C interface to the co-visibility benchmark library.
 *
 * Every function returns a cvb_status. On failure the context keeps a
 * message retrievable with cvb_last_error(). Matrices are row-major.
 * Objects returned through out-pointers are owned by the caller and released
 * with the matching *_destroy function. */
#ifndef CVB_CVB_H
#define CVB_CVB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CVB_API __declspec(dllexport)
#else
#define CVB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cvb_status {
  CVB_OK = 0,
  CVB_ERR_DOMAIN = 1,
  CVB_ERR_BEHIND_CAMERA = 2,
  CVB_ERR_CONFIG = 3,
  CVB_ERR_INSUFFICIENT_DATA = 4,
  CVB_ERR_DEGENERATE_FIT = 5,
  CVB_ERR_EMPTY_COVISIBILITY = 6,
  CVB_ERR_DEGENERATE_CONFIGURATION = 7,
  CVB_ERR_NO_MODEL_FOUND = 8,
  CVB_ERR_INSUFFICIENT_MATCHES = 9,
  CVB_ERR_DEGENERATE_GEOMETRY = 10,
  CVB_ERR_AMBIGUOUS_DECOMPOSITION = 11,
  CVB_ERR_SCALE_UNRECOVERABLE = 12,
  CVB_ERR_IO = 13,
  CVB_ERR_FORMAT = 14,
  CVB_ERR_INVALID_ARGUMENT = 15,
  CVB_ERR_INTERNAL = 16
} cvb_status;

typedef struct cvb_context cvb_context;
typedef struct cvb_raster cvb_raster;

typedef enum cvb_log_level { CVB_LOG_INFO = 0, CVB_LOG_WARNING = 1 } cvb_log_level;
typedef void (*cvb_log_fn)(cvb_log_level level, const char* message, void* user);

CVB_API const char* cvb_version(void);
CVB_API const char* cvb_status_string(cvb_status status);

CVB_API cvb_status cvb_context_create(cvb_context** out);
CVB_API void cvb_context_destroy(cvb_context* ctx);
/* Message of the last failed call on this context; "" when none. */
CVB_API const char* cvb_last_error(const cvb_context* ctx);
/* Worker threads for the stage runners; must be >= 1. */
CVB_API cvb_status cvb_set_threads(cvb_context* ctx, int32_t threads);
CVB_API void cvb_set_logger(cvb_context* ctx, cvb_log_fn fn, void* user);

/* ---- geometry ---- */

typedef struct cvb_intrinsics {
  double fx, fy, cx, cy;
  int32_t width, height;
} cvb_intrinsics;

/* World-from-camera: X_world = rotation * X_cam + center. */
typedef struct cvb_pose {
  double rotation[9];
  double center[3];
} cvb_pose;

/* Camera-2 to camera-1: X1 = rotation * X2 + translation. */
typedef struct cvb_relative_pose {
  double rotation[9];
  double translation[3];
} cvb_relative_pose;

CVB_API cvb_status cvb_pose_from_quaternion(cvb_context* ctx, const double q_wxyz[4],
                                            const double center[3], cvb_pose* out);
CVB_API cvb_status cvb_relative_pose_between(cvb_context* ctx, const cvb_pose* pose1,
                                             const cvb_pose* pose2, cvb_relative_pose* out);
CVB_API cvb_status cvb_backproject(cvb_context* ctx, const cvb_intrinsics* k, double px,
                                   double py, double depth, double out_xyz[3]);
CVB_API cvb_status cvb_project(cvb_context* ctx, const cvb_intrinsics* k,
                               const double xyz[3], double out_px[2]);

/* ---- rasters ---- */

typedef enum cvb_raster_kind {
  CVB_RASTER_DEPTH = 0,
  CVB_RASTER_NORMAL = 1,
  CVB_RASTER_COVIS = 2
} cvb_raster_kind;

/* Depth from width*height samples (row-major); NaN or <= 0 is invalid. */
CVB_API cvb_status cvb_raster_from_depth(cvb_context* ctx, int32_t width, int32_t height,
                                         const double* samples, cvb_raster** out);
CVB_API cvb_status cvb_raster_read(cvb_context* ctx, cvb_raster_kind kind, const char* path,
                                   cvb_raster** out);
CVB_API cvb_status cvb_raster_write(cvb_context* ctx, const cvb_raster* raster,
                                    const char* path);
CVB_API void cvb_raster_destroy(cvb_raster* raster);
CVB_API cvb_status cvb_raster_info(cvb_context* ctx, const cvb_raster* raster,
                                   cvb_raster_kind* kind, int32_t* width, int32_t* height);
/* Copies width*height*channels samples (1 for depth and covis, 3 for normals). */
CVB_API cvb_status cvb_raster_copy(cvb_context* ctx, const cvb_raster* raster, double* out,
                                   size_t capacity);
/* Number of covis pixels carrying label (0 invalid, 1 co-visible, 2 occluded, 3 out of view). */
CVB_API cvb_status cvb_raster_count_label(cvb_context* ctx, const cvb_raster* covis,
                                          int32_t label, uint64_t* out);

/* ---- depth and normals ---- */

CVB_API cvb_status cvb_normals_from_depth(cvb_context* ctx, const cvb_raster* depth,
                                          const cvb_intrinsics* k, int32_t window,
                                          cvb_raster** out);
CVB_API cvb_status cvb_align_depth_affine(cvb_context* ctx, const cvb_raster* src,
                                          const cvb_raster* ref, double* scale,
                                          double* shift, cvb_raster** aligned);

/* ---- co-visibility and criteria ---- */

typedef struct cvb_view {
  cvb_intrinsics intrinsics;
  cvb_pose pose;
  const cvb_raster* depth;
  const cvb_raster* normals; /* may be NULL: the facing test is skipped */
} cvb_view;

CVB_API cvb_status cvb_covisibility(cvb_context* ctx, const cvb_view* view1,
                                    const cvb_view* view2, double tau, double epsilon_deg,
                                    cvb_raster** covis12, cvb_raster** covis21);

typedef struct cvb_criteria {
  int32_t defined; /* 0 when no pixel is co-visible; delta and theta are then NaN */
  double omega;
  double delta;
  double theta_deg;
  uint64_t covis_ab;
  uint64_t covis_ba;
} cvb_criteria;

CVB_API cvb_status cvb_criteria_from_maps(cvb_context* ctx, const cvb_view* view_a,
                                          const cvb_view* view_b, const cvb_raster* covis_ab,
                                          const cvb_raster* covis_ba, cvb_criteria* out);

/* ---- trajectory alignment ---- */

typedef struct cvb_align_options {
  double threshold;
  int32_t max_iters;
  double confidence;
  int32_t max_local_rounds;
  uint64_t seed;
} cvb_align_options;

typedef struct cvb_sim3_result {
  double scale;
  double rotation[9];
  double translation[3];
  uint64_t inlier_count;
  int32_t iterations;
} cvb_sim3_result;

CVB_API void cvb_align_options_init(cvb_align_options* options);
/* src and dst hold n xyz triples; inlier_mask (n bytes) may be NULL. */
CVB_API cvb_status cvb_align_sim3(cvb_context* ctx, const double* src, const double* dst,
                                  size_t n, const cvb_align_options* options,
                                  cvb_sim3_result* out, uint8_t* inlier_mask);

/* ---- pose evaluation ---- */

typedef struct cvb_pose_options {
  double threshold_px;
  int32_t max_iters;
  double confidence;
  uint64_t seed;
  int32_t rotation_fallback;
} cvb_pose_options;

typedef struct cvb_eval_result {
  int32_t success;
  const char* failure; /* static string, "none" on success */
  double rotation_err_deg;  /* NaN when no pose was produced */
  double translation_err_m; /* NaN when no pose was produced */
  uint64_t inliers;
} cvb_eval_result;

CVB_API void cvb_pose_options_init(cvb_pose_options* options);
/* points_a and points_b hold n pixel pairs (x, y). */
CVB_API cvb_status cvb_evaluate_matches(cvb_context* ctx, const double* points_a,
                                        const double* points_b, size_t n,
                                        const cvb_intrinsics* k1, const cvb_intrinsics* k2,
                                        const cvb_raster* depth1,
                                        const cvb_relative_pose* truth,
                                        const cvb_pose_options* options,
                                        cvb_eval_result* out);

/* ---- file-based pipeline stages ---- */

typedef enum cvb_missing_policy {
  CVB_MISSING_AS_FAILURE = 0,
  CVB_MISSING_EXCLUDE = 1
} cvb_missing_policy;

typedef struct cvb_align_stage {
  const char* reconstructed;
  const char* ground_truth;
  const char* out_cameras;
  const char* out_report;
  cvb_align_options options;
} cvb_align_stage;

typedef struct cvb_covis_stage {
  const char* cameras;
  const char* pairs;
  const char* depth_dir;
  const char* normal_dir; /* NULL: normals are fitted from depth */
  const char* out_dir;
  double tau;
  double epsilon_deg;
  int32_t normal_window;
} cvb_covis_stage;

typedef struct cvb_criteria_stage {
  const char* cameras;
  const char* pairs;
  const char* depth_dir;
  const char* covis_dir;
  const char* out;
} cvb_criteria_stage;

typedef struct cvb_build_stage {
  const char* criteria;
  const char* out;
  uint64_t target;
  uint64_t seed;
  int32_t all_boxes;
} cvb_build_stage;

typedef struct cvb_eval_stage {
  const char* manifest;
  const char* ground_truth;
  const char* matches; /* exactly one of matches and poses */
  const char* poses;
  const char* depth_dir;
  const char* pairs; /* optional */
  const char* out_dir;
  const char* method;
  cvb_pose_options options;
  cvb_missing_policy missing;
} cvb_eval_stage;

typedef struct cvb_report_stage {
  const char* manifest;
  const char* const* methods;
  const char* const* records;
  size_t count;
  const char* out_dir;
  cvb_missing_policy missing;
} cvb_report_stage;

typedef struct cvb_synth_stage {
  const char* suite;
  uint64_t seed;
  const char* out_dir;
} cvb_synth_stage;

CVB_API void cvb_align_stage_init(cvb_align_stage* stage);
CVB_API void cvb_covis_stage_init(cvb_covis_stage* stage);
CVB_API void cvb_criteria_stage_init(cvb_criteria_stage* stage);
CVB_API void cvb_build_stage_init(cvb_build_stage* stage);
CVB_API void cvb_eval_stage_init(cvb_eval_stage* stage);
CVB_API void cvb_report_stage_init(cvb_report_stage* stage);
CVB_API void cvb_synth_stage_init(cvb_synth_stage* stage);

CVB_API cvb_status cvb_run_align(cvb_context* ctx, const cvb_align_stage* stage);
CVB_API cvb_status cvb_run_covis(cvb_context* ctx, const cvb_covis_stage* stage);
CVB_API cvb_status cvb_run_criteria(cvb_context* ctx, const cvb_criteria_stage* stage);
CVB_API cvb_status cvb_run_build(cvb_context* ctx, const cvb_build_stage* stage);
CVB_API cvb_status cvb_run_eval(cvb_context* ctx, const cvb_eval_stage* stage);
CVB_API cvb_status cvb_run_report(cvb_context* ctx, const cvb_report_stage* stage);
CVB_API cvb_status cvb_run_synth(cvb_context* ctx, const cvb_synth_stage* stage);

#ifdef __cplusplus
}
#endif

#endif /* CVB_CVB_H */
