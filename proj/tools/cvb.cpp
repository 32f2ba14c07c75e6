// Command line front end. Talks to the library only through the C API.
#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "cvb/cvb.h"

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

void log_line(cvb_log_level level, const char* message, void* user) {
  if (*static_cast<bool*>(user) && level == CVB_LOG_INFO) return;
  std::string escaped;
  for (const char* p = message; *p; ++p) {
    if (*p == '"' || *p == '\\') escaped += '\\';
    escaped += *p;
  }
  std::cerr << "level=" << (level == CVB_LOG_WARNING ? "warn" : "info") << " msg=\"" << escaped
            << "\"\n";
}

int exit_code(cvb_context* ctx, cvb_status status) {
  if (status == CVB_OK) return 0;
  std::cerr << "error: " << cvb_status_string(status) << ": " << cvb_last_error(ctx) << "\n";
  return status == CVB_ERR_CONFIG || status == CVB_ERR_INVALID_ARGUMENT ? kExitUsage : kExitData;
}

const char* or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

int threads_from_env() {
  const char* env = std::getenv("CVB_THREADS");
  if (!env || !*env) return 1;
  try {
    const int n = std::stoi(env);
    return n >= 1 ? n : 1;
  } catch (const std::exception&) {
    return 1;
  }
}

const std::map<std::string, cvb_missing_policy> kMissing{{"fail", CVB_MISSING_AS_FAILURE},
                                                         {"exclude", CVB_MISSING_EXCLUDE}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-visibility benchmark toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  bool quiet = false;
  app.add_option("--threads", threads, "Worker threads (default: $CVB_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", quiet, "Only log warnings");

  // align
  cvb_align_stage align;
  cvb_align_stage_init(&align);
  std::string colmap, gt_poses, aligned_out = "aligned_cameras.json",
                                align_report = "alignment_report.json";
  auto* align_cmd = app.add_subcommand("align", "Fit a similarity from reconstructed to metric poses");
  align_cmd->add_option("--colmap", colmap, "Reconstructed poses (cameras.json schema)")
      ->required()->check(CLI::ExistingFile);
  align_cmd->add_option("--gt", gt_poses, "Ground-truth poses on the z = 0 plane")
      ->required()->check(CLI::ExistingFile);
  align_cmd->add_option("--out", aligned_out, "Aligned inlier cameras")->capture_default_str();
  align_cmd->add_option("--report", align_report, "Alignment report")->capture_default_str();
  align_cmd->add_option("--threshold", align.options.threshold, "Inlier threshold in meters")
      ->check(CLI::PositiveNumber)->capture_default_str();
  align_cmd->add_option("--max-iters", align.options.max_iters)->check(CLI::Range(1, 10000000))
      ->capture_default_str();
  align_cmd->add_option("--confidence", align.options.confidence)
      ->check(CLI::Range(0.5, 0.999999))->capture_default_str();
  align_cmd->add_option("--seed", align.options.seed)->capture_default_str();

  // covis
  cvb_covis_stage covis;
  cvb_covis_stage_init(&covis);
  std::string cameras, pairs, depth_dir, normal_dir, covis_out;
  auto* covis_cmd = app.add_subcommand("covis", "Co-visibility maps for every pair");
  covis_cmd->add_option("--cameras", cameras)->required()->check(CLI::ExistingFile);
  covis_cmd->add_option("--pairs", pairs)->required()->check(CLI::ExistingFile);
  covis_cmd->add_option("--depth-dir", depth_dir)->required()->check(CLI::ExistingDirectory);
  covis_cmd->add_option("--normal-dir", normal_dir, "Normal maps (default: fitted from depth)")
      ->check(CLI::ExistingDirectory);
  covis_cmd->add_option("--out-dir", covis_out)->required();
  covis_cmd->add_option("--tau", covis.tau, "Relative depth tolerance")
      ->check(CLI::Range(1e-6, 1.0))->capture_default_str();
  covis_cmd->add_option("--epsilon", covis.epsilon_deg, "Normal margin in degrees")
      ->check(CLI::Range(0.0, 89.0))->capture_default_str();
  covis_cmd->add_option("--normal-window", covis.normal_window)->check(CLI::Range(3, 31))
      ->capture_default_str();

  // criteria
  std::string covis_dir, criteria_out;
  std::string crit_cameras, crit_pairs, crit_depth;
  auto* criteria_cmd = app.add_subcommand("criteria", "Overlap, scale ratio and viewpoint angle");
  criteria_cmd->add_option("--cameras", crit_cameras)->required()->check(CLI::ExistingFile);
  criteria_cmd->add_option("--pairs", crit_pairs)->required()->check(CLI::ExistingFile);
  criteria_cmd->add_option("--depth-dir", crit_depth)->required()->check(CLI::ExistingDirectory);
  criteria_cmd->add_option("--covis-dir", covis_dir)->required()->check(CLI::ExistingDirectory);
  criteria_cmd->add_option("--out", criteria_out)->required();

  // build
  cvb_build_stage build;
  cvb_build_stage_init(&build);
  std::string build_criteria, manifest_out;
  bool all_boxes = false;
  auto* build_cmd = app.add_subcommand("build", "Sample a difficulty-binned manifest");
  build_cmd->add_option("--criteria", build_criteria)->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--out", manifest_out)->required();
  build_cmd->add_option("--target", build.target, "Pairs per box")
      ->check(CLI::Range(1, 100000000))->capture_default_str();
  build_cmd->add_option("--seed", build.seed)->capture_default_str();
  build_cmd->add_flag("--all-boxes", all_boxes, "Admit every grid cell, not only the 33 valid ones");

  // eval
  cvb_eval_stage eval;
  cvb_eval_stage_init(&eval);
  std::string manifest, gt_cameras, matches, poses, eval_depth, eval_pairs, eval_out = ".",
                                                                            method = "method";
  std::string eval_missing = "fail";
  bool no_fallback = false;
  auto* eval_cmd = app.add_subcommand("eval", "Estimate and score relative poses");
  eval_cmd->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gt", gt_cameras, "Metric cameras (cameras.json schema)")
      ->required()->check(CLI::ExistingFile);
  auto* matches_opt = eval_cmd->add_option("--matches", matches)->check(CLI::ExistingFile);
  auto* poses_opt = eval_cmd->add_option("--poses", poses, "Predicted relative poses")
                        ->check(CLI::ExistingFile);
  matches_opt->excludes(poses_opt);
  eval_cmd->add_option("--depth-dir", eval_depth)->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--pairs", eval_pairs, "Pair to image lookup (pairs or criteria jsonl)")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--threshold-px", eval.options.threshold_px, "Sampson threshold")
      ->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->add_option("--max-iters", eval.options.max_iters)->check(CLI::Range(1, 10000000))
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval.options.seed)->capture_default_str();
  eval_cmd->add_option("--method", method)->capture_default_str();
  eval_cmd->add_option("--missing", eval_missing)->check(CLI::IsMember({"fail", "exclude"}))
      ->capture_default_str();
  eval_cmd->add_option("--out-dir", eval_out)->capture_default_str();
  eval_cmd->add_flag("--no-rotation-fallback", no_fallback);

  // report
  std::string report_manifest, report_out, report_missing = "fail";
  std::vector<std::string> records;
  auto* report_cmd = app.add_subcommand("report", "Aggregate records of several methods");
  report_cmd->add_option("--manifest", report_manifest)->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--records", records, "name=records.jsonl, repeatable")->required();
  report_cmd->add_option("--out-dir", report_out)->required();
  report_cmd->add_option("--missing", report_missing)->check(CLI::IsMember({"fail", "exclude"}))
      ->capture_default_str();

  // synth
  cvb_synth_stage synth;
  cvb_synth_stage_init(&synth);
  std::string suite = "default", synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Render the analytic fixture suite");
  synth_cmd->add_option("--suite", suite)->check(CLI::IsMember({"default"}))->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    const CLI::App* failing = &app;
    for (const auto* sub : app.get_subcommands()) failing = sub;
    std::cerr << failing->help();
    return kExitUsage;
  }

  cvb_context* ctx = nullptr;
  if (cvb_context_create(&ctx) != CVB_OK) return kExitData;
  cvb_set_logger(ctx, log_line, &quiet);
  cvb_set_threads(ctx, threads > 0 ? threads : threads_from_env());

  cvb_status status = CVB_OK;
  if (*align_cmd) {
    align.reconstructed = colmap.c_str();
    align.ground_truth = gt_poses.c_str();
    align.out_cameras = aligned_out.c_str();
    align.out_report = align_report.c_str();
    status = cvb_run_align(ctx, &align);
  } else if (*covis_cmd) {
    covis.cameras = cameras.c_str();
    covis.pairs = pairs.c_str();
    covis.depth_dir = depth_dir.c_str();
    covis.normal_dir = or_null(normal_dir);
    covis.out_dir = covis_out.c_str();
    status = cvb_run_covis(ctx, &covis);
  } else if (*criteria_cmd) {
    cvb_criteria_stage c;
    cvb_criteria_stage_init(&c);
    c.cameras = crit_cameras.c_str();
    c.pairs = crit_pairs.c_str();
    c.depth_dir = crit_depth.c_str();
    c.covis_dir = covis_dir.c_str();
    c.out = criteria_out.c_str();
    status = cvb_run_criteria(ctx, &c);
  } else if (*build_cmd) {
    build.criteria = build_criteria.c_str();
    build.out = manifest_out.c_str();
    build.all_boxes = all_boxes ? 1 : 0;
    status = cvb_run_build(ctx, &build);
  } else if (*eval_cmd) {
    if (matches.empty() == poses.empty()) {
      std::cerr << "error: exactly one of --matches and --poses is required\n" << eval_cmd->help();
      cvb_context_destroy(ctx);
      return kExitUsage;
    }
    if (!matches.empty() && eval_depth.empty()) {
      std::cerr << "error: --matches needs --depth-dir\n" << eval_cmd->help();
      cvb_context_destroy(ctx);
      return kExitUsage;
    }
    eval.manifest = manifest.c_str();
    eval.ground_truth = gt_cameras.c_str();
    eval.matches = or_null(matches);
    eval.poses = or_null(poses);
    eval.depth_dir = or_null(eval_depth);
    eval.pairs = or_null(eval_pairs);
    eval.out_dir = eval_out.c_str();
    eval.method = method.c_str();
    eval.options.rotation_fallback = no_fallback ? 0 : 1;
    eval.missing = kMissing.at(eval_missing);
    status = cvb_run_eval(ctx, &eval);
  } else if (*report_cmd) {
    std::vector<std::string> names, paths;
    for (const auto& r : records) {
      const auto eq = r.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == r.size()) {
        std::cerr << "error: --records expects name=path, got '" << r << "'\n"
                  << report_cmd->help();
        cvb_context_destroy(ctx);
        return kExitUsage;
      }
      names.push_back(r.substr(0, eq));
      paths.push_back(r.substr(eq + 1));
    }
    std::vector<const char*> name_ptrs, path_ptrs;
    for (std::size_t i = 0; i < names.size(); ++i) {
      name_ptrs.push_back(names[i].c_str());
      path_ptrs.push_back(paths[i].c_str());
    }
    cvb_report_stage r;
    cvb_report_stage_init(&r);
    r.manifest = report_manifest.c_str();
    r.methods = name_ptrs.data();
    r.records = path_ptrs.data();
    r.count = names.size();
    r.out_dir = report_out.c_str();
    r.missing = kMissing.at(report_missing);
    status = cvb_run_report(ctx, &r);
  } else if (*synth_cmd) {
    synth.suite = suite.c_str();
    synth.out_dir = synth_out.c_str();
    status = cvb_run_synth(ctx, &synth);
  }
  const int code = exit_code(ctx, status);
  cvb_context_destroy(ctx);
  return code;
}
