#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "cvb/covisibility.hpp"
#include "cvb/depth_normals.hpp"
#include "cvb/pose_eval.hpp"
#include "cvb/report.hpp"
#include "cvb/trajectory_align.hpp"

// File-to-file stage drivers shared by the C API and the command line tool.
namespace cvb::pipeline {

namespace fs = std::filesystem;

enum class LogLevel { Info = 0, Warning = 1 };

struct StageContext {
  int threads = 1;
  std::function<void(LogLevel, std::string_view)> log;

  void info(std::string_view msg) const {
    if (log) log(LogLevel::Info, msg);
  }
  void warn(std::string_view msg) const {
    if (log) log(LogLevel::Warning, msg);
  }
};

struct AlignStage {
  fs::path reconstructed;   // cameras.json schema, arbitrary frame and scale
  fs::path ground_truth;    // cameras.json schema, z = 0 centers
  fs::path out_cameras;     // aligned inliers
  fs::path out_report;
  AlignmentOptions options;
};
void run_align(const AlignStage& stage, const StageContext& ctx);

struct CovisStage {
  fs::path cameras;
  fs::path pairs;
  fs::path depth_dir;
  fs::path normal_dir;      // empty: normals are fitted from depth
  fs::path out_dir;
  CovisParams params;
  int normal_window = kDefaultNormalWindow;
};
void run_covis(const CovisStage& stage, const StageContext& ctx);

struct CriteriaStage {
  fs::path cameras;
  fs::path pairs;
  fs::path depth_dir;
  fs::path covis_dir;
  fs::path out;             // criteria.jsonl
};
void run_criteria(const CriteriaStage& stage, const StageContext& ctx);

struct BuildStage {
  fs::path criteria;
  fs::path out;             // manifest.json
  std::size_t target = 500;
  std::uint64_t seed = 42;
  bool all_boxes = false;
};
void run_build(const BuildStage& stage, const StageContext& ctx);

struct EvalStage {
  fs::path manifest;
  fs::path ground_truth;    // cameras.json schema
  fs::path matches;         // either matches ...
  fs::path poses;           // ... or predicted relative poses
  fs::path depth_dir;       // needed with matches
  fs::path pairs;           // optional image lookup overriding the manifest's
  fs::path out_dir;         // records.jsonl plus the report
  std::string method = "method";
  PairEvalOptions options;
  std::uint64_t seed = 7;
  MissingPolicy missing = MissingPolicy::CountAsFailure;
};
void run_eval(const EvalStage& stage, const StageContext& ctx);

struct ReportStage {
  fs::path manifest;
  std::vector<std::pair<std::string, fs::path>> records;  // method name, records.jsonl
  fs::path out_dir;
  MissingPolicy missing = MissingPolicy::CountAsFailure;
};
void run_report(const ReportStage& stage, const StageContext& ctx);

struct SynthStage {
  std::string suite = "default";
  std::uint64_t seed = 1;
  fs::path out_dir;
};
void run_synth(const SynthStage& stage, const StageContext& ctx);

}  // namespace cvb::pipeline
