#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cvb/benchmark.hpp"
#include "cvb/geometry.hpp"
#include "cvb/pose_eval.hpp"
#include "cvb/trajectory_align.hpp"

namespace cvb {

namespace fs = std::filesystem;

struct CameraRecord {
  std::string image_id;
  CameraIntrinsics intrinsics;
  RigidPose pose;
};

/// cameras.json: array of {image_id, fx, fy, cx, cy, width, height, q_wxyz, t_xyz}.
std::vector<CameraRecord> read_cameras(const fs::path& path);
void write_cameras(const fs::path& path, const std::vector<CameraRecord>& cameras);

struct PairRecord {
  std::string pair_id;
  std::string image_a;
  std::string image_b;
};

/// One {pair_id, image_a, image_b, ...} object per line. Extra keys are
/// ignored, so criteria.jsonl is accepted as well.
std::vector<PairRecord> read_pairs(const fs::path& path);
void write_pairs(const fs::path& path, const std::vector<PairRecord>& pairs);

/// delta and theta_deg are null for pairs without co-visible pixels.
std::vector<CriteriaRecord> read_criteria(const fs::path& path);
void write_criteria(const fs::path& path, const std::vector<CriteriaRecord>& records);

BenchmarkManifest read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, const BenchmarkManifest& manifest);

std::vector<MatchSet> read_matches(const fs::path& path);
void write_matches(const fs::path& path, const std::vector<MatchSet>& matches);

/// pred_poses.jsonl: relative pose camera-2 -> camera-1 per pair.
struct PredictedPose {
  std::string pair_id;
  RelativePose pose;
  bool metric = true;
};
std::vector<PredictedPose> read_predicted_poses(const fs::path& path);

std::vector<EvalRecord> read_eval_records(const fs::path& path);
void write_eval_records(const fs::path& path, const std::vector<EvalRecord>& records);

/// alignment_report.json with per-pose residuals keyed by image_id.
void write_alignment_report(const fs::path& path, const AlignmentResult& result,
                            const std::vector<std::string>& image_ids);

// Raster file naming inside the depth, normal and covis directories.
fs::path depth_file(const fs::path& dir, const std::string& image_id);
fs::path normal_file(const fs::path& dir, const std::string& image_id);
/// forward = C_{a->b}, otherwise C_{b->a}.
fs::path covis_file(const fs::path& dir, const std::string& pair_id, bool forward);

/// Truncates and writes, creating parent directories.
void write_text_file(const fs::path& path, const std::string& text);

}  // namespace cvb
