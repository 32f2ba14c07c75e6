#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "cvb/benchmark.hpp"
#include "cvb/pose_eval.hpp"

namespace cvb {

struct MethodRecords {
  std::string method;
  std::vector<EvalRecord> records;
};

enum class MissingPolicy {
  CountAsFailure,  // manifest pairs without a record fail
  Exclude,         // ... or are dropped from every denominator
};

struct BinTally {
  std::size_t successes = 0;
  std::size_t pairs = 0;
  double percent() const {
    return pairs == 0 ? 0.0 : 100.0 * static_cast<double>(successes) / static_cast<double>(pairs);
  }
};

struct MethodReport {
  std::string method;
  std::vector<BinTally> boxes;          // aligned with Report::boxes
  BinTally overall;                     // per pair
  std::vector<BinTally> overlap_bins;   // marginals, kOverlapBins entries
  std::vector<BinTally> scale_bins;     // kScaleBins entries
  std::vector<BinTally> angle_bins;     // kAngleBins entries
  std::vector<double> ranks;            // per box, ties share the mean rank
  double average_rank = 0.0;
  std::vector<double> cumulative_percent;  // along Report::cumulative_order
  std::vector<std::string> missing_pairs;
};

struct Report {
  std::vector<DifficultyBox> boxes;          // non-empty manifest boxes
  std::vector<std::size_t> box_sizes;
  std::vector<double> mean_success;          // cross-method mean per box
  std::vector<std::size_t> cumulative_order; // box indices, easiest first
  std::vector<MethodReport> methods;
  MissingPolicy policy = MissingPolicy::CountAsFailure;
  std::vector<std::string> warnings;
};

/// Per-box success, marginals per criterion bin, average rank across methods
/// and cumulative curves over boxes sorted by cross-method mean success.
Report aggregate(const std::vector<MethodRecords>& methods,
                 const BenchmarkManifest& manifest,
                 MissingPolicy policy = MissingPolicy::CountAsFailure);

/// Writes results.csv, summary.json and plots/{cumulative,overlap,scale,angle}.svg.
void emit_report(const Report& report, const std::filesystem::path& out_dir);

std::string results_csv(const Report& report);
std::string summary_json(const Report& report);
std::string cumulative_svg(const Report& report);
/// criterion: 0 overlap, 1 scale, 2 angle.
std::string marginal_svg(const Report& report, int criterion);

}  // namespace cvb
