#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cvb/criteria.hpp"

namespace cvb {

// Bin edges. Overlap is in percent, scale is a ratio, angle is in degrees.
inline constexpr std::array<double, 6> kOverlapEdges{5, 20, 40, 60, 80, 100};
inline constexpr std::array<double, 5> kScaleEdges{1.0, 1.5, 2.5, 4.0, 6.0};
inline constexpr std::array<double, 5> kAngleEdges{0, 30, 60, 120, 180};

inline constexpr int kOverlapBins = 5;
inline constexpr int kScaleBins = 4;
inline constexpr int kAngleBins = 4;
inline constexpr std::size_t kDefaultTarget = 500;

/// One cell of the overlap x scale x angle grid.
struct DifficultyBox {
  int overlap_bin = 0;
  int scale_bin = 0;
  int angle_bin = 0;

  auto operator<=>(const DifficultyBox&) const = default;

  /// "o60-80_s1.0-1.5_a0-30"
  std::string label() const;
  std::array<double, 2> overlap_range() const;
  std::array<double, 2> scale_range() const;
  std::array<double, 2> angle_range() const;
};

/// The 33 realisable boxes, in grid order.
const std::vector<DifficultyBox>& valid_boxes();
bool is_valid_box(const DifficultyBox& box);

/// Every cell of the 5x4x4 grid, for corpora outside the reference grid.
std::vector<DifficultyBox> all_grid_boxes();

/// Half-open bins, last bin closed at the top. Empty when a value falls
/// outside the binned range or the box is not admitted.
std::optional<DifficultyBox> assign_box(const PairCriteria& c, bool allow_all_boxes = false);

struct CriteriaRecord {
  std::string pair_id;
  std::string image_a;
  std::string image_b;
  std::optional<PairCriteria> criteria;
  double omega = 0.0;
  std::size_t covis_ab = 0;
  std::size_t covis_ba = 0;
};

struct ManifestBox {
  DifficultyBox box;
  std::vector<std::string> pairs;  // sorted
};

struct BenchmarkManifest {
  std::uint64_t seed = 0;
  std::size_t target = kDefaultTarget;
  std::vector<ManifestBox> boxes;  // sorted by box
  std::vector<std::string> warnings;
  /// image_a, image_b of every selected pair.
  std::map<std::string, std::pair<std::string, std::string>> pair_images;

  std::size_t total_pairs() const;
  /// Box holding pair_id, or empty.
  std::optional<DifficultyBox> box_of(const std::string& pair_id) const;
};

/// Per box, a uniform sample without replacement of min(target, candidates)
/// pairs, drawn from an RNG seeded by (seed, box). Records sharing an
/// unordered image pair are deduplicated, keeping the smallest pair_id.
BenchmarkManifest build_manifest(const std::vector<CriteriaRecord>& records,
                                 std::size_t target, std::uint64_t seed,
                                 bool allow_all_boxes = false);

}  // namespace cvb
