#include "cvb/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "cvb/numeric.hpp"

namespace cvb {

namespace {

// Levels 1..33 of the reference difficulty ordering as (overlap, scale, angle)
// bin indices. Overlap bins: 0=5-20, 1=20-40, 2=40-60, 3=60-80, 4=80-100.
constexpr std::array<std::array<int, 3>, 33> kReferenceLevels{{
    {3, 0, 0}, {2, 0, 0}, {3, 0, 1}, {3, 0, 2}, {2, 0, 1}, {4, 0, 0},
    {1, 0, 0}, {2, 0, 2}, {1, 0, 1}, {2, 1, 2}, {0, 0, 0}, {1, 1, 0},
    {1, 1, 1}, {1, 0, 2}, {2, 2, 2}, {0, 0, 1}, {1, 1, 2}, {0, 1, 0},
    {1, 2, 1}, {0, 1, 1}, {1, 2, 2}, {0, 0, 2}, {0, 2, 1}, {0, 2, 0},
    {0, 1, 2}, {0, 3, 0}, {0, 0, 3}, {0, 2, 2}, {0, 1, 3}, {0, 2, 3},
    {0, 3, 1}, {1, 3, 2}, {0, 3, 2},
}};

template <std::size_t N>
std::optional<int> bin_of(double value, const std::array<double, N>& edges,
                          double unit = 1.0) {
  if (!std::isfinite(value)) return std::nullopt;
  if (value < edges.front() / unit || value > edges.back() / unit) return std::nullopt;
  for (std::size_t i = 0; i + 1 < N; ++i) {
    if (value < edges[i + 1] / unit) return static_cast<int>(i);
  }
  return static_cast<int>(N - 2);
}

std::string edge_text(double v, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

std::string DifficultyBox::label() const {
  const auto o = overlap_range();
  const auto s = scale_range();
  const auto a = angle_range();
  return "o" + edge_text(o[0], 0) + "-" + edge_text(o[1], 0) + "_s" +
         edge_text(s[0], 1) + "-" + edge_text(s[1], 1) + "_a" +
         edge_text(a[0], 0) + "-" + edge_text(a[1], 0);
}

std::array<double, 2> DifficultyBox::overlap_range() const {
  return {kOverlapEdges[overlap_bin], kOverlapEdges[overlap_bin + 1]};
}
std::array<double, 2> DifficultyBox::scale_range() const {
  return {kScaleEdges[scale_bin], kScaleEdges[scale_bin + 1]};
}
std::array<double, 2> DifficultyBox::angle_range() const {
  return {kAngleEdges[angle_bin], kAngleEdges[angle_bin + 1]};
}

const std::vector<DifficultyBox>& valid_boxes() {
  static const std::vector<DifficultyBox> boxes = [] {
    std::vector<DifficultyBox> out;
    for (const auto& l : kReferenceLevels) out.push_back({l[0], l[1], l[2]});
    std::sort(out.begin(), out.end());
    return out;
  }();
  return boxes;
}

bool is_valid_box(const DifficultyBox& box) {
  const auto& boxes = valid_boxes();
  return std::binary_search(boxes.begin(), boxes.end(), box);
}

std::vector<DifficultyBox> all_grid_boxes() {
  std::vector<DifficultyBox> out;
  for (int o = 0; o < kOverlapBins; ++o)
    for (int s = 0; s < kScaleBins; ++s)
      for (int a = 0; a < kAngleBins; ++a) out.push_back({o, s, a});
  return out;
}

std::optional<DifficultyBox> assign_box(const PairCriteria& c, bool allow_all_boxes) {
  const auto o = bin_of(c.omega, kOverlapEdges, 100.0);
  const auto s = bin_of(c.delta, kScaleEdges);
  const auto a = bin_of(c.theta_deg, kAngleEdges);
  if (!o || !s || !a) return std::nullopt;
  const DifficultyBox box{*o, *s, *a};
  if (!allow_all_boxes && !is_valid_box(box)) return std::nullopt;
  return box;
}

std::size_t BenchmarkManifest::total_pairs() const {
  std::size_t n = 0;
  for (const auto& b : boxes) n += b.pairs.size();
  return n;
}

std::optional<DifficultyBox> BenchmarkManifest::box_of(const std::string& pair_id) const {
  for (const auto& b : boxes) {
    if (std::binary_search(b.pairs.begin(), b.pairs.end(), pair_id)) return b.box;
  }
  return std::nullopt;
}

BenchmarkManifest build_manifest(const std::vector<CriteriaRecord>& records,
                                 std::size_t target, std::uint64_t seed,
                                 bool allow_all_boxes) {
  BenchmarkManifest manifest;
  manifest.seed = seed;
  manifest.target = target;

  // Deduplicate unordered image pairs, keeping the smallest pair_id.
  std::map<std::pair<std::string, std::string>, const CriteriaRecord*> unique;
  for (const auto& r : records) {
    auto key = std::minmax(r.image_a, r.image_b);
    auto [it, inserted] = unique.try_emplace({key.first, key.second}, &r);
    if (!inserted && r.pair_id < it->second->pair_id) it->second = &r;
  }

  std::map<DifficultyBox, std::vector<std::string>> candidates;
  const auto grid = allow_all_boxes ? all_grid_boxes() : valid_boxes();
  for (const auto& b : grid) candidates[b];
  std::map<std::string, const CriteriaRecord*> by_id;
  for (const auto& [key, r] : unique) {
    by_id[r->pair_id] = r;
    if (!r->criteria) continue;
    if (auto box = assign_box(*r->criteria, allow_all_boxes)) {
      candidates[*box].push_back(r->pair_id);
    }
  }

  for (auto& [box, ids] : candidates) {
    // Sort first so the draw depends only on the candidate set.
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    const std::uint64_t box_index =
        static_cast<std::uint64_t>((box.overlap_bin * kScaleBins + box.scale_bin) * kAngleBins +
                                   box.angle_bin);
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(box_index + 1)));
    const std::size_t take = std::min(target, ids.size());
    if (ids.size() < target) {
      manifest.warnings.push_back("box " + box.label() + " has " +
                                  std::to_string(ids.size()) + " candidates, fewer than target " +
                                  std::to_string(target));
    }
    // Partial Fisher-Yates: the first `take` slots become the sample.
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + uniform_index(rng, ids.size() - i);
      std::swap(ids[i], ids[j]);
    }
    ids.resize(take);
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) {
      const CriteriaRecord* r = by_id.at(id);
      manifest.pair_images[id] = {r->image_a, r->image_b};
    }
    manifest.boxes.push_back({box, std::move(ids)});
  }
  return manifest;
}

}  // namespace cvb
