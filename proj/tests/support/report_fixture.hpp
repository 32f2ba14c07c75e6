#pragma once

// Three methods over three boxes with hand-computed results.
//
//   box (grid order)          pairs   A      B      C
//   o5-20_s4.0-6.0_a60-120    2       0/2    1/2    0/2
//   o40-60_s1.0-1.5_a0-30     4       1/4    2/4    2/4  (C has no record for b2_3)
//   o60-80_s1.0-1.5_a0-30     4       4/4    3/4    4/4
//
// Ranks per box (ties share the mean): A 2.5 3 1.5, B 1 1.5 3, C 2.5 1.5 1.5.
// Average ranks: A 7/3, B 11/6, C 11/6. Cross-method means 16.67, 41.67 and
// 91.67 put the boxes in the order o60-80, o40-60, o5-20 for the cumulative
// curves: A 100, 62.5, 50; B 75, 62.5, 60; C 100, 75, 60.

#include <string>
#include <vector>

#include "cvb/report.hpp"

namespace cvb::testing {

inline BenchmarkManifest report_manifest() {
  BenchmarkManifest m;
  m.seed = 42;
  m.target = 500;
  m.boxes = {{{0, 3, 2}, {"b3_0", "b3_1"}},
             {{2, 0, 0}, {"b2_0", "b2_1", "b2_2", "b2_3"}},
             {{3, 0, 0}, {"b1_0", "b1_1", "b1_2", "b1_3"}}};
  for (const auto& box : m.boxes)
    for (const auto& id : box.pairs) m.pair_images[id] = {id + "_a", id + "_b"};
  return m;
}

inline EvalRecord outcome(const std::string& id, bool ok) {
  EvalRecord r;
  r.pair_id = id;
  r.success = ok;
  r.source = PoseSource::Essential;
  if (ok) {
    r.rotation_err_deg = 1.0;
    r.translation_err_m = 0.5;
  } else {
    r.rotation_err_deg = 20.0;
    r.translation_err_m = 9.0;
  }
  return r;
}

inline std::vector<MethodRecords> report_methods() {
  MethodRecords a{"A", {}}, b{"B", {}}, c{"C", {}};
  for (int i = 0; i < 4; ++i) {
    const std::string b1 = "b1_" + std::to_string(i);
    const std::string b2 = "b2_" + std::to_string(i);
    a.records.push_back(outcome(b1, true));
    b.records.push_back(outcome(b1, i != 3));
    c.records.push_back(outcome(b1, true));
    a.records.push_back(outcome(b2, i == 0));
    b.records.push_back(outcome(b2, i < 2));
    if (i < 3) c.records.push_back(outcome(b2, i < 2));
  }
  for (int i = 0; i < 2; ++i) {
    const std::string b3 = "b3_" + std::to_string(i);
    a.records.push_back(outcome(b3, false));
    b.records.push_back(outcome(b3, i == 0));
    c.records.push_back(outcome(b3, false));
  }
  return {a, b, c};
}

}  // namespace cvb::testing
