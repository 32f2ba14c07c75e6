#include "cvb/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "cvb/error.hpp"

namespace cvb {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string range_text(const std::array<double, 2>& r, int digits) {
  return fixed(r[0], digits) + "-" + fixed(r[1], digits);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

const std::array<const char*, 8> kPalette{"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                          "#8c564b", "#ff7f0e", "#17becf", "#7f7f7f"};

}  // namespace

Report aggregate(const std::vector<MethodRecords>& methods,
                 const BenchmarkManifest& manifest, MissingPolicy policy) {
  Report report;
  report.policy = policy;
  std::vector<const ManifestBox*> boxes;
  for (const auto& b : manifest.boxes) {
    if (!b.pairs.empty()) boxes.push_back(&b);
  }
  for (const auto* b : boxes) {
    report.boxes.push_back(b->box);
    report.box_sizes.push_back(b->pairs.size());
  }
  const std::size_t nb = boxes.size();

  for (const auto& mr : methods) {
    std::unordered_map<std::string, const EvalRecord*> by_pair;
    for (const auto& r : mr.records) by_pair[r.pair_id] = &r;

    MethodReport out;
    out.method = mr.method;
    out.boxes.resize(nb);
    out.overlap_bins.resize(kOverlapBins);
    out.scale_bins.resize(kScaleBins);
    out.angle_bins.resize(kAngleBins);
    std::size_t listed = 0;
    for (std::size_t i = 0; i < nb; ++i) {
      BinTally& tally = out.boxes[i];
      for (const auto& id : boxes[i]->pairs) {
        const auto it = by_pair.find(id);
        if (it == by_pair.end()) {
          out.missing_pairs.push_back(id);
          if (policy == MissingPolicy::Exclude) continue;
          ++tally.pairs;
          continue;
        }
        ++listed;
        ++tally.pairs;
        tally.successes += it->second->success ? 1 : 0;
      }
      const DifficultyBox& box = boxes[i]->box;
      for (BinTally* bin : {&out.overlap_bins[box.overlap_bin], &out.scale_bins[box.scale_bin],
                            &out.angle_bins[box.angle_bin], &out.overall}) {
        bin->successes += tally.successes;
        bin->pairs += tally.pairs;
      }
    }
    if (listed < mr.records.size()) {
      report.warnings.push_back(mr.method + ": " + std::to_string(mr.records.size() - listed) +
                                " records refer to pairs outside the manifest");
    }
    if (!out.missing_pairs.empty()) {
      report.warnings.push_back(mr.method + ": " + std::to_string(out.missing_pairs.size()) +
                                " manifest pairs have no record");
    }
    std::sort(out.missing_pairs.begin(), out.missing_pairs.end());
    report.methods.push_back(std::move(out));
  }

  // Ranks per box; tied methods share the mean of the ranks they span.
  const std::size_t nm = report.methods.size();
  for (auto& m : report.methods) m.ranks.assign(nb, 0.0);
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t a = 0; a < nm; ++a) {
      const double va = report.methods[a].boxes[i].percent();
      std::size_t better = 0, equal = 0;
      for (std::size_t b = 0; b < nm; ++b) {
        const double vb = report.methods[b].boxes[i].percent();
        better += vb > va ? 1 : 0;
        equal += vb == va ? 1 : 0;
      }
      report.methods[a].ranks[i] = 1.0 + static_cast<double>(better) +
                                   0.5 * static_cast<double>(equal - 1);
    }
  }
  for (auto& m : report.methods) {
    m.average_rank = nb == 0 ? 0.0
                             : std::accumulate(m.ranks.begin(), m.ranks.end(), 0.0) /
                                   static_cast<double>(nb);
  }

  report.mean_success.assign(nb, 0.0);
  for (std::size_t i = 0; i < nb && nm > 0; ++i) {
    double sum = 0.0;
    for (const auto& m : report.methods) sum += m.boxes[i].percent();
    report.mean_success[i] = sum / static_cast<double>(nm);
  }
  report.cumulative_order.resize(nb);
  std::iota(report.cumulative_order.begin(), report.cumulative_order.end(), 0);
  std::stable_sort(report.cumulative_order.begin(), report.cumulative_order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return report.mean_success[a] > report.mean_success[b];
                   });
  for (auto& m : report.methods) {
    BinTally running;
    for (std::size_t idx : report.cumulative_order) {
      running.successes += m.boxes[idx].successes;
      running.pairs += m.boxes[idx].pairs;
      m.cumulative_percent.push_back(running.percent());
    }
  }
  return report;
}

std::string results_csv(const Report& report) {
  std::ostringstream os;
  os << "method";
  for (const auto& b : report.boxes) os << "," << b.label();
  os << ",success_pct,avg_rank\n";
  for (const auto& m : report.methods) {
    os << m.method;
    for (const auto& t : m.boxes) os << "," << fixed(t.percent(), 2);
    os << "," << fixed(m.overall.percent(), 2) << "," << fixed(m.average_rank, 4) << "\n";
  }
  return os.str();
}

std::string summary_json(const Report& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["missing_policy"] =
      report.policy == MissingPolicy::CountAsFailure ? "count_as_failure" : "exclude";
  ordered_json boxes = ordered_json::array();
  for (std::size_t i = 0; i < report.boxes.size(); ++i) {
    const auto& b = report.boxes[i];
    boxes.push_back({{"label", b.label()},
                     {"overlap", b.overlap_range()},
                     {"scale", b.scale_range()},
                     {"angle", b.angle_range()},
                     {"pairs", report.box_sizes[i]},
                     {"mean_success_pct", report.mean_success[i]}});
  }
  j["boxes"] = boxes;
  ordered_json order = ordered_json::array();
  for (std::size_t idx : report.cumulative_order) order.push_back(report.boxes[idx].label());
  j["difficulty_order"] = order;

  const auto tally_json = [](const BinTally& t) {
    return ordered_json{{"successes", t.successes}, {"pairs", t.pairs}, {"percent", t.percent()}};
  };
  const auto marginal_json = [&](const std::vector<BinTally>& bins, auto edges) {
    ordered_json arr = ordered_json::array();
    for (std::size_t k = 0; k < bins.size(); ++k) {
      ordered_json e = tally_json(bins[k]);
      e["range"] = {edges[k], edges[k + 1]};
      arr.push_back(e);
    }
    return arr;
  };
  ordered_json methods = ordered_json::array();
  for (const auto& m : report.methods) {
    ordered_json mj;
    mj["method"] = m.method;
    mj["overall"] = tally_json(m.overall);
    mj["average_rank"] = m.average_rank;
    ordered_json per_box = ordered_json::array();
    for (std::size_t i = 0; i < m.boxes.size(); ++i) {
      ordered_json e = tally_json(m.boxes[i]);
      e["label"] = report.boxes[i].label();
      e["rank"] = m.ranks[i];
      per_box.push_back(e);
    }
    mj["boxes"] = per_box;
    mj["marginals"] = {{"overlap", marginal_json(m.overlap_bins, kOverlapEdges)},
                       {"scale", marginal_json(m.scale_bins, kScaleEdges)},
                       {"angle", marginal_json(m.angle_bins, kAngleEdges)}};
    mj["cumulative_pct"] = m.cumulative_percent;
    mj["missing_pairs"] = m.missing_pairs;
    methods.push_back(mj);
  }
  j["methods"] = methods;
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

namespace {

constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 160, kTop = 30, kBottom = 50;

void svg_open(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
     << title << "</text>\n";
}

void svg_y_axis(std::ostringstream& os, const std::string& label) {
  const double h = kH - kTop - kBottom;
  for (int pct = 0; pct <= 100; pct += 20) {
    const double y = kTop + h * (1.0 - pct / 100.0);
    os << "<line x1=\"" << kLeft << "\" y1=\"" << fixed(y, 2) << "\" x2=\"" << kW - kRight
       << "\" y2=\"" << fixed(y, 2) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed(y + 4, 2)
       << "\" text-anchor=\"end\" font-size=\"10\">" << pct << "</text>\n";
  }
  os << "<text x=\"14\" y=\"" << kTop + h / 2 << "\" font-size=\"11\" transform=\"rotate(-90 14 "
     << kTop + h / 2 << ")\" text-anchor=\"middle\">" << label << "</text>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
     << kH - kBottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
     << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n";
}

void svg_legend(std::ostringstream& os, const Report& report) {
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    const double y = kTop + 14.0 * static_cast<double>(m);
    os << "<rect x=\"" << kW - kRight + 10 << "\" y=\"" << fixed(y, 2)
       << "\" width=\"10\" height=\"10\" fill=\"" << kPalette[m % kPalette.size()] << "\"/>\n";
    os << "<text x=\"" << kW - kRight + 24 << "\" y=\"" << fixed(y + 9, 2)
       << "\" font-size=\"10\">" << report.methods[m].method << "</text>\n";
  }
}

}  // namespace

std::string cumulative_svg(const Report& report) {
  std::ostringstream os;
  svg_open(os, "Cumulative success over boxes sorted by mean success");
  svg_y_axis(os, "Cumulative success rate (%)");
  const std::size_t nb = report.cumulative_order.size();
  const double w = kW - kLeft - kRight;
  const double h = kH - kTop - kBottom;
  const auto x_of = [&](std::size_t k) {
    return nb <= 1 ? kLeft + w / 2 : kLeft + w * static_cast<double>(k) / static_cast<double>(nb - 1);
  };
  for (std::size_t k = 0; k < nb; ++k) {
    os << "<text x=\"" << fixed(x_of(k), 2) << "\" y=\"" << kH - kBottom + 14
       << "\" text-anchor=\"middle\" font-size=\"9\">" << k + 1 << "</text>\n";
  }
  os << "<text x=\"" << kLeft + w / 2 << "\" y=\"" << kH - 12
     << "\" text-anchor=\"middle\" font-size=\"11\">Number of accumulated boxes</text>\n";
  for (std::size_t m = 0; m < report.methods.size(); ++m) {
    const auto& curve = report.methods[m].cumulative_percent;
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[m % kPalette.size()]
       << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < curve.size(); ++k) {
      if (k) os << " ";
      os << fixed(x_of(k), 2) << "," << fixed(kTop + h * (1.0 - curve[k] / 100.0), 2);
    }
    os << "\"/>\n";
  }
  svg_legend(os, report);
  os << "</svg>\n";
  return os.str();
}

std::string marginal_svg(const Report& report, int criterion) {
  static const std::array<const char*, 3> titles{"Success by overlap bin (%)",
                                                 "Success by scale ratio bin",
                                                 "Success by viewpoint angle bin (deg)"};
  std::vector<std::string> labels;
  if (criterion == 0) {
    for (int k = 0; k < kOverlapBins; ++k)
      labels.push_back(range_text({kOverlapEdges[k], kOverlapEdges[k + 1]}, 0));
  } else if (criterion == 1) {
    for (int k = 0; k < kScaleBins; ++k)
      labels.push_back(range_text({kScaleEdges[k], kScaleEdges[k + 1]}, 1));
  } else {
    for (int k = 0; k < kAngleBins; ++k)
      labels.push_back(range_text({kAngleEdges[k], kAngleEdges[k + 1]}, 0));
  }
  std::ostringstream os;
  svg_open(os, titles[static_cast<std::size_t>(criterion)]);
  svg_y_axis(os, "Success rate (%)");
  const double w = kW - kLeft - kRight;
  const double h = kH - kTop - kBottom;
  const double group = w / static_cast<double>(labels.size());
  const std::size_t nm = std::max<std::size_t>(report.methods.size(), 1);
  const double bar = 0.8 * group / static_cast<double>(nm);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const double gx = kLeft + group * static_cast<double>(k);
    os << "<text x=\"" << fixed(gx + group / 2, 2) << "\" y=\"" << kH - kBottom + 14
       << "\" text-anchor=\"middle\" font-size=\"10\">" << labels[k] << "</text>\n";
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
      const auto& mr = report.methods[m];
      const auto& bins = criterion == 0 ? mr.overlap_bins
                         : criterion == 1 ? mr.scale_bins
                                          : mr.angle_bins;
      const double v = bins[k].percent();
      const double bh = h * v / 100.0;
      os << "<rect x=\"" << fixed(gx + 0.1 * group + bar * static_cast<double>(m), 2)
         << "\" y=\"" << fixed(kTop + h - bh, 2) << "\" width=\"" << fixed(bar, 2)
         << "\" height=\"" << fixed(bh, 2) << "\" fill=\"" << kPalette[m % kPalette.size()]
         << "\"/>\n";
    }
  }
  svg_legend(os, report);
  os << "</svg>\n";
  return os.str();
}

void emit_report(const Report& report, const std::filesystem::path& out_dir) {
  write_text(out_dir / "results.csv", results_csv(report));
  write_text(out_dir / "summary.json", summary_json(report));
  write_text(out_dir / "plots" / "cumulative.svg", cumulative_svg(report));
  write_text(out_dir / "plots" / "overlap.svg", marginal_svg(report, 0));
  write_text(out_dir / "plots" / "scale.svg", marginal_svg(report, 1));
  write_text(out_dir / "plots" / "angle.svg", marginal_svg(report, 2));
}

}  // namespace cvb
