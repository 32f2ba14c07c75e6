#include "cvb/io.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>

#include "cvb/error.hpp"

namespace cvb {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

// Calls fn on every non-blank line. Any exception from
// parsing or field access is rethrown as a Format error with the location.
void for_each_jsonl(const fs::path& path, const std::function<void(const json&)>& fn) {
  auto in = open_input(path);
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(text);
      if (!j.is_object()) throw std::runtime_error("expected a JSON object");
      fn(j);
    } catch (const Error& e) {
      fail(e.code() == ErrorCode::Config ? ErrorCode::Format : e.code(),
           where(path, line) + e.what());
    } catch (const std::exception& e) {
      fail(ErrorCode::Format, where(path, line) + e.what());
    }
  }
}

json read_json(const fs::path& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

Vec2 vec2_of(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::runtime_error("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Vec3 vec3_of(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::runtime_error("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Eigen::Quaterniond quat_of(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::runtime_error("expected [w, x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

ordered_json quat_json(const Eigen::Quaterniond& q) {
  return ordered_json::array({q.w(), q.x(), q.y(), q.z()});
}

ordered_json vec3_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

ordered_json optional_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> optional_double(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

template <std::size_t N>
int bin_from_range(const json& range, const std::array<double, N>& edges, const char* name) {
  if (!range.is_array() || range.size() != 2)
    throw std::runtime_error(std::string(name) + " must be [lo, hi]");
  const double lo = range[0].get<double>();
  const double hi = range[1].get<double>();
  for (std::size_t i = 0; i + 1 < N; ++i) {
    if (edges[i] == lo && edges[i + 1] == hi) return static_cast<int>(i);
  }
  throw std::runtime_error(std::string(name) + " range is not a grid bin");
}

std::string jsonl(const std::vector<ordered_json>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l.dump();
    out += '\n';
  }
  return out;
}

}  // namespace

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

std::vector<CameraRecord> read_cameras(const fs::path& path) {
  const json j = read_json(path);
  if (!j.is_array()) fail(ErrorCode::Format, path.string() + ": expected an array of cameras");
  std::vector<CameraRecord> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      const json& c = j[i];
      CameraRecord r;
      r.image_id = c.at("image_id").get<std::string>();
      r.intrinsics.fx = c.at("fx").get<double>();
      r.intrinsics.fy = c.at("fy").get<double>();
      r.intrinsics.cx = c.at("cx").get<double>();
      r.intrinsics.cy = c.at("cy").get<double>();
      r.intrinsics.width = c.at("width").get<int>();
      r.intrinsics.height = c.at("height").get<int>();
      r.intrinsics.validate();
      r.pose = RigidPose::from_quaternion(quat_of(c.at("q_wxyz")), vec3_of(c.at("t_xyz")));
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      fail(ErrorCode::Format, path.string() + ": record " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

void write_cameras(const fs::path& path, const std::vector<CameraRecord>& cameras) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : cameras) {
    arr.push_back({{"image_id", c.image_id},
                   {"fx", c.intrinsics.fx},
                   {"fy", c.intrinsics.fy},
                   {"cx", c.intrinsics.cx},
                   {"cy", c.intrinsics.cy},
                   {"width", c.intrinsics.width},
                   {"height", c.intrinsics.height},
                   {"q_wxyz", quat_json(c.pose.quaternion())},
                   {"t_xyz", vec3_json(c.pose.center)}});
  }
  write_text_file(path, arr.dump(2) + "\n");
}

std::vector<PairRecord> read_pairs(const fs::path& path) {
  std::vector<PairRecord> out;
  for_each_jsonl(path, [&](const json& j) {
    out.push_back({j.at("pair_id").get<std::string>(), j.at("image_a").get<std::string>(),
                   j.at("image_b").get<std::string>()});
  });
  return out;
}

void write_pairs(const fs::path& path, const std::vector<PairRecord>& pairs) {
  std::vector<ordered_json> lines;
  for (const auto& p : pairs)
    lines.push_back({{"pair_id", p.pair_id}, {"image_a", p.image_a}, {"image_b", p.image_b}});
  write_text_file(path, jsonl(lines));
}

std::vector<CriteriaRecord> read_criteria(const fs::path& path) {
  std::vector<CriteriaRecord> out;
  for_each_jsonl(path, [&](const json& j) {
    CriteriaRecord r;
    r.pair_id = j.at("pair_id").get<std::string>();
    r.image_a = j.at("image_a").get<std::string>();
    r.image_b = j.at("image_b").get<std::string>();
    r.omega = j.at("omega").get<double>();
    r.covis_ab = j.value("covis_pixels_ab", std::size_t{0});
    r.covis_ba = j.value("covis_pixels_ba", std::size_t{0});
    const auto delta = optional_double(j, "delta");
    const auto theta = optional_double(j, "theta_deg");
    if (delta.has_value() != theta.has_value())
      throw std::runtime_error("delta and theta_deg must both be set or both be null");
    if (delta) r.criteria = PairCriteria{r.omega, *delta, *theta};
    out.push_back(std::move(r));
  });
  return out;
}

void write_criteria(const fs::path& path, const std::vector<CriteriaRecord>& records) {
  std::vector<ordered_json> lines;
  for (const auto& r : records) {
    lines.push_back({{"pair_id", r.pair_id},
                     {"image_a", r.image_a},
                     {"image_b", r.image_b},
                     {"omega", r.omega},
                     {"delta", optional_json(r.criteria ? std::optional(r.criteria->delta)
                                                        : std::nullopt)},
                     {"theta_deg", optional_json(r.criteria ? std::optional(r.criteria->theta_deg)
                                                            : std::nullopt)},
                     {"covis_pixels_ab", r.covis_ab},
                     {"covis_pixels_ba", r.covis_ba}});
  }
  write_text_file(path, jsonl(lines));
}

BenchmarkManifest read_manifest(const fs::path& path) {
  const json j = read_json(path);
  BenchmarkManifest m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.target = j.at("target").get<std::size_t>();
    const json& boxes = j.at("boxes");
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const json& b = boxes[i];
      ManifestBox mb;
      try {
        mb.box = {bin_from_range(b.at("overlap"), kOverlapEdges, "overlap"),
                  bin_from_range(b.at("scale"), kScaleEdges, "scale"),
                  bin_from_range(b.at("angle"), kAngleEdges, "angle")};
        mb.pairs = b.at("pairs").get<std::vector<std::string>>();
      } catch (const std::exception& e) {
        throw std::runtime_error("box " + std::to_string(i) + ": " + e.what());
      }
      std::sort(mb.pairs.begin(), mb.pairs.end());
      m.boxes.push_back(std::move(mb));
    }
    if (j.contains("warnings")) m.warnings = j["warnings"].get<std::vector<std::string>>();
    if (j.contains("pair_images")) {
      for (const auto& [id, ab] : j["pair_images"].items()) {
        if (!ab.is_array() || ab.size() != 2)
          throw std::runtime_error("pair_images." + id + " must be [image_a, image_b]");
        m.pair_images[id] = {ab[0].get<std::string>(), ab[1].get<std::string>()};
      }
    }
  } catch (const std::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
  std::sort(m.boxes.begin(), m.boxes.end(),
            [](const ManifestBox& a, const ManifestBox& b) { return a.box < b.box; });
  return m;
}

void write_manifest(const fs::path& path, const BenchmarkManifest& manifest) {
  ordered_json j;
  j["seed"] = manifest.seed;
  j["target"] = manifest.target;
  ordered_json boxes = ordered_json::array();
  for (const auto& b : manifest.boxes) {
    boxes.push_back({{"label", b.box.label()},
                     {"overlap", b.box.overlap_range()},
                     {"scale", b.box.scale_range()},
                     {"angle", b.box.angle_range()},
                     {"pairs", b.pairs}});
  }
  j["boxes"] = boxes;
  j["total_pairs"] = manifest.total_pairs();
  ordered_json images = ordered_json::object();
  for (const auto& [id, ab] : manifest.pair_images) images[id] = {ab.first, ab.second};
  j["pair_images"] = images;
  j["warnings"] = manifest.warnings;
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<MatchSet> read_matches(const fs::path& path) {
  std::vector<MatchSet> out;
  for_each_jsonl(path, [&](const json& j) {
    MatchSet m;
    m.pair_id = j.at("pair_id").get<std::string>();
    for (const auto& p : j.at("points_a")) m.points_a.push_back(vec2_of(p));
    for (const auto& p : j.at("points_b")) m.points_b.push_back(vec2_of(p));
    if (m.points_a.size() != m.points_b.size())
      throw std::runtime_error("points_a and points_b differ in length");
    if (j.contains("confidence")) {
      m.confidence = j["confidence"].get<std::vector<double>>();
      if (m.confidence.size() != m.points_a.size())
        throw std::runtime_error("confidence length does not match points");
    }
    out.push_back(std::move(m));
  });
  return out;
}

void write_matches(const fs::path& path, const std::vector<MatchSet>& matches) {
  std::vector<ordered_json> lines;
  for (const auto& m : matches) {
    ordered_json a = ordered_json::array(), b = ordered_json::array();
    for (const auto& p : m.points_a) a.push_back({p.x(), p.y()});
    for (const auto& p : m.points_b) b.push_back({p.x(), p.y()});
    ordered_json line{{"pair_id", m.pair_id}, {"points_a", a}, {"points_b", b}};
    if (!m.confidence.empty()) line["confidence"] = m.confidence;
    lines.push_back(std::move(line));
  }
  write_text_file(path, jsonl(lines));
}

std::vector<PredictedPose> read_predicted_poses(const fs::path& path) {
  std::vector<PredictedPose> out;
  for_each_jsonl(path, [&](const json& j) {
    PredictedPose p;
    p.pair_id = j.at("pair_id").get<std::string>();
    const auto q = quat_of(j.at("q_wxyz"));
    if (!(q.norm() > 0.0)) throw std::runtime_error("zero quaternion");
    p.pose.rotation = q.normalized().toRotationMatrix();
    p.pose.translation = vec3_of(j.at("t_xyz"));
    p.metric = j.value("metric", true);
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<EvalRecord> read_eval_records(const fs::path& path) {
  std::vector<EvalRecord> out;
  for_each_jsonl(path, [&](const json& j) {
    EvalRecord r;
    r.pair_id = j.at("pair_id").get<std::string>();
    r.rotation_err_deg = optional_double(j, "rotation_err_deg");
    r.translation_err_m = optional_double(j, "translation_err_m");
    r.success = j.at("success").get<bool>();
    const auto reason = failure_reason_from_string(j.value("failure", std::string("none")));
    if (!reason) throw std::runtime_error("unknown failure reason");
    r.failure = *reason;
    const std::string source = j.value("source", std::string("none"));
    for (auto s : {PoseSource::Essential, PoseSource::RotationOnly, PoseSource::External,
                   PoseSource::None}) {
      if (to_string(s) == source) r.source = s;
    }
    r.matches = j.value("matches", std::size_t{0});
    r.inliers = j.value("inliers", std::size_t{0});
    out.push_back(std::move(r));
  });
  return out;
}

void write_eval_records(const fs::path& path, const std::vector<EvalRecord>& records) {
  std::vector<ordered_json> lines;
  for (const auto& r : records) {
    lines.push_back({{"pair_id", r.pair_id},
                     {"rotation_err_deg", optional_json(r.rotation_err_deg)},
                     {"translation_err_m", optional_json(r.translation_err_m)},
                     {"success", r.success},
                     {"failure", std::string(to_string(r.failure))},
                     {"source", std::string(to_string(r.source))},
                     {"matches", r.matches},
                     {"inliers", r.inliers}});
  }
  write_text_file(path, jsonl(lines));
}

void write_alignment_report(const fs::path& path, const AlignmentResult& result,
                            const std::vector<std::string>& image_ids) {
  ordered_json j;
  j["scale"] = result.transform.scale;
  ordered_json rot = ordered_json::array();
  for (int r = 0; r < 3; ++r)
    rot.push_back({result.transform.rotation(r, 0), result.transform.rotation(r, 1),
                   result.transform.rotation(r, 2)});
  j["rotation"] = rot;
  j["translation"] = vec3_json(result.transform.translation);
  j["inlier_count"] = result.inlier_count;
  j["iterations"] = result.iterations;
  ordered_json poses = ordered_json::array();
  for (std::size_t i = 0; i < result.residuals.size(); ++i) {
    poses.push_back({{"image_id", i < image_ids.size() ? image_ids[i] : std::to_string(i)},
                     {"residual", result.residuals[i]},
                     {"inlier", static_cast<bool>(result.inlier_mask[i])}});
  }
  j["poses"] = poses;
  write_text_file(path, j.dump(2) + "\n");
}

fs::path depth_file(const fs::path& dir, const std::string& image_id) {
  return dir / (image_id + ".depth.cvb");
}

fs::path normal_file(const fs::path& dir, const std::string& image_id) {
  return dir / (image_id + ".normal.cvb");
}

fs::path covis_file(const fs::path& dir, const std::string& pair_id, bool forward) {
  return dir / (pair_id + (forward ? ".ab" : ".ba") + ".covis.cvb");
}

}  // namespace cvb
