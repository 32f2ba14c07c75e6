#include "cvb/pipeline.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "cvb/criteria.hpp"
#include "cvb/error.hpp"
#include "cvb/io.hpp"
#include "cvb/numeric.hpp"
#include "cvb/parallel.hpp"
#include "cvb/synth.hpp"

namespace cvb::pipeline {

namespace {

using CameraTable = std::unordered_map<std::string, CameraRecord>;

CameraTable index_cameras(const fs::path& path) {
  CameraTable table;
  for (auto& c : read_cameras(path)) {
    const std::string id = c.image_id;
    if (!table.emplace(id, std::move(c)).second)
      fail(ErrorCode::Format, path.string() + ": duplicate image_id " + id);
  }
  return table;
}

const CameraRecord& camera_of(const CameraTable& table, const std::string& id,
                              const fs::path& source) {
  const auto it = table.find(id);
  if (it == table.end())
    fail(ErrorCode::Format, source.string() + ": image_id " + id + " is not in cameras");
  return it->second;
}

std::vector<PairRecord> sorted_pairs(const fs::path& path) {
  auto pairs = read_pairs(path);
  std::sort(pairs.begin(), pairs.end(),
            [](const PairRecord& a, const PairRecord& b) { return a.pair_id < b.pair_id; });
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (pairs[i].pair_id == pairs[i - 1].pair_id)
      fail(ErrorCode::Format, path.string() + ": duplicate pair_id " + pairs[i].pair_id);
  }
  return pairs;
}

ViewInput load_view(const CameraRecord& cam, const fs::path& depth_dir) {
  ViewInput v;
  v.intrinsics = cam.intrinsics;
  v.pose = cam.pose;
  v.depth = read_depth(depth_file(depth_dir, cam.image_id));
  if (!v.depth.same_shape(cam.intrinsics.width, cam.intrinsics.height))
    fail(ErrorCode::Format, depth_file(depth_dir, cam.image_id).string() +
                                ": raster size does not match the camera");
  return v;
}

std::string percent_text(std::size_t num, std::size_t den) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", den == 0 ? 0.0 : 100.0 * num / den);
  return buf;
}

}  // namespace

void run_align(const AlignStage& stage, const StageContext& ctx) {
  const auto recon = read_cameras(stage.reconstructed);
  const CameraTable gt = index_cameras(stage.ground_truth);
  std::vector<Vec3> src, dst;
  std::vector<RigidPose> poses;
  std::vector<const CameraRecord*> used;
  for (const auto& r : recon) {
    const auto it = gt.find(r.image_id);
    if (it == gt.end()) {
      ctx.warn("align: " + r.image_id + " has no ground-truth pose, skipped");
      continue;
    }
    src.push_back(r.pose.center);
    dst.push_back(it->second.pose.center);
    poses.push_back(r.pose);
    used.push_back(&r);
  }
  const AlignmentResult result = lo_ransac_align(src, dst, stage.options);
  const auto aligned = apply_and_filter(poses, result);

  std::vector<CameraRecord> out;
  std::vector<std::string> ids;
  std::size_t k = 0;
  for (std::size_t i = 0; i < used.size(); ++i) {
    ids.push_back(used[i]->image_id);
    if (!result.inlier_mask[i]) continue;
    out.push_back({used[i]->image_id, used[i]->intrinsics, aligned[k++]});
  }
  write_cameras(stage.out_cameras, out);
  write_alignment_report(stage.out_report, result, ids);
  ctx.info("align: " + std::to_string(result.inlier_count) + " of " +
           std::to_string(used.size()) + " poses kept, scale " +
           std::to_string(result.transform.scale));
}

void run_covis(const CovisStage& stage, const StageContext& ctx) {
  stage.params.validate();
  const CameraTable cams = index_cameras(stage.cameras);
  const auto pairs = sorted_pairs(stage.pairs);
  fs::create_directories(stage.out_dir);

  const auto with_normals = [&](ViewInput v, const std::string& id) {
    if (stage.normal_dir.empty()) {
      v.normals = normals_from_depth(v.depth, v.intrinsics, stage.normal_window);
    } else {
      v.normals = read_normals(normal_file(stage.normal_dir, id));
      if (!v.normals.same_shape(v.depth))
        fail(ErrorCode::Format, normal_file(stage.normal_dir, id).string() +
                                    ": raster size does not match the depth map");
    }
    return v;
  };

  parallel_for(pairs.size(), ctx.threads, [&](std::size_t i) {
    const PairRecord& p = pairs[i];
    const auto& ca = camera_of(cams, p.image_a, stage.pairs);
    const auto& cb = camera_of(cams, p.image_b, stage.pairs);
    const ViewInput a = with_normals(load_view(ca, stage.depth_dir), ca.image_id);
    const ViewInput b = with_normals(load_view(cb, stage.depth_dir), cb.image_id);
    const CovisPair covis = covisibility_pair(a, b, stage.params);
    write_covis(covis_file(stage.out_dir, p.pair_id, true), covis.forward);
    write_covis(covis_file(stage.out_dir, p.pair_id, false), covis.backward);
  });
  ctx.info("covis: " + std::to_string(pairs.size()) + " pairs");
}

void run_criteria(const CriteriaStage& stage, const StageContext& ctx) {
  const CameraTable cams = index_cameras(stage.cameras);
  const auto pairs = sorted_pairs(stage.pairs);
  std::vector<CriteriaRecord> records(pairs.size());
  parallel_for(pairs.size(), ctx.threads, [&](std::size_t i) {
    const PairRecord& p = pairs[i];
    const ViewInput a = load_view(camera_of(cams, p.image_a, stage.pairs), stage.depth_dir);
    const ViewInput b = load_view(camera_of(cams, p.image_b, stage.pairs), stage.depth_dir);
    CovisPair covis{read_covis(covis_file(stage.covis_dir, p.pair_id, true)),
                    read_covis(covis_file(stage.covis_dir, p.pair_id, false))};
    if (!covis.forward.same_shape(a.depth) || !covis.backward.same_shape(b.depth))
      fail(ErrorCode::Format, covis_file(stage.covis_dir, p.pair_id, true).string() +
                                  ": covis size does not match the depth maps");
    const CriteriaResult r = criteria_from_maps(a, b, covis);
    records[i] = {p.pair_id, p.image_a, p.image_b, r.criteria, r.omega, r.covis_ab, r.covis_ba};
  });
  write_criteria(stage.out, records);
  const auto defined = std::count_if(records.begin(), records.end(),
                                     [](const CriteriaRecord& r) { return r.criteria.has_value(); });
  ctx.info("criteria: " + std::to_string(records.size()) + " pairs, " +
           std::to_string(defined) + " with co-visible pixels");
}

void run_build(const BuildStage& stage, const StageContext& ctx) {
  if (stage.target == 0) fail(ErrorCode::Config, "target must be positive");
  const auto records = read_criteria(stage.criteria);
  const BenchmarkManifest m = build_manifest(records, stage.target, stage.seed, stage.all_boxes);
  for (const auto& w : m.warnings) ctx.warn("build: " + w);
  write_manifest(stage.out, m);
  std::size_t populated = 0;
  for (const auto& b : m.boxes) populated += b.pairs.empty() ? 0 : 1;
  ctx.info("build: " + std::to_string(m.total_pairs()) + " pairs in " +
           std::to_string(populated) + " populated boxes");
}

void run_eval(const EvalStage& stage, const StageContext& ctx) {
  if (stage.matches.empty() == stage.poses.empty())
    fail(ErrorCode::Config, "eval needs exactly one of matches or poses");
  if (!stage.matches.empty() && stage.depth_dir.empty())
    fail(ErrorCode::Config, "eval with matches needs a depth directory");
  const BenchmarkManifest manifest = read_manifest(stage.manifest);
  const CameraTable gt = index_cameras(stage.ground_truth);

  std::map<std::string, std::pair<std::string, std::string>> images = manifest.pair_images;
  if (!stage.pairs.empty()) {
    for (const auto& p : read_pairs(stage.pairs)) images[p.pair_id] = {p.image_a, p.image_b};
  }
  std::set<std::string> ids;
  for (const auto& b : manifest.boxes) ids.insert(b.pairs.begin(), b.pairs.end());
  const std::vector<std::string> pair_ids(ids.begin(), ids.end());

  std::unordered_map<std::string, MatchSet> matches;
  std::unordered_map<std::string, PredictedPose> predicted;
  if (!stage.matches.empty()) {
    for (auto& m : read_matches(stage.matches)) {
      const std::string id = m.pair_id;
      if (!matches.emplace(id, std::move(m)).second)
        fail(ErrorCode::Format, stage.matches.string() + ": duplicate pair_id " + id);
    }
  } else {
    for (auto& p : read_predicted_poses(stage.poses)) {
      const std::string id = p.pair_id;
      if (!predicted.emplace(id, std::move(p)).second)
        fail(ErrorCode::Format, stage.poses.string() + ": duplicate pair_id " + id);
    }
  }

  std::vector<EvalRecord> records(pair_ids.size());
  parallel_for(pair_ids.size(), ctx.threads, [&](std::size_t i) {
    const std::string& id = pair_ids[i];
    const auto img = images.find(id);
    const CameraRecord* ca = nullptr;
    const CameraRecord* cb = nullptr;
    if (img != images.end()) {
      const auto a = gt.find(img->second.first);
      const auto b = gt.find(img->second.second);
      if (a != gt.end()) ca = &a->second;
      if (b != gt.end()) cb = &b->second;
    }
    if (!ca || !cb) {
      records[i] = judge(id, std::nullopt, FailureReason::MissingInput);
      return;
    }
    const RelativePose truth = relative_pose(ca->pose, cb->pose);
    if (!stage.poses.empty()) {
      const auto p = predicted.find(id);
      if (p == predicted.end()) {
        records[i] = judge(id, std::nullopt, FailureReason::MissingPair);
      } else if (!p->second.metric) {
        records[i] = judge(id, std::nullopt, FailureReason::ScaleUnrecoverable);
        records[i].source = PoseSource::External;
      } else {
        records[i] = evaluate_pose(id, p->second.pose, truth);
      }
      return;
    }
    const auto m = matches.find(id);
    if (m == matches.end()) {
      records[i] = judge(id, std::nullopt, FailureReason::MissingPair);
      return;
    }
    const fs::path depth_path = depth_file(stage.depth_dir, ca->image_id);
    if (!fs::exists(depth_path)) {
      records[i] = judge(id, std::nullopt, FailureReason::MissingInput);
      records[i].matches = m->second.size();
      return;
    }
    const DepthMap depth = read_depth(depth_path);
    PairEvalOptions opts = stage.options;
    opts.essential.seed = splitmix64(stage.seed ^ fnv1a64(id));
    records[i] = evaluate_matches(m->second, ca->intrinsics, cb->intrinsics, depth, truth, opts);
  });

  fs::create_directories(stage.out_dir);
  write_eval_records(stage.out_dir / "records.jsonl", records);
  const Report report = aggregate({{stage.method, records}}, manifest, stage.missing);
  for (const auto& w : report.warnings) ctx.warn("eval: " + w);
  emit_report(report, stage.out_dir);
  const auto ok = static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const EvalRecord& r) { return r.success; }));
  ctx.info("eval: " + std::to_string(ok) + " of " + std::to_string(records.size()) +
           " pairs succeeded (" + percent_text(ok, records.size()) + ")");
}

void run_report(const ReportStage& stage, const StageContext& ctx) {
  if (stage.records.empty()) fail(ErrorCode::Config, "report needs at least one records file");
  const BenchmarkManifest manifest = read_manifest(stage.manifest);
  std::vector<MethodRecords> methods;
  for (const auto& [name, path] : stage.records) {
    methods.push_back({name, read_eval_records(path)});
  }
  const Report report = aggregate(methods, manifest, stage.missing);
  for (const auto& w : report.warnings) ctx.warn("report: " + w);
  emit_report(report, stage.out_dir);
  ctx.info("report: " + std::to_string(methods.size()) + " methods over " +
           std::to_string(report.boxes.size()) + " boxes");
}

void run_synth(const SynthStage& stage, const StageContext& ctx) {
  if (stage.suite != "default") fail(ErrorCode::Config, "unknown suite: " + stage.suite);
  synth::SuiteOptions options;
  options.seed = stage.seed;
  synth::make_fixture_suite(stage.out_dir, options);
  ctx.info("synth: wrote suite '" + stage.suite + "' to " + stage.out_dir.string());
}

}  // namespace cvb::pipeline
