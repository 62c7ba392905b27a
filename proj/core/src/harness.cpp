#include "auglift/harness.hpp"

#include "auglift/interchange.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

namespace auglift::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Field access that reports the dotted path of whatever is missing or mistyped.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  bool has(const char* key) const { return j_.contains(key); }

  template <typename T>
  T req(const char* key) const {
    if (!j_.contains(key)) throw Error("schema_error", "missing required field '" + sub(key) + "'");
    return as<T>(key);
  }

  template <typename T>
  T opt(const char* key, T fallback) const {
    return j_.contains(key) ? as<T>(key) : fallback;
  }

  Reader child(const char* key) const {
    if (!j_.contains(key)) throw Error("schema_error", "missing required field '" + sub(key) + "'");
    if (!j_.at(key).is_object()) throw Error("schema_error", "field '" + sub(key) + "' must be an object");
    return Reader(j_.at(key), sub(key));
  }

  std::optional<Reader> maybe_child(const char* key) const {
    if (!j_.contains(key)) return std::nullopt;
    return child(key);
  }

  std::string sub(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  template <typename T>
  T as(const char* key) const {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error("schema_error", "field '" + sub(key) + "' has the wrong type");
    }
  }

  const json& j_;
  std::string path_;
};

synth::SceneConfig parse_scene(const Reader& r, std::uint64_t seed) {
  synth::SceneConfig s;
  s.seed = seed;
  const auto range = r.req<std::vector<double>>("camera_distance_range");
  if (range.size() != 2) throw Error("schema_error", "field '" + r.sub("camera_distance_range") + "' must have 2 entries");
  s.camera_distance_range = {range[0], range[1]};

  const auto res = r.opt<std::vector<int>>("resolution", {s.camera.width, s.camera.height});
  if (res.size() != 2) throw Error("schema_error", "field '" + r.sub("resolution") + "' must have 2 entries");
  s.camera.width = res[0];
  s.camera.height = res[1];
  s.camera.focal = r.opt<double>("focal", s.camera.focal);
  const auto pp = r.opt<std::vector<double>>("principal_point", {0.5 * res[0], 0.5 * res[1]});
  if (pp.size() != 2) throw Error("schema_error", "field '" + r.sub("principal_point") + "' must have 2 entries");
  s.camera.cx = pp[0];
  s.camera.cy = pp[1];

  if (auto n = r.maybe_child("noise")) {
    s.noise.sigma_visible = n->opt("sigma_visible", s.noise.sigma_visible);
    s.noise.sigma_occluded = n->opt("sigma_occluded", s.noise.sigma_occluded);
    s.noise.conf_high = n->opt("conf_high", s.noise.conf_high);
    s.noise.conf_low = n->opt("conf_low", s.noise.conf_low);
    s.noise.conf_knee = n->opt("conf_knee", s.noise.conf_knee);
    s.noise.conf_steepness = n->opt("conf_steepness", s.noise.conf_steepness);
    s.noise.conf_noise = n->opt("conf_noise", s.noise.conf_noise);
  }
  if (auto d = r.maybe_child("distortion")) {
    s.distortion.gain = d->opt("gain", s.distortion.gain);
    s.distortion.offset = d->opt("offset", s.distortion.offset);
    s.distortion.noise = d->opt("noise", s.distortion.noise);
  }
  s.placement_jitter = r.opt("placement_jitter", s.placement_jitter);
  s.visibility_margin = r.opt("visibility_margin", s.visibility_margin);
  s.max_retries = r.opt("max_retries", s.max_retries);
  if (r.has("angle_ranges")) {
    const auto ranges = r.req<std::vector<std::vector<double>>>("angle_ranges");
    if (ranges.size() != s.sampler.joint_ranges.size())
      throw Error("schema_error", "field '" + r.sub("angle_ranges") + "' needs one entry per joint");
    for (std::size_t j = 0; j < ranges.size(); ++j) {
      if (ranges[j].size() != 6)
        throw Error("schema_error", "field '" + r.sub("angle_ranges") + "' entries must be [lo_x, lo_y, lo_z, hi_x, hi_y, hi_z]");
      for (std::size_t a = 0; a < 3; ++a) {
        s.sampler.joint_ranges[j].lo[a] = ranges[j][a];
        s.sampler.joint_ranges[j].hi[a] = ranges[j][a + 3];
      }
    }
  }
  return s;
}

json scene_to_json(const synth::SceneConfig& s) {
  json ranges = json::array();
  for (const auto& r : s.sampler.joint_ranges) ranges.push_back({r.lo[0], r.lo[1], r.lo[2], r.hi[0], r.hi[1], r.hi[2]});
  return {{"camera_distance_range", {s.camera_distance_range[0], s.camera_distance_range[1]}},
          {"resolution", {s.camera.width, s.camera.height}},
          {"focal", s.camera.focal},
          {"principal_point", {s.camera.cx, s.camera.cy}},
          {"noise",
           {{"sigma_visible", s.noise.sigma_visible},
            {"sigma_occluded", s.noise.sigma_occluded},
            {"conf_high", s.noise.conf_high},
            {"conf_low", s.noise.conf_low},
            {"conf_knee", s.noise.conf_knee},
            {"conf_steepness", s.noise.conf_steepness},
            {"conf_noise", s.noise.conf_noise}}},
          {"distortion", {{"gain", s.distortion.gain}, {"offset", s.distortion.offset}, {"noise", s.distortion.noise}}},
          {"placement_jitter", s.placement_jitter},
          {"visibility_margin", s.visibility_margin},
          {"max_retries", s.max_retries},
          {"angle_ranges", ranges}};
}

json report_to_json(const metrics::MetricReport& r) {
  return {{"mpjpe", r.mpjpe}, {"p_mpjpe", r.p_mpjpe}, {"pck150", r.pck150}, {"auc", r.auc}, {"n_frames", r.n_frames}};
}

RescalingArm arm_from_string(const std::string& s) {
  if (s == "on") return RescalingArm::On;
  if (s == "off") return RescalingArm::Off;
  throw Error("schema_error", "unknown rescaling arm '" + s + "'");
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw Error("io_error", "cannot create directory " + p.string());
}

AugLiftConfig arm_config(const AugLiftConfig& base, RescalingArm arm) {
  AugLiftConfig c = base;
  c.rescaling_enabled = arm == RescalingArm::On;
  return c;
}

}  // namespace

std::string to_string(RescalingArm arm) { return arm == RescalingArm::On ? "on" : "off"; }

const SplitConfig& ExperimentConfig::split(const std::string& name) const {
  for (const auto& s : splits) {
    if (s.name == name) return s;
  }
  throw Error("invalid_config", "no split named '" + name + "'");
}

bool ExperimentConfig::has_split(const std::string& name) const {
  return std::any_of(splits.begin(), splits.end(), [&](const auto& s) { return s.name == name; });
}

void ExperimentConfig::validate() const {
  for (const char* required : {"train", "test_id", "test_ood"}) {
    if (!has_split(required)) throw Error("schema_error", std::string("missing required split '") + required + "'");
  }
  std::set<std::uint64_t> split_seeds;
  for (const auto& s : splits) {
    if (s.n_samples < 1) throw Error("invalid_config", "split '" + s.name + "' needs n_samples >= 1");
    if (!split_seeds.insert(s.scene.seed).second)
      throw Error("invalid_config", "split '" + s.name + "' reuses a seed already used by another split");
    s.scene.validate();
  }
  AugLiftConfig a = auglift;
  a.rescaling_enabled = false;
  a.validate();
  od.validate();
  lifter.validate();
  train.validate();
  if (variants.empty()) throw Error("invalid_config", "variant list must not be empty");
  if (rescaling.empty()) throw Error("invalid_config", "rescaling arms must not be empty");
  if (seeds.empty()) throw Error("invalid_config", "at least one seed is required");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error("schema_error", std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error("schema_error", "config must be a JSON object");
  const Reader r(root, "");
  const int version = r.req<int>("schema_version");
  if (version != kSchemaVersion)
    throw Error("schema_error", "unsupported schema_version " + std::to_string(version));

  ExperimentConfig cfg;
  const json defaults = root.contains("scene_defaults") ? root.at("scene_defaults") : json::object();
  const Reader splits = r.child("splits");
  for (const auto& name : kSplitNames) {
    const auto split = splits.maybe_child(name.c_str());
    if (!split) continue;
    SplitConfig sc;
    sc.name = name;
    sc.n_samples = split->req<int>("n_samples");
    const auto seed = split->req<std::uint64_t>("seed");
    json scene = defaults;
    if (root.at("splits").at(name).contains("scene")) scene.merge_patch(root.at("splits").at(name).at("scene"));
    sc.scene = parse_scene(Reader(scene, splits.sub(name.c_str()) + ".scene"), seed);
    cfg.splits.push_back(std::move(sc));
  }
  for (const auto& [name, _] : root.at("splits").items()) {
    if (std::find(kSplitNames.begin(), kSplitNames.end(), name) == kSplitNames.end())
      throw Error("schema_error", "unknown split '" + name + "'");
  }

  if (auto a = r.maybe_child("auglift")) {
    cfg.auglift.radius = a->opt("radius", cfg.auglift.radius);
    cfg.auglift.d_max = a->opt("d_max", cfg.auglift.d_max);
    cfg.auglift.clip_lower = a->opt("clip_lower", cfg.auglift.clip_lower);
  }
  if (auto o = r.maybe_child("od")) {
    cfg.od.tau = o->opt("tau", cfg.od.tau);
    cfg.od.granularity = o->opt("granularity", cfg.od.granularity);
  }
  const Reader l = r.child("lifter");
  cfg.lifter.hidden_width = l.req<int>("hidden_width");
  cfg.lifter.num_blocks = l.req<int>("num_blocks");
  cfg.lifter.dropout_rate = l.opt("dropout_rate", cfg.lifter.dropout_rate);
  cfg.lifter.cue_dropout_rate = l.opt("cue_dropout_rate", cfg.lifter.cue_dropout_rate);

  const Reader t = r.child("train");
  cfg.train.learning_rate = t.req<double>("learning_rate");
  cfg.train.epochs = t.req<int>("epochs");
  cfg.train.batch_size = t.opt("batch_size", cfg.train.batch_size);
  cfg.train.momentum = t.opt("momentum", cfg.train.momentum);
  cfg.train.lr_decay = t.opt("lr_decay", cfg.train.lr_decay);
  cfg.train.history_samples = t.opt("history_samples", cfg.train.history_samples);
  cfg.train.loss = lifter::loss_from_string(t.opt<std::string>("loss", "mse"));

  for (const auto& v : r.req<std::vector<std::string>>("variants")) {
    try {
      cfg.variants.push_back(lifter::input_mode_from_string(v));
    } catch (const Error&) {
      throw Error("schema_error", "unknown variant '" + v + "'");
    }
  }
  const auto resc = r.req<std::string>("rescaling");
  if (resc == "both")
    cfg.rescaling = {RescalingArm::On, RescalingArm::Off};
  else
    cfg.rescaling = {arm_from_string(resc)};
  cfg.seeds = r.req<std::vector<std::uint64_t>>("seeds");
  cfg.output_dir = r.opt<std::string>("output_dir", "");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) { return parse_config(io::read_text_file(path)); }

std::string config_to_json(const ExperimentConfig& cfg) {
  json splits = json::object();
  for (const auto& s : cfg.splits)
    splits[s.name] = {{"n_samples", s.n_samples}, {"seed", s.scene.seed}, {"scene", scene_to_json(s.scene)}};
  json variants = json::array();
  for (auto v : cfg.variants) variants.push_back(std::string(lifter::to_string(v)));
  std::string resc = cfg.rescaling.size() == 2 ? "both" : to_string(cfg.rescaling.front());
  json j = {{"schema_version", kSchemaVersion},
            {"splits", splits},
            {"auglift", {{"radius", cfg.auglift.radius}, {"d_max", cfg.auglift.d_max}, {"clip_lower", cfg.auglift.clip_lower}}},
            {"od", {{"tau", cfg.od.tau}, {"granularity", cfg.od.granularity}}},
            {"lifter",
             {{"hidden_width", cfg.lifter.hidden_width},
              {"num_blocks", cfg.lifter.num_blocks},
              {"dropout_rate", cfg.lifter.dropout_rate},
              {"cue_dropout_rate", cfg.lifter.cue_dropout_rate}}},
            {"train",
             {{"learning_rate", cfg.train.learning_rate},
              {"momentum", cfg.train.momentum},
              {"lr_decay", cfg.train.lr_decay},
              {"batch_size", cfg.train.batch_size},
              {"epochs", cfg.train.epochs},
              {"history_samples", cfg.train.history_samples},
              {"loss", std::string(lifter::to_string(cfg.train.loss))}}},
            {"variants", variants},
            {"rescaling", resc},
            {"seeds", cfg.seeds},
            {"output_dir", cfg.output_dir}};
  return j.dump(2);
}

std::string split_manifest(const SplitConfig& split, int n_frames, double mean_subject_depth, int visible, int occluded) {
  json m = {{"schema_version", kSchemaVersion},
            {"split", split.name},
            {"seed", split.scene.seed},
            {"n_samples", split.n_samples},
            {"scene", scene_to_json(split.scene)},
            {"counts", {{"frames", n_frames}, {"visible_joints", visible}, {"occluded_joints", occluded}}},
            {"mean_subject_depth_m", mean_subject_depth}};
  return m.dump(2);
}

SplitData generate_split(const SplitConfig& split, int radius) {
  SplitData d;
  d.name = split.name;
  double depth_sum = 0.0;
  int visible = 0, occluded = 0;
  const int root = SkeletonTopology::h36m().root_index();
  synth::for_each_sample(split.scene, split.n_samples, [&](int, synth::LabeledSample&& s) {
    d.sampled_depths.push_back(sample_depths(s.detection, s.depth, radius));
    depth_sum += s.gt_camera[static_cast<std::size_t>(root)].z();
    for (bool v : s.visibility) (v ? visible : occluded) += 1;
    d.detections.push_back(std::move(s.detection));
    d.gt.push_back(std::move(s.gt_rel));
    d.visibility.push_back(std::move(s.visibility));
  });
  d.mean_subject_depth = depth_sum / static_cast<double>(d.size());
  d.manifest = split_manifest(split, d.size(), d.mean_subject_depth, visible, occluded);
  return d;
}

void write_split(const SplitConfig& split, const fs::path& dir) {
  ensure_dir(dir / "depth");
  std::ofstream det(dir / "detections.jsonl");
  std::ofstream gt(dir / "gt.jsonl");
  if (!det || !gt) throw Error("io_error", "cannot write split files under " + dir.string());
  double depth_sum = 0.0;
  int visible = 0, occluded = 0;
  const int root = SkeletonTopology::h36m().root_index();
  synth::for_each_sample(split.scene, split.n_samples, [&](int, synth::LabeledSample&& s) {
    det << io::detection_to_json(s.detection) << '\n';
    gt << io::ground_truth_to_json({s.detection.frame_id, s.gt_rel}) << '\n';
    io::write_pfm(dir / "depth" / io::pfm_name(s.detection.frame_id), s.depth);
    depth_sum += s.gt_camera[static_cast<std::size_t>(root)].z();
    for (bool v : s.visibility) (v ? visible : occluded) += 1;
  });
  det.close();
  gt.close();
  if (!det || !gt) throw Error("io_error", "failed writing split files under " + dir.string());
  io::write_text_file(dir / "manifest.json",
                      split_manifest(split, split.n_samples, depth_sum / split.n_samples, visible, occluded));
}

SplitData load_split(const fs::path& dir, int radius) {
  SplitData d;
  d.name = dir.filename().string();
  d.detections = io::read_detections(dir / "detections.jsonl");
  const auto gts = io::read_ground_truth(dir / "gt.jsonl");
  if (gts.size() != d.detections.size())
    throw Error("pairing_mismatch", dir.string() + ": detections and ground truth differ in frame count");
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (gts[i].frame_id != d.detections[i].frame_id)
      throw Error("pairing_mismatch", dir.string() + ": frame ids of detections and ground truth disagree");
    const DepthRaster raster = io::read_pfm(dir / "depth" / io::pfm_name(d.detections[i].frame_id));
    d.sampled_depths.push_back(sample_depths(d.detections[i], raster, radius));
    d.gt.push_back(gts[i].pose);
  }
  if (fs::exists(dir / "manifest.json")) {
    d.manifest = io::read_text_file(dir / "manifest.json");
    const auto m = json::parse(d.manifest, nullptr, false);
    if (!m.is_discarded() && m.contains("mean_subject_depth_m")) d.mean_subject_depth = m["mean_subject_depth_m"].get<double>();
  }
  return d;
}

double fit_mean_box_size(const SplitData& train) {
  std::vector<Pose2D> poses;
  poses.reserve(train.detections.size());
  for (const auto& d : train.detections) poses.push_back(d.pose);
  return compute_mean_box_size(poses);
}

std::vector<double> flatten(const AugmentedPose& pose, lifter::InputMode mode) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(pose.size() * lifter::channels_per_joint(mode)));
  if (mode == lifter::InputMode::XYOD && !pose.od) throw Error("invalid_argument", "XY+OD3 input needs an OD channel");
  for (std::size_t j = 0; j < pose.features.size(); ++j) {
    const auto& f = pose.features[j];
    out.push_back(f.x);
    out.push_back(f.y);
    switch (mode) {
      case lifter::InputMode::XY:
        break;
      case lifter::InputMode::XYC:
        out.push_back(f.conf);
        break;
      case lifter::InputMode::XYCD:
        out.push_back(f.conf);
        out.push_back(f.depth);
        break;
      case lifter::InputMode::XYOD:
        out.push_back((*pose.od)[j]);
        break;
    }
  }
  return out;
}

lifter::Dataset build_dataset(const SplitData& split, lifter::InputMode mode, RescalingArm arm,
                              const AugLiftConfig& auglift, const ordinal::ODConfig& od) {
  const AugLiftConfig cfg = arm_config(auglift, arm);
  const int n = split.size();
  if (n == 0) throw Error("invalid_argument", "split '" + split.name + "' is empty");
  const int k = split.detections.front().joint_count();
  lifter::Dataset data;
  data.inputs.resize(k * lifter::channels_per_joint(mode), n);
  data.targets.resize(3 * k, n);
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    AugmentedPose pose = augment_with_depths(split.detections[idx], split.sampled_depths[idx], cfg);
    const Pose3D& gt = split.gt[idx];
    if (mode == lifter::InputMode::XYOD) {
      std::vector<double> z_rel;
      for (const auto& j : gt.joints) z_rel.push_back(j.z() / 1000.0);
      pose.od = ordinal::od_input_channel(ordinal::three_way_labels(z_rel, od.tau));
    }
    const auto x = flatten(pose, mode);
    data.inputs.col(i) = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    for (int j = 0; j < k; ++j) data.targets.block<3, 1>(3 * j, i) = gt.joints[static_cast<std::size_t>(j)];
  }
  return data;
}

metrics::MetricReport evaluate_split(const lifter::LifterParams& params, const lifter::Dataset& data) {
  const Eigen::MatrixXd pred = lifter::forward(params, data.inputs, lifter::Phase::Eval);
  const int k = params.config.joints;
  std::vector<Pose3D> preds(static_cast<std::size_t>(data.size())), gts(static_cast<std::size_t>(data.size()));
  for (int i = 0; i < data.size(); ++i) {
    for (int j = 0; j < k; ++j) {
      preds[static_cast<std::size_t>(i)].joints.emplace_back(pred.block<3, 1>(3 * j, i));
      gts[static_cast<std::size_t>(i)].joints.emplace_back(data.targets.block<3, 1>(3 * j, i));
    }
  }
  return metrics::evaluate(preds, gts);
}

std::string CellResult::key() const {
  std::string v(lifter::to_string(variant));
  std::replace(v.begin(), v.end(), '+', '_');
  return v + "_rescale-" + to_string(rescaling) + "_seed-" + std::to_string(seed);
}

double delta_percent(double baseline, double variant) {
  if (!(baseline > 0.0)) throw Error("invalid_argument", "baseline error must be > 0");
  return (baseline - variant) / baseline * 100.0;
}

std::string metric_report_json(const metrics::MetricReport& r) { return report_to_json(r).dump(); }

std::vector<Aggregate> aggregate(const std::vector<CellResult>& cells, const ExperimentConfig& cfg) {
  std::vector<Aggregate> out;
  for (auto variant : cfg.variants) {
    for (auto arm : cfg.rescaling) {
      for (const auto& split : cfg.splits) {
        if (split.name == "train") continue;
        std::vector<metrics::MetricReport> rs;
        for (const auto& c : cells) {
          if (c.ok && c.variant == variant && c.rescaling == arm) rs.push_back(c.metrics.at(split.name));
        }
        Aggregate a{variant, arm, split.name, {}, {}, static_cast<int>(rs.size()), std::nullopt, std::nullopt};
        if (!rs.empty()) {
          auto field_stats = [&](auto get, double& mean, double& sd) {
            double s = 0.0;
            for (const auto& r : rs) s += get(r);
            mean = s / static_cast<double>(rs.size());
            double ss = 0.0;
            for (const auto& r : rs) ss += (get(r) - mean) * (get(r) - mean);
            sd = rs.size() > 1 ? std::sqrt(ss / static_cast<double>(rs.size() - 1)) : 0.0;
          };
          field_stats([](const auto& r) { return r.mpjpe; }, a.mean.mpjpe, a.stddev.mpjpe);
          field_stats([](const auto& r) { return r.p_mpjpe; }, a.mean.p_mpjpe, a.stddev.p_mpjpe);
          field_stats([](const auto& r) { return r.pck150; }, a.mean.pck150, a.stddev.pck150);
          field_stats([](const auto& r) { return r.auc; }, a.mean.auc, a.stddev.auc);
          a.mean.n_frames = rs.front().n_frames;
          a.stddev.n_frames = rs.front().n_frames;
        }
        out.push_back(a);
      }
    }
  }
  auto find = [&](lifter::InputMode v, RescalingArm arm, const std::string& split) -> const Aggregate* {
    for (const auto& a : out) {
      if (a.variant == v && a.rescaling == arm && a.split == split && a.n_seeds > 0) return &a;
    }
    return nullptr;
  };
  for (auto& a : out) {
    if (a.n_seeds == 0) continue;
    if (a.variant != lifter::InputMode::XY) {
      if (const auto* base = find(lifter::InputMode::XY, a.rescaling, a.split))
        a.delta_vs_xy = delta_percent(base->mean.mpjpe, a.mean.mpjpe);
    }
    if (a.rescaling == RescalingArm::On) {
      if (const auto* off = find(a.variant, RescalingArm::Off, a.split))
        a.delta_vs_no_rescale = delta_percent(off->mean.mpjpe, a.mean.mpjpe);
    }
  }
  return out;
}

std::string run_ablation(const ExperimentConfig& cfg, const fs::path& run_dir, const AblationOptions& opts) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ensure_dir(run_dir / "manifests");
  ensure_dir(run_dir / "metrics");
  if (opts.write_checkpoints) ensure_dir(run_dir / "checkpoints");
  io::write_text_file(run_dir / "config.json", config_to_json(cfg));

  std::map<std::string, SplitData> splits;
  json manifests = json::object();
  for (const auto& s : cfg.splits) {
    SplitData d = opts.data_dir ? load_split(*opts.data_dir / s.name, cfg.auglift.radius)
                                : generate_split(s, cfg.auglift.radius);
    const auto rel = fs::path("manifests") / (s.name + ".json");
    io::write_text_file(run_dir / rel, d.manifest);
    manifests[s.name] = rel.generic_string();
    splits.emplace(s.name, std::move(d));
  }
  AugLiftConfig auglift = cfg.auglift;
  auglift.mean_box_size = fit_mean_box_size(splits.at("train"));

  using Key = std::pair<lifter::InputMode, RescalingArm>;
  std::map<Key, std::map<std::string, lifter::Dataset>> datasets;
  for (auto v : cfg.variants)
    for (auto arm : cfg.rescaling)
      for (const auto& [name, data] : splits) datasets[{v, arm}][name] = build_dataset(data, v, arm, auglift, cfg.od);

  std::vector<CellResult> cells;
  for (auto v : cfg.variants)
    for (auto arm : cfg.rescaling)
      for (auto seed : cfg.seeds) {
        CellResult c;
        c.variant = v;
        c.rescaling = arm;
        c.seed = seed;
        cells.push_back(std::move(c));
      }

  auto run_cell = [&](CellResult& c) {
    const auto start = std::chrono::steady_clock::now();
    const auto& data = datasets.at({c.variant, c.rescaling});
    lifter::LifterConfig lc = cfg.lifter;
    lc.input_mode = c.variant;
    lc.joints = splits.at("train").detections.front().joint_count();
    lifter::TrainConfig tc = cfg.train;
    tc.seed = c.seed;
    try {
      auto result = lifter::train(data.at("train"), lc, tc);
      c.history = std::move(result.history);
      for (const auto& [name, d] : data) {
        if (name != "train") c.metrics[name] = evaluate_split(result.params, d);
      }
      if (opts.write_checkpoints) {
        c.checkpoint = (fs::path("checkpoints") / (c.key() + ".bin")).generic_string();
        lifter::save_params(result.params, run_dir / c.checkpoint);
      }
      c.ok = true;
    } catch (const Error& e) {
      c.ok = false;
      c.error = e.code() + ": " + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const int threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(cells.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(cells[i]);
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  json cell_json = json::array();
  for (const auto& c : cells) {
    json m = json::object();
    for (const auto& [name, r] : c.metrics) m[name] = report_to_json(r);
    json metrics_file = {{"variant", std::string(lifter::to_string(c.variant))},
                         {"rescaling", to_string(c.rescaling)},
                         {"seed", c.seed},
                         {"status", c.ok ? "ok" : "failed"},
                         {"metrics", m}};
    if (!c.ok) metrics_file["error"] = c.error;
    io::write_text_file(run_dir / "metrics" / (c.key() + ".json"), metrics_file.dump(2));
    json cj = metrics_file;
    cj["checkpoint"] = c.checkpoint;
    cj["history"] = c.history;
    cj["train_seconds"] = c.seconds;
    cell_json.push_back(std::move(cj));
  }

  json agg_json = json::array();
  for (const auto& a : aggregate(cells, cfg)) {
    json aj = {{"variant", std::string(lifter::to_string(a.variant))},
               {"rescaling", to_string(a.rescaling)},
               {"split", a.split},
               {"n_seeds", a.n_seeds},
               {"mean", report_to_json(a.mean)},
               {"std", report_to_json(a.stddev)},
               {"delta_vs_xy_pct", a.delta_vs_xy ? json(*a.delta_vs_xy) : json(nullptr)},
               {"delta_vs_no_rescale_pct", a.delta_vs_no_rescale ? json(*a.delta_vs_no_rescale) : json(nullptr)}};
    agg_json.push_back(std::move(aj));
  }

  json record = {{"schema_version", kSchemaVersion},
                 {"config", json::parse(config_to_json(cfg))},
                 {"mean_box_size", auglift.mean_box_size},
                 {"manifests", manifests},
                 {"cells", cell_json},
                 {"aggregates", agg_json},
                 {"wall_clock_seconds",
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  const std::string text = record.dump(2);
  io::write_text_file(run_dir / "run_record.json", text);
  const RenderedReport rep = render_report(text);
  io::write_text_file(run_dir / "report.txt", rep.text);
  io::write_text_file(run_dir / "report.csv", rep.csv);
  return text;
}

AugmentSummary run_augment(const fs::path& input_dir, const AugLiftConfig& cfg, const fs::path& out_path) {
  cfg.validate();
  const auto det_path = input_dir / "detections.jsonl";
  const auto lines = io::read_lines(det_path);
  std::ofstream out(out_path);
  if (!out) throw Error("io_error", "cannot open " + out_path.string() + " for writing");
  AugmentSummary summary;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::optional<std::int64_t> frame_id;
    try {
      const DetectionFrame frame = io::detection_from_json(lines[i]);
      frame_id = frame.frame_id;
      const auto pfm = input_dir / "depth" / io::pfm_name(frame.frame_id);
      if (!fs::exists(pfm)) throw Error("missing_depth", "no depth raster " + pfm.filename().string());
      const DepthRaster raster = io::read_pfm(pfm);
      const AugmentedPose pose = augment_frame(frame, raster, cfg);
      out << io::augmented_to_json(pose) << '\n';
      ++summary.written;
    } catch (const Error& e) {
      json err = {{"line", i + 1}, {"code", e.code()}, {"message", e.what()}};
      if (frame_id) err["frame_id"] = *frame_id;
      summary.errors.push_back(err.dump());
      ++summary.skipped;
    }
  }
  out.close();
  if (!out) throw Error("io_error", "failed writing " + out_path.string());
  return summary;
}

}  // namespace auglift::harness
