#pragma once

#include "auglift/lifter.hpp"
#include "auglift/metrics.hpp"
#include "auglift/ordinal.hpp"
#include "auglift/pipeline.hpp"
#include "auglift/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

// ID/OOD experiment protocol: configs, split featurization, the
// (variant x rescaling x seed) ablation grid, run records and reports.
namespace auglift::harness {

inline constexpr int kSchemaVersion = 1;

/// Canonical split names, in report order.
inline const std::vector<std::string> kSplitNames = {"train", "val", "test_id", "test_ood"};

struct SplitConfig {
  std::string name;
  int n_samples = 0;
  synth::SceneConfig scene;  // scene.seed is the split seed
};

enum class RescalingArm { On, Off };

std::string to_string(RescalingArm arm);

struct ExperimentConfig {
  std::vector<SplitConfig> splits;  // train first; evaluation splits follow
  AugLiftConfig auglift;            // mean_box_size is fitted from the train split
  ordinal::ODConfig od;
  lifter::LifterConfig lifter;
  lifter::TrainConfig train;
  std::vector<lifter::InputMode> variants;
  std::vector<RescalingArm> rescaling;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;

  const SplitConfig& split(const std::string& name) const;
  bool has_split(const std::string& name) const;
  void validate() const;
};

/// Strict parse: a missing required field is an error naming its path.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON snapshot (round-trips through parse_config).
std::string config_to_json(const ExperimentConfig& cfg);

/// Per-frame quantities every variant is assembled from.
struct SplitData {
  std::string name;
  std::vector<DetectionFrame> detections;
  std::vector<std::vector<double>> sampled_depths;  // meters, raw neighborhood minima
  std::vector<Pose3D> gt;                           // mm, root-relative
  std::vector<std::vector<bool>> visibility;
  double mean_subject_depth = 0.0;                  // meters, root Z averaged over frames
  std::string manifest;                             // JSON

  int size() const { return static_cast<int>(detections.size()); }
};

/// Generates the split in memory; rasters are sampled and dropped.
SplitData generate_split(const SplitConfig& split, int radius);

/// Reads a split directory written by write_split (detections.jsonl, gt.jsonl, depth/).
SplitData load_split(const std::filesystem::path& dir, int radius);

/// Writes the interchange files and manifest for a split.
void write_split(const SplitConfig& split, const std::filesystem::path& dir);

std::string split_manifest(const SplitConfig& split, int n_frames, double mean_subject_depth, int visible, int occluded);

/// Mean training-set box size from the raw detections.
double fit_mean_box_size(const SplitData& train);

/// Flattened lifter inputs (and mm targets) for one variant and rescaling arm.
lifter::Dataset build_dataset(const SplitData& split, lifter::InputMode mode, RescalingArm arm,
                              const AugLiftConfig& auglift, const ordinal::ODConfig& od);

/// Flattens one augmented pose for a mode. XYOD needs `od` set on the pose.
std::vector<double> flatten(const AugmentedPose& pose, lifter::InputMode mode);

metrics::MetricReport evaluate_split(const lifter::LifterParams& params, const lifter::Dataset& data);

struct CellResult {
  lifter::InputMode variant = lifter::InputMode::XY;
  RescalingArm rescaling = RescalingArm::On;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::map<std::string, metrics::MetricReport> metrics;  // by split name
  std::vector<double> history;
  double seconds = 0.0;
  std::string checkpoint;  // relative to the run directory

  std::string key() const;
};

struct AblationOptions {
  int threads = 1;
  bool write_checkpoints = true;
  std::optional<std::filesystem::path> data_dir;  // pre-generated splits instead of in-memory generation
};

/// Trains and evaluates every (variant, rescaling, seed) cell, then writes
/// config.json, manifests/, checkpoints/, metrics/, run_record.json,
/// report.csv and report.txt under `run_dir`. Returns the run record JSON.
std::string run_ablation(const ExperimentConfig& cfg, const std::filesystem::path& run_dir, const AblationOptions& opts);

/// (baseline - variant) / baseline * 100; positive means lower error.
double delta_percent(double baseline, double variant);

struct Aggregate {
  lifter::InputMode variant;
  RescalingArm rescaling;
  std::string split;
  metrics::MetricReport mean;
  metrics::MetricReport stddev;
  int n_seeds = 0;
  std::optional<double> delta_vs_xy;         // percent, mean MPJPE
  std::optional<double> delta_vs_no_rescale; // percent, mean MPJPE
};

/// Mean/std across successful seeds, plus deltas.
std::vector<Aggregate> aggregate(const std::vector<CellResult>& cells, const ExperimentConfig& cfg);

std::string metric_report_json(const metrics::MetricReport& r);

// Report rendering over a stored run record.
struct RenderedReport {
  std::string text;
  std::string csv;
};

RenderedReport render_report(const std::string& run_record_json);
RenderedReport render_report_dir(const std::filesystem::path& run_dir);

/// Header line of report.csv.
inline constexpr const char* kCsvHeader = "variant,rescaling,split,stat,mpjpe,p_mpjpe,pck150,auc,n_seeds,delta_vs_xy_pct,delta_vs_no_rescale_pct";

struct AugmentSummary {
  int written = 0;
  int skipped = 0;
  std::vector<std::string> errors;  // one JSON object per skipped frame
};

/// Augments every detection in `input_dir/detections.jsonl` with its
/// `depth/NNNNNN.pfm` raster and writes one AugmentedPose line per frame.
AugmentSummary run_augment(const std::filesystem::path& input_dir, const AugLiftConfig& cfg,
                           const std::filesystem::path& out_path);

}  // namespace auglift::harness
