#include "auglift/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace auglift {

void AugLiftConfig::validate() const {
  if (radius < 0) throw Error("invalid_config", "auglift.radius must be >= 0");
  if (!(d_max > 0.0)) throw Error("invalid_config", "auglift.d_max must be > 0");
  if (!(d_max > clip_lower)) throw Error("invalid_config", "auglift.d_max must exceed auglift.clip_lower");
  if (rescaling_enabled && !(mean_box_size > 0.0))
    throw Error("invalid_config", "auglift.mean_box_size must be > 0 when rescaling is enabled");
}

double sample_keypoint_depth(const DepthRaster& raster, const Eigen::Vector2d& keypoint, int radius) {
  if (raster.empty()) throw Error("invalid_raster", "cannot sample an empty raster");
  if (radius < 0) throw Error("invalid_argument", "sampling radius must be >= 0");

  const int w = raster.width();
  const int h = raster.height();
  // Non-finite keypoints are rejected at ingestion; clamp through double to
  // keep far-out coordinates from overflowing int.
  const int cu = static_cast<int>(std::clamp(std::round(keypoint.x()), 0.0, static_cast<double>(w - 1)));
  const int cv = static_cast<int>(std::clamp(std::round(keypoint.y()), 0.0, static_cast<double>(h - 1)));

  const int r2 = radius * radius;
  float best = std::numeric_limits<float>::max();
  const int v0 = std::max(0, cv - radius);
  const int v1 = std::min(h - 1, cv + radius);
  for (int v = v0; v <= v1; ++v) {
    const int dv = v - cv;
    const int span = static_cast<int>(std::sqrt(static_cast<double>(r2 - dv * dv)));
    const int u0 = std::max(0, cu - span);
    const int u1 = std::min(w - 1, cu + span);
    for (int u = u0; u <= u1; ++u) best = std::min(best, raster.at(u, v));
  }
  return static_cast<double>(best);
}

BoxStats compute_bbox_stats(const Pose2D& pose) {
  if (pose.size() < 1) throw Error("invalid_pose", "bounding box needs at least one keypoint");
  Eigen::Vector2d lo = pose.coords.front();
  Eigen::Vector2d hi = lo;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (const auto& p : pose.coords) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
    sum += p;
  }
  BoxStats s;
  s.centroid = sum / static_cast<double>(pose.size());
  s.box_size = 0.5 * ((hi.x() - lo.x()) + (hi.y() - lo.y()));
  return s;
}

RescaleResult rescale_pose(const Pose2D& pose, double target_box_size) {
  if (!(target_box_size > 0.0)) throw Error("invalid_argument", "target box size must be > 0");
  const BoxStats stats = compute_bbox_stats(pose);
  RescaleResult out;
  if (stats.degenerate()) {
    out.pose = pose;
    out.degenerate = true;
    return out;
  }
  out.scale = target_box_size / stats.box_size;
  out.pose.coords.reserve(pose.coords.size());
  for (const auto& p : pose.coords) out.pose.coords.push_back(out.scale * (p - stats.centroid) + stats.centroid);
  return out;
}

double compute_mean_box_size(std::span<const Pose2D> frames) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : frames) {
    const BoxStats s = compute_bbox_stats(f);
    if (s.degenerate()) continue;
    sum += s.box_size;
    ++n;
  }
  if (n == 0) throw Error("no_valid_frames", "mean box size needs at least one non-degenerate frame");
  return sum / static_cast<double>(n);
}

std::vector<double> normalize_confidence(const ConfidenceVec& conf) {
  std::vector<double> out;
  out.reserve(conf.values.size());
  for (double c : conf.values) {
    if (!(c >= 0.0 && c <= 1.0)) throw Error("invalid_detection", "confidence outside [0, 1]");
    out.push_back(2.0 * c - 1.0);
  }
  return out;
}

std::vector<double> normalize_depths(std::span<const double> depths, int root_index, double d_max,
                                     double clip_lower) {
  if (!(d_max > clip_lower)) throw Error("invalid_argument", "d_max must exceed clip_lower");
  if (root_index < 0 || root_index >= static_cast<int>(depths.size()))
    throw Error("invalid_argument", "root index out of range");
  const double root = depths[static_cast<std::size_t>(root_index)];
  std::vector<double> out;
  out.reserve(depths.size());
  for (double d : depths) out.push_back(std::clamp(d - root, clip_lower, d_max));
  return out;
}

std::vector<double> sample_depths(const DetectionFrame& frame, const DepthRaster& raster, int radius) {
  std::vector<double> depths;
  depths.reserve(frame.pose.coords.size());
  for (const auto& kp : frame.pose.coords) depths.push_back(sample_keypoint_depth(raster, kp, radius));
  return depths;
}

AugmentedPose augment_with_depths(const DetectionFrame& frame, std::span<const double> sampled_depths,
                                  const AugLiftConfig& cfg) {
  cfg.validate();
  validate(frame);
  const auto k = static_cast<std::size_t>(frame.joint_count());
  if (sampled_depths.size() != k) throw Error("invalid_argument", "need one sampled depth per keypoint");

  AugmentedPose out;
  out.frame_id = frame.frame_id;
  const Pose2D* xy = &frame.pose;
  RescaleResult rescaled;
  if (cfg.rescaling_enabled) {
    rescaled = rescale_pose(frame.pose, cfg.mean_box_size);
    out.degenerate_bbox = rescaled.degenerate;
    xy = &rescaled.pose;
  } else {
    out.degenerate_bbox = compute_bbox_stats(frame.pose).degenerate();
  }

  const auto conf = normalize_confidence(frame.conf);
  const auto rel = normalize_depths(sampled_depths, cfg.root_index, cfg.d_max, cfg.clip_lower);
  out.features.resize(k);
  for (std::size_t j = 0; j < k; ++j) out.features[j] = {xy->coords[j].x(), xy->coords[j].y(), conf[j], rel[j]};
  return out;
}

AugmentedPose augment_frame(const DetectionFrame& frame, const DepthRaster& raster, const AugLiftConfig& cfg) {
  cfg.validate();
  validate(frame);
  return augment_with_depths(frame, sample_depths(frame, raster, cfg.radius), cfg);
}

}  // namespace auglift
