#pragma once

#include "auglift/skeleton.hpp"

#include <span>
#include <vector>

// Turns a 2D detection plus a depth map into per-joint 4-channel features:
// neighborhood-min depth sampling, per-instance box rescaling and channel
// normalization.
namespace auglift {

struct AugLiftConfig {
  int radius = 3;                  // pixels
  double d_max = 2.0;              // meters
  double mean_box_size = 0.0;      // pixels; training-set mean, required when rescaling
  bool rescaling_enabled = true;
  double clip_lower = 0.0;         // meters; may be negative to keep front-of-root ordering
  int root_index = 0;

  void validate() const;
};

/// Minimum of the raster over integer pixels within Euclidean distance
/// `radius` of the keypoint. The keypoint is rounded to the nearest pixel
/// and clamped into the raster; the disk is clipped to the raster bounds.
double sample_keypoint_depth(const DepthRaster& raster, const Eigen::Vector2d& keypoint, int radius);

struct BoxStats {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  double box_size = 0.0;  // mean of width and height

  bool degenerate() const noexcept { return !(box_size > 0.0); }
};

BoxStats compute_bbox_stats(const Pose2D& pose);

struct RescaleResult {
  Pose2D pose;
  double scale = 1.0;
  bool degenerate = false;  // box size was zero; pose returned unchanged
};

/// Scales keypoints about their centroid so the box size becomes `target_box_size`.
RescaleResult rescale_pose(const Pose2D& pose, double target_box_size);

/// Mean box size over frames with a non-zero box. Throws when none qualify.
double compute_mean_box_size(std::span<const Pose2D> frames);

/// c -> 2c - 1.
std::vector<double> normalize_confidence(const ConfidenceVec& conf);

/// Root-relative depths clipped to [clip_lower, d_max].
std::vector<double> normalize_depths(std::span<const double> depths, int root_index, double d_max,
                                     double clip_lower = 0.0);

/// Steps after depth sampling: rescale (x, y) and normalize the channels,
/// given one already-sampled depth per joint.
AugmentedPose augment_with_depths(const DetectionFrame& frame, std::span<const double> sampled_depths,
                                  const AugLiftConfig& cfg);

/// Samples one depth per keypoint at its original location.
std::vector<double> sample_depths(const DetectionFrame& frame, const DepthRaster& raster, int radius);

/// Full feature construction. Depth is sampled at the original keypoints,
/// before the (x, y) rescale.
AugmentedPose augment_frame(const DetectionFrame& frame, const DepthRaster& raster, const AugLiftConfig& cfg);

}  // namespace auglift
