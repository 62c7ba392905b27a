#pragma once

#include "auglift/skeleton.hpp"

#include <span>
#include <vector>

namespace auglift::metrics {

/// Mean per-joint Euclidean error (mm).
double mpjpe(const Pose3D& pred, const Pose3D& gt);

/// MPJPE after the best similarity alignment (rotation, uniform scale,
/// translation) of `pred` onto `gt`. Reflections are excluded.
double p_mpjpe(const Pose3D& pred, const Pose3D& gt);

/// `pred` after that alignment.
Pose3D procrustes_align(const Pose3D& pred, const Pose3D& gt);

/// Fraction of joints with error <= threshold_mm.
double pck(const Pose3D& pred, const Pose3D& gt, double threshold_mm = 150.0);

/// 5, 10, ..., 150 mm.
std::vector<double> default_auc_thresholds();

/// Mean PCK over the thresholds.
double auc(const Pose3D& pred, const Pose3D& gt, std::span<const double> thresholds);

struct MetricReport {
  double mpjpe = 0.0;
  double p_mpjpe = 0.0;
  double pck150 = 0.0;
  double auc = 0.0;
  int n_frames = 0;
};

/// Frame-averaged metrics over paired predictions and ground truth.
MetricReport evaluate(std::span<const Pose3D> preds, std::span<const Pose3D> gts);

}  // namespace auglift::metrics
