#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

// Oracle ordinal depth: pelvis-relative depth of ground-truth joints,
// coarse binning and a three-way front/at/behind labeling.
namespace auglift::ordinal {

enum class DepthLabel { Front = -1, At = 0, Behind = 1 };

struct ODConfig {
  double granularity = 0.10;  // meters
  double tau = 0.10;          // meters

  void validate() const;
};

/// z_j - z_root, meters; farther than the root is positive.
std::vector<double> relative_depths(std::span<const Eigen::Vector3d> camera_joints, int root_index);

/// floor(z / g); quotients within 1e-9 (relative) of an integer count as that integer.
std::vector<int> coarse_bins(std::span<const double> z_rel, double granularity);

int occupied_bin_count(std::span<const int> bins);

/// Front if z < -tau, Behind if z > tau, At otherwise (|z| <= tau inclusive).
std::vector<DepthLabel> three_way_labels(std::span<const double> z_rel, double tau);

/// -1 / 0 / +1 per label.
std::vector<double> od_input_channel(std::span<const DepthLabel> labels);
/// bin * g (meters) per bin.
std::vector<double> od_input_channel(std::span<const int> bins, double granularity);

}  // namespace auglift::ordinal
