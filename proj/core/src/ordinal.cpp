#include "auglift/ordinal.hpp"

#include "auglift/skeleton.hpp"

#include <algorithm>
#include <cmath>

namespace auglift::ordinal {

void ODConfig::validate() const {
  if (!(granularity > 0.0)) throw Error("invalid_config", "od.granularity must be > 0");
  if (!(tau > 0.0)) throw Error("invalid_config", "od.tau must be > 0");
}

std::vector<double> relative_depths(std::span<const Eigen::Vector3d> camera_joints, int root_index) {
  if (root_index < 0 || root_index >= static_cast<int>(camera_joints.size()))
    throw Error("invalid_argument", "root index out of range");
  const double root = camera_joints[static_cast<std::size_t>(root_index)].z();
  std::vector<double> out;
  out.reserve(camera_joints.size());
  for (const auto& j : camera_joints) out.push_back(j.z() - root);
  return out;
}

std::vector<int> coarse_bins(std::span<const double> z_rel, double granularity) {
  if (!(granularity > 0.0)) throw Error("invalid_argument", "bin granularity must be > 0");
  std::vector<int> out;
  out.reserve(z_rel.size());
  for (double z : z_rel) {
    // z and g are usually decimal meters; 0.3 / 0.1 lands just below 3 in
    // binary, so quotients within rounding noise of an integer snap to it.
    const double q = z / granularity;
    const double nearest = std::round(q);
    const bool on_edge = std::abs(q - nearest) <= 1e-9 * std::max(1.0, std::abs(q));
    out.push_back(static_cast<int>(on_edge ? nearest : std::floor(q)));
  }
  return out;
}

int occupied_bin_count(std::span<const int> bins) {
  std::vector<int> sorted(bins.begin(), bins.end());
  std::sort(sorted.begin(), sorted.end());
  return static_cast<int>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

std::vector<DepthLabel> three_way_labels(std::span<const double> z_rel, double tau) {
  if (!(tau > 0.0)) throw Error("invalid_argument", "tau must be > 0");
  std::vector<DepthLabel> out;
  out.reserve(z_rel.size());
  for (double z : z_rel) {
    if (z < -tau)
      out.push_back(DepthLabel::Front);
    else if (z > tau)
      out.push_back(DepthLabel::Behind);
    else
      out.push_back(DepthLabel::At);
  }
  return out;
}

std::vector<double> od_input_channel(std::span<const DepthLabel> labels) {
  std::vector<double> out;
  out.reserve(labels.size());
  for (auto l : labels) out.push_back(static_cast<double>(static_cast<int>(l)));
  return out;
}

std::vector<double> od_input_channel(std::span<const int> bins, double granularity) {
  std::vector<double> out;
  out.reserve(bins.size());
  for (int b : bins) out.push_back(static_cast<double>(b) * granularity);
  return out;
}

}  // namespace auglift::ordinal
