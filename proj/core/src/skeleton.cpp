#include "auglift/skeleton.hpp"

#include <cmath>
#include <queue>

namespace auglift {

SkeletonTopology::SkeletonTopology(std::vector<std::string> joint_names, std::vector<int> parent_index)
    : names_(std::move(joint_names)), parents_(std::move(parent_index)) {
  const int k = static_cast<int>(parents_.size());
  if (k == 0) throw Error("invalid_topology", "skeleton needs at least one joint");
  if (static_cast<int>(names_.size()) != k)
    throw Error("invalid_topology", "joint_names and parent_index lengths differ");

  int roots = 0;
  std::vector<std::vector<int>> children(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const int p = parents_[static_cast<std::size_t>(j)];
    if (p == -1) {
      ++roots;
      root_ = j;
    } else if (p < 0 || p >= k || p == j) {
      throw Error("invalid_topology", "parent index out of range for joint " + std::to_string(j));
    } else {
      children[static_cast<std::size_t>(p)].push_back(j);
    }
  }
  if (roots != 1) throw Error("invalid_topology", "skeleton must have exactly one root");

  // BFS from the root; a cycle leaves joints unreached.
  std::queue<int> frontier;
  frontier.push(root_);
  while (!frontier.empty()) {
    const int j = frontier.front();
    frontier.pop();
    order_.push_back(j);
    for (int c : children[static_cast<std::size_t>(j)]) frontier.push(c);
  }
  if (static_cast<int>(order_.size()) != k) throw Error("invalid_topology", "parent graph is not a tree");
}

const SkeletonTopology& SkeletonTopology::h36m() {
  static const SkeletonTopology topo(
      {"pelvis", "r_hip", "r_knee", "r_ankle", "l_hip", "l_knee", "l_ankle", "spine", "thorax", "neck",
       "head", "l_shoulder", "l_elbow", "l_wrist", "r_shoulder", "r_elbow", "r_wrist"},
      {-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 8, 11, 12, 8, 14, 15});
  return topo;
}

void validate(const DetectionFrame& frame) {
  if (frame.pose.size() != frame.conf.size())
    throw Error("invalid_detection", "frame " + std::to_string(frame.frame_id) +
                                         ": keypoint and confidence counts differ");
  for (const auto& p : frame.pose.coords) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
      throw Error("invalid_detection", "frame " + std::to_string(frame.frame_id) + ": non-finite keypoint");
  }
  for (double c : frame.conf.values) {
    if (!(c >= 0.0 && c <= 1.0))
      throw Error("invalid_detection",
                  "frame " + std::to_string(frame.frame_id) + ": confidence outside [0, 1]");
  }
}

DepthRaster::DepthRaster(int width, int height)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw Error("invalid_raster", "raster dimensions must be positive");
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), kInvalidDepth);
}

DepthRaster::DepthRaster(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width <= 0 || height <= 0) throw Error("invalid_raster", "raster dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error("invalid_raster", "raster data length does not match width*height");
  for (float d : data_) {
    if (!std::isfinite(d) || d <= 0.0f) throw Error("invalid_raster", "raster holds a non-finite or non-positive depth");
  }
}

void CameraIntrinsics::validate() const {
  if (!(focal > 0.0)) throw Error("invalid_camera", "focal length must be positive");
  if (width <= 0 || height <= 0) throw Error("invalid_camera", "resolution must be positive");
  if (!(cx >= 0.0 && cx <= width && cy >= 0.0 && cy <= height))
    throw Error("invalid_camera", "principal point outside the image");
}

Eigen::Vector2d project_point(const Eigen::Vector3d& p, const CameraIntrinsics& cam) {
  if (!(p.z() > 0.0)) throw Error("behind_camera", "cannot project a point with Z <= 0");
  return {cam.cx + cam.focal * p.x() / p.z(), cam.cy + cam.focal * p.y() / p.z()};
}

Pose3D root_center(std::span<const Eigen::Vector3d> joints, int root_index) {
  if (root_index < 0 || root_index >= static_cast<int>(joints.size()))
    throw Error("invalid_pose", "root index out of range");
  const Eigen::Vector3d root = joints[static_cast<std::size_t>(root_index)];
  Pose3D out;
  out.joints.reserve(joints.size());
  for (const auto& j : joints) out.joints.push_back(j - root);
  return out;
}

}  // namespace auglift
