#pragma once

#include <Eigen/Core>

#include <cfloat>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace auglift {

/// Library error. `code` is a short machine-readable tag used by the CLI
/// when it reports failures as JSON on stderr.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline constexpr int kDefaultJointCount = 17;

/// Kinematic tree over K joints. The default ordering is the 17-joint
/// Human3.6M-style layout with the pelvis at index 0:
///
///   0 pelvis   1 r_hip   2 r_knee   3 r_ankle   4 l_hip   5 l_knee
///   6 l_ankle  7 spine   8 thorax   9 neck     10 head   11 l_shoulder
///  12 l_elbow 13 l_wrist 14 r_shoulder 15 r_elbow 16 r_wrist
class SkeletonTopology {
 public:
  SkeletonTopology(std::vector<std::string> joint_names, std::vector<int> parent_index);

  static const SkeletonTopology& h36m();

  int joint_count() const noexcept { return static_cast<int>(parents_.size()); }
  int root_index() const noexcept { return root_; }
  const std::vector<std::string>& joint_names() const noexcept { return names_; }
  const std::vector<int>& parent_index() const noexcept { return parents_; }
  int parent(int joint) const { return parents_.at(static_cast<std::size_t>(joint)); }

  /// Joints ordered so every parent precedes its children.
  const std::vector<int>& topological_order() const noexcept { return order_; }

 private:
  std::vector<std::string> names_;
  std::vector<int> parents_;
  std::vector<int> order_;
  int root_ = 0;
};

struct Pose2D {
  std::vector<Eigen::Vector2d> coords;  // pixels, x = column, y = row

  int size() const noexcept { return static_cast<int>(coords.size()); }
};

struct ConfidenceVec {
  std::vector<double> values;  // each in [0, 1]

  int size() const noexcept { return static_cast<int>(values.size()); }
};

struct DetectionFrame {
  Pose2D pose;
  ConfidenceVec conf;
  std::int64_t frame_id = 0;
  std::int64_t subject_id = 0;

  int joint_count() const noexcept { return pose.size(); }
};

/// Throws if pose/confidence sizes disagree, coordinates are non-finite or a
/// confidence is outside [0, 1].
void validate(const DetectionFrame& frame);

/// Dense metric depth map, row-major with row 0 at the top of the image.
/// Pixels with no surface hold kInvalidDepth.
class DepthRaster {
 public:
  static constexpr float kInvalidDepth = FLT_MAX;

  DepthRaster() = default;
  /// Filled with kInvalidDepth.
  DepthRaster(int width, int height);
  /// Validates: size matches, no NaN/inf, every value > 0.
  DepthRaster(int width, int height, std::vector<float> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  float at(int u, int v) const { return data_[index(u, v)]; }
  float& at(int u, int v) { return data_[index(u, v)]; }

  std::span<const float> data() const noexcept { return data_; }

  friend bool operator==(const DepthRaster&, const DepthRaster&) = default;

 private:
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

struct Pose3D {
  std::vector<Eigen::Vector3d> joints;  // millimeters, root-relative

  int size() const noexcept { return static_cast<int>(joints.size()); }
};

struct CameraIntrinsics {
  double focal = 300.0;  // pixels
  double cx = 128.0;
  double cy = 128.0;
  int width = 256;
  int height = 256;

  void validate() const;
};

/// Per-joint (x, y, normalized confidence, normalized relative depth).
struct AugmentedPose {
  struct Feature {
    double x = 0.0;
    double y = 0.0;
    double conf = 0.0;   // in [-1, 1]
    double depth = 0.0;  // meters, in [clip_lower, d_max]
  };

  std::int64_t frame_id = 0;
  std::vector<Feature> features;
  bool degenerate_bbox = false;
  /// Optional ordinal-depth channel, one value per joint.
  std::optional<std::vector<double>> od;

  int size() const noexcept { return static_cast<int>(features.size()); }
};

/// Pinhole projection; (u, v) = (cx + f X/Z, cy + f Y/Z). Throws for Z <= 0.
Eigen::Vector2d project_point(const Eigen::Vector3d& p, const CameraIntrinsics& cam);

/// Subtracts the root joint from every joint.
Pose3D root_center(std::span<const Eigen::Vector3d> joints, int root_index);

}  // namespace auglift
