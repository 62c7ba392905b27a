#pragma once

#include "auglift/skeleton.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

// Synthetic scenes: a kinematic pose sampler, capsule proxy geometry
// rendered into a z-buffer, visibility from that buffer, and a noisy
// detector model whose confidence tracks occlusion.
namespace auglift::synth {

using Rng = std::mt19937_64;

/// Deterministic per-index stream seed derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct Capsule {
  Eigen::Vector3d a;
  Eigen::Vector3d b;  // a == b gives a sphere
  double radius = 0.0;
};

struct BodyModel {
  struct Bone {
    int parent = 0;
    int child = 0;
    double radius = 0.05;  // meters
  };
  std::vector<Bone> bones;
  int head_joint = -1;       // -1 disables the head sphere
  double head_radius = 0.1;  // meters

  /// Capsule radii for the default 17-joint topology.
  static BodyModel standard(const SkeletonTopology& topo = SkeletonTopology::h36m());

  void validate() const;
  std::vector<Capsule> capsules(std::span<const Eigen::Vector3d> joints) const;
  double max_radius_at(int joint) const;
};

/// Per-joint Euler angle bounds (radians, rotations about x, y, z).
struct AngleRange {
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{0.0, 0.0, 0.0};
};

struct PoseSampler {
  /// Rest-pose offsets (meters) of each joint relative to its parent.
  std::vector<Eigen::Vector3d> rest_offsets;
  std::vector<AngleRange> joint_ranges;  // indexed by joint; the root entry bounds global orientation

  static PoseSampler standard(const SkeletonTopology& topo = SkeletonTopology::h36m());
  double bone_length(int joint) const { return rest_offsets.at(static_cast<std::size_t>(joint)).norm(); }
};

struct NoiseModel {
  double sigma_visible = 1.5;   // pixels
  double sigma_occluded = 2.5;  // pixels; larger values push thin-limb keypoints off the silhouette
  // Confidence = low + (high - low) * logistic(steepness * (knee - excess)) + N(0, noise).
  double conf_high = 0.95;
  double conf_low = 0.3;
  double conf_knee = 0.2;        // meters of occluding depth
  double conf_steepness = 15.0;  // 1/meters
  double conf_noise = 0.05;

  void validate() const;
};

/// Affine miscalibration plus noise applied to rendered depth (identity by default).
struct DepthDistortion {
  double gain = 1.0;
  double offset = 0.0;  // meters
  double noise = 0.0;   // meters

  bool identity() const noexcept { return gain == 1.0 && offset == 0.0 && noise == 0.0; }
};

struct SceneConfig {
  std::array<double, 2> camera_distance_range{5.2, 6.1};  // meters
  CameraIntrinsics camera{};
  PoseSampler sampler = PoseSampler::standard();
  BodyModel body = BodyModel::standard();
  NoiseModel noise{};
  DepthDistortion distortion{};
  double placement_jitter = 0.1;    // root pixel offset as a fraction of the image size
  double visibility_margin = 0.15;  // meters
  int max_retries = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LabeledSample {
  std::vector<Eigen::Vector3d> gt_camera;  // meters, absolute camera space
  Pose3D gt_rel;                           // millimeters, root-relative
  DetectionFrame detection;
  DepthRaster depth;
  std::vector<bool> visibility;
};

/// Forward kinematics from per-joint Euler angles; angles[root] orients the body.
std::vector<Eigen::Vector3d> forward_kinematics(const SkeletonTopology& topo, const PoseSampler& sampler,
                                                std::span<const Eigen::Vector3d> angles,
                                                const Eigen::Vector3d& root_position);

/// Uniform joint angles within the sampler's ranges; root placed at the origin.
std::vector<Eigen::Vector3d> sample_pose3d(Rng& rng, const SkeletonTopology& topo, const PoseSampler& sampler);

/// Z-buffer of the body's capsules. Pixel (u, v) casts a ray through its
/// integer center; values are camera-space Z of the nearest hit.
DepthRaster render_depth(std::span<const Eigen::Vector3d> joints, const BodyModel& body, const CameraIntrinsics& cam);
DepthRaster render_capsules(std::span<const Capsule> capsules, const CameraIntrinsics& cam);

/// Camera-space Z of the first intersection, or +inf on a miss.
double ray_capsule_depth(const Eigen::Vector3d& dir, const Capsule& capsule);

/// How far (meters) the rendered surface lies in front of each joint,
/// sampled at the joint's rounded projection. +inf-free: out-of-frame joints get 0.
std::vector<double> occlusion_excess(std::span<const Eigen::Vector3d> joints, const DepthRaster& depth,
                                     const CameraIntrinsics& cam);

/// Joint visible iff it projects into the frame and depth >= Z - margin there.
std::vector<bool> compute_visibility(std::span<const Eigen::Vector3d> joints, const DepthRaster& depth,
                                     const CameraIntrinsics& cam, double margin);

DetectionFrame simulate_detection(std::span<const Eigen::Vector3d> joints, const std::vector<bool>& visibility,
                                  std::span<const double> excess, const CameraIntrinsics& cam,
                                  const NoiseModel& noise, Rng& rng);

void apply_distortion(DepthRaster& raster, const DepthDistortion& distortion, Rng& rng);

/// One labeled scene for stream index `index`; a pure function of (cfg, index).
LabeledSample generate_sample(const SceneConfig& cfg, std::uint64_t index);

std::vector<LabeledSample> generate_dataset(const SceneConfig& cfg, int n_samples);

/// Streams samples in index order without keeping the rasters alive.
void for_each_sample(const SceneConfig& cfg, int n_samples, const std::function<void(int, LabeledSample&&)>& fn);

}  // namespace auglift::synth
