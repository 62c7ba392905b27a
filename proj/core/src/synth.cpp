#include "auglift/synth.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace auglift::synth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Matrix3d euler_rotation(const Eigen::Vector3d& angles) {
  return (Eigen::AngleAxisd(angles.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(angles.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(angles.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

// First entry of a ray from the origin (unit `dir`) into a sphere; +inf on miss.
double ray_sphere_t(const Eigen::Vector3d& dir, const Eigen::Vector3d& center, double radius) {
  const double b = dir.dot(center);
  const double c = center.squaredNorm() - radius * radius;
  const double h = b * b - c;
  if (h < 0.0) return kInf;
  const double t = b - std::sqrt(h);
  return t > 0.0 ? t : kInf;
}

AngleRange sym(double x, double y, double z) { return {{-x, -y, -z}, {x, y, z}}; }
AngleRange range(std::array<double, 3> lo, std::array<double, 3> hi) { return {lo, hi}; }

int rounded_pixel(double v) { return static_cast<int>(std::lround(v)); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over a combined key
  std::uint64_t z = master ^ (index + 0x9E3779B97F4A7C15ULL + (master << 6) + (master >> 2));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

BodyModel BodyModel::standard(const SkeletonTopology& topo) {
  if (topo.joint_count() != kDefaultJointCount)
    throw Error("invalid_topology", "standard body model needs the 17-joint topology");
  // Radius of the bone ending at each joint.
  static constexpr std::array<double, 17> kRadius = {0.0,  0.10, 0.075, 0.055, 0.10, 0.075, 0.055, 0.13, 0.13,
                                                     0.05, 0.06, 0.06,  0.045, 0.04, 0.06,  0.045, 0.04};
  BodyModel body;
  for (int j = 0; j < topo.joint_count(); ++j) {
    if (topo.parent(j) < 0) continue;
    body.bones.push_back({topo.parent(j), j, kRadius[static_cast<std::size_t>(j)]});
  }
  body.head_joint = 10;
  body.head_radius = 0.1;
  return body;
}

void BodyModel::validate() const {
  for (const auto& b : bones) {
    if (!(b.radius > 0.0)) throw Error("invalid_config", "bone radius must be > 0");
  }
  if (head_joint >= 0 && !(head_radius > 0.0)) throw Error("invalid_config", "head radius must be > 0");
}

std::vector<Capsule> BodyModel::capsules(std::span<const Eigen::Vector3d> joints) const {
  std::vector<Capsule> out;
  out.reserve(bones.size() + 1);
  for (const auto& b : bones) {
    out.push_back({joints[static_cast<std::size_t>(b.parent)], joints[static_cast<std::size_t>(b.child)], b.radius});
  }
  if (head_joint >= 0) {
    const auto& h = joints[static_cast<std::size_t>(head_joint)];
    out.push_back({h, h, head_radius});
  }
  return out;
}

double BodyModel::max_radius_at(int joint) const {
  double r = 0.0;
  for (const auto& b : bones) {
    if (b.parent == joint || b.child == joint) r = std::max(r, b.radius);
  }
  if (joint == head_joint) r = std::max(r, head_radius);
  return r;
}

PoseSampler PoseSampler::standard(const SkeletonTopology& topo) {
  if (topo.joint_count() != kDefaultJointCount)
    throw Error("invalid_topology", "standard pose sampler needs the 17-joint topology");
  PoseSampler s;
  // Camera-aligned body frame: x to the subject's left, y down, z away from
  // the camera. Arms hang at rest.
  s.rest_offsets = {
      {0.0, 0.0, 0.0},     {-0.13, 0.0, 0.0}, {0.0, 0.45, 0.0}, {0.0, 0.44, 0.0}, {0.13, 0.0, 0.0},
      {0.0, 0.45, 0.0},    {0.0, 0.44, 0.0},  {0.0, -0.23, 0.0}, {0.0, -0.25, 0.0}, {0.0, -0.10, 0.0},
      {0.0, -0.12, 0.0},   {0.16, 0.0, 0.0},  {0.0, 0.28, 0.0},  {0.0, 0.25, 0.0},  {-0.16, 0.0, 0.0},
      {0.0, 0.28, 0.0},    {0.0, 0.25, 0.0},
  };
  constexpr double pi = std::numbers::pi;
  s.joint_ranges = {
      range({-0.1, -pi, -0.1}, {0.1, pi, 0.1}),      // global orientation
      sym(0.1, 0.1, 0.1),                            // r_hip
      range({-1.6, -0.3, -0.1}, {0.6, 0.3, 0.5}),    // r thigh
      range({0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}),       // r shin
      sym(0.1, 0.1, 0.1),                            // l_hip
      range({-1.6, -0.3, -0.5}, {0.6, 0.3, 0.1}),    // l thigh
      range({0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}),       // l shin
      range({-0.5, -0.4, -0.2}, {0.3, 0.4, 0.2}),    // spine
      sym(0.2, 0.3, 0.15),                           // thorax
      sym(0.3, 0.2, 0.2),                            // neck
      sym(0.3, 0.3, 0.2),                            // head
      sym(0.1, 0.1, 0.15),                           // l shoulder
      range({-2.2, -0.5, -1.4}, {1.0, 0.5, 0.2}),    // l upper arm
      range({-2.2, 0.0, -0.2}, {0.0, 0.0, 0.2}),     // l forearm
      sym(0.1, 0.1, 0.15),                           // r shoulder
      range({-2.2, -0.5, -0.2}, {1.0, 0.5, 1.4}),    // r upper arm
      range({-2.2, 0.0, -0.2}, {0.0, 0.0, 0.2}),     // r forearm
  };
  return s;
}

void NoiseModel::validate() const {
  if (!(sigma_visible >= 0.0) || !(sigma_occluded >= sigma_visible))
    throw Error("invalid_config", "noise requires sigma_occluded >= sigma_visible >= 0");
  if (!(conf_low >= 0.0 && conf_high <= 1.0 && conf_low <= conf_high))
    throw Error("invalid_config", "noise requires 0 <= conf_low <= conf_high <= 1");
  if (!(conf_noise >= 0.0) || !(conf_steepness >= 0.0)) throw Error("invalid_config", "noise scales must be >= 0");
}

void SceneConfig::validate() const {
  const auto [lo, hi] = camera_distance_range;
  if (!(lo > 0.0 && lo < hi)) throw Error("invalid_config", "camera_distance_range must satisfy 0 < min < max");
  camera.validate();
  body.validate();
  noise.validate();
  if (sampler.rest_offsets.size() != sampler.joint_ranges.size())
    throw Error("invalid_config", "pose sampler offsets and ranges differ in length");
  for (const auto& r : sampler.joint_ranges) {
    for (int a = 0; a < 3; ++a) {
      const auto i = static_cast<std::size_t>(a);
      if (!(r.lo[i] <= r.hi[i]) || std::abs(r.lo[i]) > 2.0 * std::numbers::pi || std::abs(r.hi[i]) > 2.0 * std::numbers::pi)
        throw Error("invalid_config", "joint angle range must satisfy lo <= hi within [-2pi, 2pi]");
    }
  }
  if (!(placement_jitter >= 0.0 && placement_jitter < 0.5))
    throw Error("invalid_config", "placement_jitter must lie in [0, 0.5)");
  if (!(visibility_margin >= 0.0)) throw Error("invalid_config", "visibility_margin must be >= 0");
  if (max_retries < 1) throw Error("invalid_config", "max_retries must be >= 1");
  if (!(distortion.gain > 0.0) || !(distortion.noise >= 0.0))
    throw Error("invalid_config", "depth distortion needs gain > 0 and noise >= 0");
}

std::vector<Eigen::Vector3d> forward_kinematics(const SkeletonTopology& topo, const PoseSampler& sampler,
                                                std::span<const Eigen::Vector3d> angles,
                                                const Eigen::Vector3d& root_position) {
  const auto k = static_cast<std::size_t>(topo.joint_count());
  if (angles.size() != k || sampler.rest_offsets.size() != k)
    throw Error("invalid_argument", "forward kinematics needs one angle triple and offset per joint");
  std::vector<Eigen::Matrix3d> orient(k);
  std::vector<Eigen::Vector3d> pos(k);
  for (int j : topo.topological_order()) {
    const auto i = static_cast<std::size_t>(j);
    const Eigen::Matrix3d local = euler_rotation(angles[i]);
    const int p = topo.parent(j);
    if (p < 0) {
      orient[i] = local;
      pos[i] = root_position;
    } else {
      const auto pi = static_cast<std::size_t>(p);
      orient[i] = orient[pi] * local;
      pos[i] = pos[pi] + orient[i] * sampler.rest_offsets[i];
    }
  }
  return pos;
}

std::vector<Eigen::Vector3d> sample_pose3d(Rng& rng, const SkeletonTopology& topo, const PoseSampler& sampler) {
  std::vector<Eigen::Vector3d> angles(static_cast<std::size_t>(topo.joint_count()));
  for (std::size_t j = 0; j < angles.size(); ++j) {
    const auto& r = sampler.joint_ranges.at(j);
    for (std::size_t a = 0; a < 3; ++a) {
      std::uniform_real_distribution<double> dist(r.lo[a], r.hi[a]);
      angles[j][static_cast<Eigen::Index>(a)] = r.lo[a] == r.hi[a] ? r.lo[a] : dist(rng);
    }
  }
  return forward_kinematics(topo, sampler, angles, Eigen::Vector3d::Zero());
}

double ray_capsule_depth(const Eigen::Vector3d& dir, const Capsule& cap) {
  const Eigen::Vector3d rd = dir.normalized();
  double t = std::min(ray_sphere_t(rd, cap.a, cap.radius), ray_sphere_t(rd, cap.b, cap.radius));

  const Eigen::Vector3d ba = cap.b - cap.a;
  const double baba = ba.squaredNorm();
  if (baba > 0.0) {
    // Infinite cylinder around the segment, origin at the camera.
    const Eigen::Vector3d oa = -cap.a;
    const double bard = ba.dot(rd);
    const double baoa = ba.dot(oa);
    const double rdoa = rd.dot(oa);
    const double oaoa = oa.squaredNorm();
    const double qa = baba - bard * bard;
    const double qb = baba * rdoa - baoa * bard;
    const double qc = baba * oaoa - baoa * baoa - cap.radius * cap.radius * baba;
    const double h = qb * qb - qa * qc;
    if (qa > 1e-12 * baba && h >= 0.0) {
      const double tc = (-qb - std::sqrt(h)) / qa;
      const double y = baoa + tc * bard;
      if (tc > 0.0 && y > 0.0 && y < baba) t = std::min(t, tc);
    }
  }
  return std::isfinite(t) ? t * rd.z() : kInf;
}

DepthRaster render_capsules(std::span<const Capsule> capsules, const CameraIntrinsics& cam) {
  cam.validate();
  DepthRaster raster(cam.width, cam.height);
  for (const auto& cap : capsules) {
    // Screen bounds from the projected corners of the capsule's 3D box.
    const Eigen::Vector3d lo = cap.a.cwiseMin(cap.b).array() - cap.radius;
    const Eigen::Vector3d hi = cap.a.cwiseMax(cap.b).array() + cap.radius;
    int u0 = 0, u1 = cam.width - 1, v0 = 0, v1 = cam.height - 1;
    if (lo.z() > 1e-6) {
      double umin = kInf, umax = -kInf, vmin = kInf, vmax = -kInf;
      for (int c = 0; c < 8; ++c) {
        const Eigen::Vector3d corner((c & 1) ? hi.x() : lo.x(), (c & 2) ? hi.y() : lo.y(), (c & 4) ? hi.z() : lo.z());
        const Eigen::Vector2d p = project_point(corner, cam);
        umin = std::min(umin, p.x());
        umax = std::max(umax, p.x());
        vmin = std::min(vmin, p.y());
        vmax = std::max(vmax, p.y());
      }
      if (umax < 0.0 || vmax < 0.0 || umin > cam.width - 1 || vmin > cam.height - 1) continue;
      u0 = std::max(0, static_cast<int>(std::floor(umin)));
      u1 = std::min(cam.width - 1, static_cast<int>(std::ceil(umax)));
      v0 = std::max(0, static_cast<int>(std::floor(vmin)));
      v1 = std::min(cam.height - 1, static_cast<int>(std::ceil(vmax)));
    }
    for (int v = v0; v <= v1; ++v) {
      for (int u = u0; u <= u1; ++u) {
        const Eigen::Vector3d dir((u - cam.cx) / cam.focal, (v - cam.cy) / cam.focal, 1.0);
        const double z = ray_capsule_depth(dir, cap);
        if (z < static_cast<double>(raster.at(u, v))) raster.at(u, v) = static_cast<float>(z);
      }
    }
  }
  return raster;
}

DepthRaster render_depth(std::span<const Eigen::Vector3d> joints, const BodyModel& body, const CameraIntrinsics& cam) {
  if (!joints.empty() && std::none_of(joints.begin(), joints.end(), [](const auto& p) { return p.z() > 0.0; }))
    throw Error("outside_frustum", "every joint lies behind the camera");
  const auto caps = body.capsules(joints);
  return render_capsules(caps, cam);
}

std::vector<double> occlusion_excess(std::span<const Eigen::Vector3d> joints, const DepthRaster& depth,
                                     const CameraIntrinsics& cam) {
  std::vector<double> out(joints.size(), 0.0);
  for (std::size_t j = 0; j < joints.size(); ++j) {
    if (!(joints[j].z() > 0.0)) continue;
    const Eigen::Vector2d p = project_point(joints[j], cam);
    const int u = rounded_pixel(p.x());
    const int v = rounded_pixel(p.y());
    if (u < 0 || v < 0 || u >= depth.width() || v >= depth.height()) continue;
    out[j] = std::max(0.0, joints[j].z() - static_cast<double>(depth.at(u, v)));
  }
  return out;
}

std::vector<bool> compute_visibility(std::span<const Eigen::Vector3d> joints, const DepthRaster& depth,
                                     const CameraIntrinsics& cam, double margin) {
  std::vector<bool> vis(joints.size(), false);
  for (std::size_t j = 0; j < joints.size(); ++j) {
    if (!(joints[j].z() > 0.0)) continue;
    const Eigen::Vector2d p = project_point(joints[j], cam);
    const int u = rounded_pixel(p.x());
    const int v = rounded_pixel(p.y());
    if (u < 0 || v < 0 || u >= depth.width() || v >= depth.height()) continue;
    vis[j] = static_cast<double>(depth.at(u, v)) >= joints[j].z() - margin;
  }
  return vis;
}

DetectionFrame simulate_detection(std::span<const Eigen::Vector3d> joints, const std::vector<bool>& visibility,
                                  std::span<const double> excess, const CameraIntrinsics& cam,
                                  const NoiseModel& noise, Rng& rng) {
  if (visibility.size() != joints.size() || excess.size() != joints.size())
    throw Error("invalid_argument", "visibility/excess must have one entry per joint");
  std::normal_distribution<double> unit(0.0, 1.0);
  DetectionFrame f;
  for (std::size_t j = 0; j < joints.size(); ++j) {
    const double sigma = visibility[j] ? noise.sigma_visible : noise.sigma_occluded;
    const Eigen::Vector2d p = project_point(joints[j], cam);
    const double dx = unit(rng);
    const double dy = unit(rng);
    f.pose.coords.emplace_back(p.x() + sigma * dx, p.y() + sigma * dy);

    // Occluded joints always count as occluded by at least the knee.
    const double e = visibility[j] ? excess[j] : std::max(excess[j], noise.conf_knee);
    const double logistic = 1.0 / (1.0 + std::exp(-noise.conf_steepness * (noise.conf_knee - e)));
    const double mean = noise.conf_low + (noise.conf_high - noise.conf_low) * logistic;
    const double jitter = unit(rng);
    f.conf.values.push_back(std::clamp(mean + noise.conf_noise * jitter, 0.0, 1.0));
  }
  return f;
}

void apply_distortion(DepthRaster& raster, const DepthDistortion& d, Rng& rng) {
  if (d.identity()) return;
  std::normal_distribution<double> unit(0.0, 1.0);
  for (int v = 0; v < raster.height(); ++v) {
    for (int u = 0; u < raster.width(); ++u) {
      float& px = raster.at(u, v);
      if (px == DepthRaster::kInvalidDepth) continue;
      const double z = d.gain * px + d.offset + d.noise * unit(rng);
      px = static_cast<float>(std::max(1e-3, z));
    }
  }
}

LabeledSample generate_sample(const SceneConfig& cfg, std::uint64_t index) {
  const auto& topo = SkeletonTopology::h36m();
  Rng rng(derive_seed(cfg.seed, index));
  const auto& cam = cfg.camera;
  std::uniform_real_distribution<double> depth_dist(cfg.camera_distance_range[0], cfg.camera_distance_range[1]);
  std::uniform_real_distribution<double> jitter(-cfg.placement_jitter, cfg.placement_jitter);

  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    auto joints = sample_pose3d(rng, topo, cfg.sampler);
    const double z = depth_dist(rng);
    const double u = cam.cx + jitter(rng) * cam.width;
    const double v = cam.cy + jitter(rng) * cam.height;
    const Eigen::Vector3d root((u - cam.cx) * z / cam.focal, (v - cam.cy) * z / cam.focal, z);
    for (auto& j : joints) j += root;

    bool inside = true;
    for (const auto& j : joints) {
      if (j.z() <= 0.1) {
        inside = false;
        break;
      }
      const Eigen::Vector2d p = project_point(j, cam);
      if (p.x() < 0.0 || p.y() < 0.0 || p.x() > cam.width - 1 || p.y() > cam.height - 1) {
        inside = false;
        break;
      }
    }
    if (!inside) continue;

    LabeledSample s;
    s.depth = render_depth(joints, cfg.body, cam);
    s.visibility = compute_visibility(joints, s.depth, cam, cfg.visibility_margin);
    const auto excess = occlusion_excess(joints, s.depth, cam);
    s.detection = simulate_detection(joints, s.visibility, excess, cam, cfg.noise, rng);
    s.detection.frame_id = static_cast<std::int64_t>(index);
    s.detection.subject_id = 0;
    apply_distortion(s.depth, cfg.distortion, rng);

    s.gt_rel = root_center(joints, topo.root_index());
    for (auto& j : s.gt_rel.joints) j *= 1000.0;
    s.gt_camera = std::move(joints);
    return s;
  }
  throw Error("retry_budget_exhausted", "sample " + std::to_string(index) + ": no in-frame pose after " +
                                            std::to_string(cfg.max_retries) + " attempts");
}

std::vector<LabeledSample> generate_dataset(const SceneConfig& cfg, int n_samples) {
  std::vector<LabeledSample> out;
  for_each_sample(cfg, n_samples, [&](int, LabeledSample&& s) { out.push_back(std::move(s)); });
  return out;
}

void for_each_sample(const SceneConfig& cfg, int n_samples, const std::function<void(int, LabeledSample&&)>& fn) {
  if (n_samples < 1) throw Error("invalid_argument", "n_samples must be >= 1");
  cfg.validate();
  for (int i = 0; i < n_samples; ++i) fn(i, generate_sample(cfg, static_cast<std::uint64_t>(i)));
}

}  // namespace auglift::synth
