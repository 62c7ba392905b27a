#pragma once

// Independent reference implementations used by unit and acceptance tests.
// Each one is deliberately naive: exhaustive loops, integer arithmetic or
// dense search, so it shares no code path with the library under test.

#include "auglift/lifter.hpp"
#include "auglift/ordinal.hpp"
#include "auglift/skeleton.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

/// Scans every pixel of the raster.
inline double brute_force_disk_min(const auglift::DepthRaster& d, double x, double y, int r) {
  const int cu = std::clamp(static_cast<int>(std::floor(x + 0.5)), 0, d.width() - 1);
  const int cv = std::clamp(static_cast<int>(std::floor(y + 0.5)), 0, d.height() - 1);
  double best = std::numeric_limits<double>::infinity();
  for (int v = 0; v < d.height(); ++v)
    for (int u = 0; u < d.width(); ++u)
      if ((u - cu) * (u - cu) + (v - cv) * (v - cv) <= r * r) best = std::min(best, static_cast<double>(d.at(u, v)));
  return best;
}

/// Floor division on integers: z and g both given in whole millimeters.
inline int bin_mm(long z_mm, long g_mm) {
  long q = z_mm / g_mm;
  if ((z_mm % g_mm != 0) && ((z_mm < 0) != (g_mm < 0))) --q;
  return static_cast<int>(q);
}

inline auglift::ordinal::DepthLabel label_mm(long z_mm, long tau_mm) {
  using auglift::ordinal::DepthLabel;
  if (z_mm < -tau_mm) return DepthLabel::Front;
  if (z_mm > tau_mm) return DepthLabel::Behind;
  return DepthLabel::At;
}

/// Per-coordinate central differences of the batch loss, fixed masks.
struct FdResult {
  double max_rel_error = 0.0;
  long checked = 0;
  long skipped_kinks = 0;
};

/// Relative error |a - n| / max(|a|, |n|, floor); the floor keeps entries whose
/// true derivative is ~0 from turning roundoff into a large ratio.
inline FdResult finite_difference_check(const auglift::lifter::LifterParams& params, const Eigen::MatrixXd& x,
                                        const Eigen::MatrixXd& y, auglift::lifter::Loss loss,
                                        const auglift::lifter::DropoutMasks* masks, double eps = 1e-5) {
  using namespace auglift::lifter;
  const LossAndGrad analytic = loss_and_grad(params, x, y, loss, masks);
  const auto base_pattern = activation_pattern(params, x, masks);
  const double floor = 1e-7 * std::max(1.0, std::abs(analytic.loss));
  FdResult res;
  LifterParams p = params;
  for (std::size_t t = 0; t < p.tensors.size(); ++t) {
    for (Eigen::Index i = 0; i < p.tensors[t].size(); ++i) {
      double& w = p.tensors[t].data()[i];
      const double w0 = w;
      w = w0 + eps;
      const double lp = batch_loss(forward_masked(p, x, masks), y, loss);
      const bool kink_p = activation_pattern(p, x, masks) != base_pattern;
      w = w0 - eps;
      const double lm = batch_loss(forward_masked(p, x, masks), y, loss);
      const bool kink_m = activation_pattern(p, x, masks) != base_pattern;
      w = w0;
      if (kink_p || kink_m) {
        // A ReLU switches inside the stencil: the loss is not smooth there.
        ++res.skipped_kinks;
        continue;
      }
      const double numeric = (lp - lm) / (2.0 * eps);
      const double a = analytic.grad[t].data()[i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      res.max_rel_error = std::max(res.max_rel_error, rel);
      ++res.checked;
    }
  }
  return res;
}

/// Dense rotation search on a 2-degree ZYX Euler grid. For each rotation the
/// translation and scale minimizing squared error are closed form; returns
/// the mean per-joint error of the best squared-error fit.
inline double grid_search_p_mpjpe(const auglift::Pose3D& pred, const auglift::Pose3D& gt, double step_deg = 2.0) {
  const int k = pred.size();
  Eigen::Matrix3Xd p(3, k), g(3, k);
  for (int j = 0; j < k; ++j) {
    p.col(j) = pred.joints[static_cast<std::size_t>(j)];
    g.col(j) = gt.joints[static_cast<std::size_t>(j)];
  }
  p.colwise() -= p.rowwise().mean();
  g.colwise() -= g.rowwise().mean();
  const double pp = p.squaredNorm();
  const double step = step_deg * M_PI / 180.0;
  double best_sse = std::numeric_limits<double>::infinity();
  Eigen::Matrix3d best_r = Eigen::Matrix3d::Identity();
  double best_s = 1.0;
  for (double a = -M_PI; a < M_PI; a += step) {
    const Eigen::Matrix3d rz = Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    for (double b = -M_PI / 2; b <= M_PI / 2; b += step) {
      const Eigen::Matrix3d rzy = rz * Eigen::AngleAxisd(b, Eigen::Vector3d::UnitY()).toRotationMatrix();
      for (double c = -M_PI; c < M_PI; c += step) {
        const Eigen::Matrix3d r = rzy * Eigen::AngleAxisd(c, Eigen::Vector3d::UnitX()).toRotationMatrix();
        const Eigen::Matrix3Xd rp = r * p;
        const double s = std::max(0.0, (g.cwiseProduct(rp)).sum() / pp);
        const double sse = (g - s * rp).squaredNorm();
        if (sse < best_sse) {
          best_sse = sse;
          best_r = r;
          best_s = s;
        }
      }
    }
  }
  const Eigen::Matrix3Xd aligned = best_s * best_r * p;
  return (g - aligned).colwise().norm().mean();
}

/// Random similarity transform: rotation, scale in [0.5, 2], translation up to 500 mm.
inline auglift::Pose3D random_similarity(const auglift::Pose3D& pose, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> s(0.5, 2.0), t(-500.0, 500.0);
  const Eigen::Quaterniond q = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized();
  const double scale = s(rng);
  const Eigen::Vector3d shift(t(rng), t(rng), t(rng));
  auglift::Pose3D out;
  for (const auto& j : pose.joints) out.joints.push_back(scale * (q * j) + shift);
  return out;
}

inline auglift::Pose3D random_pose(int k, std::mt19937_64& rng, double spread_mm = 400.0) {
  std::normal_distribution<double> n(0.0, spread_mm);
  auglift::Pose3D p;
  for (int j = 0; j < k; ++j) p.joints.emplace_back(n(rng), n(rng), n(rng));
  return p;
}

}  // namespace oracle
