#include "auglift/metrics.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace auglift::metrics {

namespace {

void check_pair(const Pose3D& pred, const Pose3D& gt) {
  if (pred.size() != gt.size()) throw Error("shape_mismatch", "prediction and ground truth differ in joint count");
  if (pred.size() == 0) throw Error("invalid_pose", "empty pose");
}

Eigen::Matrix3Xd as_matrix(const Pose3D& p) {
  Eigen::Matrix3Xd m(3, p.size());
  for (int j = 0; j < p.size(); ++j) m.col(j) = p.joints[static_cast<std::size_t>(j)];
  return m;
}

}  // namespace

double mpjpe(const Pose3D& pred, const Pose3D& gt) {
  check_pair(pred, gt);
  double sum = 0.0;
  for (std::size_t j = 0; j < pred.joints.size(); ++j) sum += (pred.joints[j] - gt.joints[j]).norm();
  return sum / static_cast<double>(pred.size());
}

Pose3D procrustes_align(const Pose3D& pred, const Pose3D& gt) {
  check_pair(pred, gt);
  if (pred.size() < 3) throw Error("invalid_pose", "Procrustes alignment needs at least 3 joints");
  const Eigen::Matrix3Xd x = as_matrix(pred);
  const Eigen::Matrix3Xd y = as_matrix(gt);
  const Eigen::Vector3d mx = x.rowwise().mean();
  const Eigen::Vector3d my = y.rowwise().mean();
  const Eigen::Matrix3Xd xc = x.colwise() - mx;
  const Eigen::Matrix3Xd yc = y.colwise() - my;

  // Degenerate ground truth: all joints collinear (rank < 2).
  const Eigen::JacobiSVD<Eigen::Matrix3d> gt_svd(yc * yc.transpose());
  const Eigen::Vector3d gsv = gt_svd.singularValues();
  if (!(gsv[1] > 1e-12 * std::max(1.0, gsv[0]))) throw Error("degenerate_pose", "ground truth is degenerate (collinear)");

  const double xnorm = xc.squaredNorm();
  if (!(xnorm > 0.0)) {
    Pose3D out;
    out.joints.assign(static_cast<std::size_t>(pred.size()), my);
    return out;
  }

  const Eigen::Matrix3d cov = yc * xc.transpose();
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Eigen::Matrix3d rot = svd.matrixU() * d * svd.matrixV().transpose();
  const double scale = (svd.singularValues().asDiagonal() * d).trace() / xnorm;

  Pose3D out;
  out.joints.reserve(pred.joints.size());
  for (int j = 0; j < pred.size(); ++j) out.joints.push_back(scale * rot * xc.col(j) + my);
  return out;
}

double p_mpjpe(const Pose3D& pred, const Pose3D& gt) { return mpjpe(procrustes_align(pred, gt), gt); }

double pck(const Pose3D& pred, const Pose3D& gt, double threshold_mm) {
  check_pair(pred, gt);
  int hits = 0;
  for (std::size_t j = 0; j < pred.joints.size(); ++j) hits += (pred.joints[j] - gt.joints[j]).norm() <= threshold_mm;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

std::vector<double> default_auc_thresholds() {
  std::vector<double> t;
  for (int mm = 5; mm <= 150; mm += 5) t.push_back(mm);
  return t;
}

double auc(const Pose3D& pred, const Pose3D& gt, std::span<const double> thresholds) {
  if (thresholds.empty()) throw Error("invalid_argument", "AUC needs at least one threshold");
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw Error("invalid_argument", "AUC thresholds must be ascending");
  double sum = 0.0;
  for (double t : thresholds) sum += pck(pred, gt, t);
  return sum / static_cast<double>(thresholds.size());
}

MetricReport evaluate(std::span<const Pose3D> preds, std::span<const Pose3D> gts) {
  if (preds.size() != gts.size()) throw Error("shape_mismatch", "prediction and ground-truth counts differ");
  MetricReport r;
  const auto thresholds = default_auc_thresholds();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    r.mpjpe += mpjpe(preds[i], gts[i]);
    r.p_mpjpe += p_mpjpe(preds[i], gts[i]);
    r.pck150 += pck(preds[i], gts[i], 150.0);
    r.auc += auc(preds[i], gts[i], thresholds);
  }
  r.n_frames = static_cast<int>(preds.size());
  if (r.n_frames > 0) {
    const double n = r.n_frames;
    r.mpjpe /= n;
    r.p_mpjpe /= n;
    r.pck150 /= n;
    r.auc /= n;
  }
  return r;
}

}  // namespace auglift::metrics
