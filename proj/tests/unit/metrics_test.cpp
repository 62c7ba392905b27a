#include "auglift/metrics.hpp"

#include "../support/oracles.hpp"

#include <gtest/gtest.h>

using namespace auglift;
using namespace auglift::metrics;

namespace {

Pose3D pose(std::vector<Eigen::Vector3d> j) { return Pose3D{std::move(j)}; }

}  // namespace

TEST(Mpjpe, Examples) {
  const Pose3D a = pose({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(mpjpe(a, a), 0.0);
  EXPECT_EQ(mpjpe(pose({{3, 4, 0}}), pose({{0, 0, 0}})), 5.0);
  EXPECT_EQ(mpjpe(pose({{0, 0, 0}, {10, 0, 0}}), pose({{0, 0, 0}, {0, 0, 0}})), 5.0);
  EXPECT_THROW(mpjpe(a, pose({{0, 0, 0}})), Error);
}

TEST(Mpjpe, IsAMetric) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const auto a = oracle::random_pose(17, rng), b = oracle::random_pose(17, rng), c = oracle::random_pose(17, rng);
    EXPECT_EQ(mpjpe(a, b), mpjpe(b, a));
    EXPECT_LE(mpjpe(a, c), mpjpe(a, b) + mpjpe(b, c) + 1e-9);
  }
}

TEST(Pmpjpe, RemovesSimilarityTransforms) {
  std::mt19937_64 rng(5);
  const Pose3D gt = oracle::random_pose(17, rng);
  const Eigen::Matrix3d rx = Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitX()).toRotationMatrix();
  Pose3D rot, scaled;
  for (const auto& j : gt.joints) {
    rot.joints.push_back(rx * j);
    scaled.joints.push_back(2.0 * j + Eigen::Vector3d(30, -40, 500));
  }
  EXPECT_LT(p_mpjpe(rot, gt), 1e-6);
  EXPECT_LT(p_mpjpe(scaled, gt), 1e-6);
}

TEST(Pmpjpe, ExcludesReflections) {
  std::mt19937_64 rng(6);
  const Pose3D gt = oracle::random_pose(10, rng);
  Pose3D mirrored = gt;
  for (auto& j : mirrored.joints) j.x() = -j.x();
  EXPECT_GT(p_mpjpe(mirrored, gt), 1.0);
}

TEST(Pmpjpe, MatchesGridSearchOracle) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 3; ++i) {
    const Pose3D gt = oracle::random_pose(5, rng);
    const Pose3D pred = oracle::random_pose(5, rng);
    const double got = p_mpjpe(pred, gt);
    const double ref = oracle::grid_search_p_mpjpe(pred, gt);
    EXPECT_NEAR(got, ref, 0.02 * ref);
  }
}

TEST(Pmpjpe, AlignmentNeverIncreasesSquaredError) {
  // The alignment minimizes summed squared error; mean Euclidean error can
  // rise slightly on near-identical pairs, so only the squared form is a bound.
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 40.0);
  auto sse = [](const Pose3D& a, const Pose3D& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.joints.size(); ++j) s += (a.joints[j] - b.joints[j]).squaredNorm();
    return s;
  };
  for (int i = 0; i < 1000; ++i) {
    const Pose3D gt = oracle::random_pose(17, rng);
    Pose3D pred = gt;
    for (auto& j : pred.joints) j += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
    const double before = sse(pred, gt);
    EXPECT_LE(sse(procrustes_align(pred, gt), gt), before * (1 + 1e-12));
  }
}

TEST(Pmpjpe, DegenerateGroundTruthRejected) {
  const Pose3D line = pose({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
  EXPECT_THROW(p_mpjpe(pose({{0, 1, 0}, {1, 0, 2}, {2, 0, 0}, {3, 5, 0}}), line), Error);
  EXPECT_THROW(p_mpjpe(pose({{0, 0, 0}, {1, 0, 0}}), pose({{0, 0, 0}, {0, 1, 0}})), Error);
}

TEST(Pck, ExamplesAndMonotonicity) {
  const Pose3D z = pose({{0, 0, 0}, {0, 0, 0}});
  EXPECT_EQ(pck(z, z), 1.0);
  EXPECT_EQ(pck(pose({{100, 0, 0}, {0, 200, 0}}), z, 150.0), 0.5);
  EXPECT_EQ(pck(pose({{0, 0, 0}, {1e-9, 0, 0}}), z, 0.0), 0.5);
  std::mt19937_64 rng(9);
  const auto a = oracle::random_pose(17, rng), b = oracle::random_pose(17, rng);
  double prev = 0.0;
  for (double t = 0; t <= 2000; t += 25) {
    const double v = pck(a, b, t);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Auc, Examples) {
  const Pose3D z = pose({{0, 0, 0}});
  const auto th = default_auc_thresholds();
  ASSERT_EQ(th.size(), 30u);
  EXPECT_EQ(th.front(), 5.0);
  EXPECT_EQ(th.back(), 150.0);
  EXPECT_EQ(auc(z, z, th), 1.0);
  EXPECT_EQ(auc(pose({{151, 0, 0}}), z, th), 0.0);
  EXPECT_EQ(auc(pose({{75, 0, 0}}), z, std::vector{50.0, 100.0}), 0.5);
  EXPECT_THROW(auc(z, z, std::vector<double>{}), Error);
  EXPECT_THROW(auc(z, z, std::vector{100.0, 50.0}), Error);
}

TEST(Evaluate, AveragesFrames) {
  const std::vector<Pose3D> gts{pose({{0, 0, 0}, {100, 0, 0}, {0, 100, 0}}), pose({{0, 0, 0}, {0, 0, 100}, {50, 50, 0}})};
  std::vector<Pose3D> preds = gts;
  preds[1].joints[1].z() += 30.0;
  const auto r = evaluate(preds, gts);
  EXPECT_EQ(r.n_frames, 2);
  EXPECT_NEAR(r.mpjpe, (0.0 + 10.0) / 2, 1e-12);
  EXPECT_LE(r.p_mpjpe, r.mpjpe + 1e-9);
  EXPECT_EQ(r.pck150, 1.0);
  EXPECT_THROW(evaluate(preds, std::vector<Pose3D>{}), Error);
}
