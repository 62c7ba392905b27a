#include "auglift/ordinal.hpp"

#include "../support/oracles.hpp"

#include <gtest/gtest.h>

using namespace auglift;
using namespace auglift::ordinal;

TEST(RelativeDepths, SignConvention) {
  const std::vector<Eigen::Vector3d> flat(5, Eigen::Vector3d(0.1, 0.2, 4.0));
  for (double z : relative_depths(flat, 0)) EXPECT_EQ(z, 0.0);
  const std::vector<Eigen::Vector3d> j{{0, 0, 4.0}, {0, 0, 4.3}, {0, 0, 3.85}};
  const auto z = relative_depths(j, 0);
  EXPECT_NEAR(z[1], 0.3, 1e-12);
  EXPECT_NEAR(z[2], -0.15, 1e-12);
  EXPECT_THROW(relative_depths(j, 3), Error);
}

TEST(CoarseBins, Examples) {
  const std::vector<double> z{-0.3, 0.0, 0.05, 0.3};
  const auto b = coarse_bins(z, 0.25);
  EXPECT_EQ(b, (std::vector<int>{-2, 0, 0, 1}));
  EXPECT_EQ(occupied_bin_count(b), 3);
  EXPECT_LE(occupied_bin_count(coarse_bins(z, 10.0)), 2);
  EXPECT_EQ(coarse_bins(std::vector{0.3}, 0.1), (std::vector<int>{3}));
  EXPECT_EQ(occupied_bin_count(std::vector<int>{4, 4, 4}), 1);
  EXPECT_THROW(coarse_bins(z, 0.0), Error);
}

TEST(CoarseBins, Homogeneous) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> z(17);
    for (auto& v : z) v = u(rng);
    const auto base = coarse_bins(z, 0.1);
    for (double s : {0.5, 2.0, 8.0}) {
      std::vector<double> zs = z;
      for (auto& v : zs) v *= s;
      EXPECT_EQ(coarse_bins(zs, 0.1 * s), base);
    }
  }
}

TEST(CoarseBins, CountsShrinkAsBinsCoarsen) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.2);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> z(17);
    for (auto& v : z) v = n(rng);
    const int fine = occupied_bin_count(coarse_bins(z, 0.01));
    const int mid = occupied_bin_count(coarse_bins(z, 0.10));
    const int coarse = occupied_bin_count(coarse_bins(z, 0.25));
    EXPECT_GE(fine, mid);
    EXPECT_GE(mid, coarse);
  }
}

TEST(ThreeWay, ExamplesAndBoundary) {
  const auto l = three_way_labels(std::vector{-0.15, 0.05, 0.20, 0.10, -0.10}, 0.10);
  EXPECT_EQ(l[0], DepthLabel::Front);
  EXPECT_EQ(l[1], DepthLabel::At);
  EXPECT_EQ(l[2], DepthLabel::Behind);
  EXPECT_EQ(l[3], DepthLabel::At);
  EXPECT_EQ(l[4], DepthLabel::At);
  EXPECT_THROW(three_way_labels(std::vector{0.0}, 0.0), Error);
}

TEST(ThreeWay, MatchesIntegerReferenceOnMillimeterGrid) {
  for (long tau_mm : {10L, 100L, 250L}) {
    const double tau = static_cast<double>(tau_mm) / 1000.0;
    std::vector<double> z;
    for (long i = -1000; i <= 1000; ++i) z.push_back(static_cast<double>(i) / 1000.0);
    const auto labels = three_way_labels(z, tau);
    const auto bins = coarse_bins(z, tau);
    for (long i = -1000; i <= 1000; ++i) {
      const auto k = static_cast<std::size_t>(i + 1000);
      ASSERT_EQ(labels[k], oracle::label_mm(i, tau_mm)) << "z_mm=" << i;
      ASSERT_EQ(bins[k], oracle::bin_mm(i, tau_mm)) << "z_mm=" << i;
      // With g = tau, sign bucketing of the bins agrees away from the edges.
      if (std::abs(i) % tau_mm != 0) {
        const auto from_bins = bins[k] >= 1 ? DepthLabel::Behind : bins[k] <= -2 ? DepthLabel::Front : DepthLabel::At;
        EXPECT_EQ(labels[k], from_bins) << "z_mm=" << i;
      }
    }
  }
}

TEST(ThreeWay, InvariantToDepthOffset) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> z(2.0, 7.0), off(-1.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    std::vector<Eigen::Vector3d> j(17);
    for (auto& p : j) p = {0, 0, z(rng)};
    auto shifted = j;
    const double o = off(rng);
    for (auto& p : shifted) p.z() += o;
    const auto a = three_way_labels(relative_depths(j, 0), 0.1);
    const auto b = three_way_labels(relative_depths(shifted, 0), 0.1);
    // Labels are compared away from the +-tau edges, where rounding of the
    // offset could flip a tie.
    const auto za = relative_depths(j, 0);
    for (std::size_t k = 0; k < a.size(); ++k)
      if (std::abs(std::abs(za[k]) - 0.1) > 1e-9) EXPECT_EQ(a[k], b[k]);
  }
}

TEST(OdChannel, Encoding) {
  const std::vector<DepthLabel> all_at(6, DepthLabel::At);
  for (double v : od_input_channel(all_at)) EXPECT_EQ(v, 0.0);
  const auto c = od_input_channel(std::vector{DepthLabel::Front, DepthLabel::At, DepthLabel::Behind});
  EXPECT_EQ(c, (std::vector<double>{-1.0, 0.0, 1.0}));
  EXPECT_EQ(od_input_channel(std::vector{-2, 0, 3}, 0.25), (std::vector<double>{-0.5, 0.0, 0.75}));
}
