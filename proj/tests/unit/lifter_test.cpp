#include "auglift/lifter.hpp"

#include "../support/oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace auglift;
using namespace auglift::lifter;
namespace fs = std::filesystem;

namespace {

LifterConfig small(InputMode mode, int k = 4, int width = 16, int blocks = 2) {
  LifterConfig c;
  c.input_mode = mode;
  c.joints = k;
  c.hidden_width = width;
  c.num_blocks = blocks;
  return c;
}

Eigen::MatrixXd randn(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double s = 1.0) {
  std::normal_distribution<double> n(0.0, s);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "auglift_lifter_test";
  fs::create_directories(dir);
  return dir / name;
}

Dataset toy_set(const LifterConfig& cfg, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset d;
  d.inputs = randn(cfg.input_width(), n, rng);
  const Eigen::MatrixXd mix = randn(cfg.output_width(), cfg.input_width(), rng, 50.0);
  d.targets = mix * d.inputs;
  return d;
}

}  // namespace

TEST(Modes, InputWidths) {
  EXPECT_EQ(small(InputMode::XY, 17).input_width(), 34);
  EXPECT_EQ(small(InputMode::XYC, 17).input_width(), 51);
  EXPECT_EQ(small(InputMode::XYCD, 17).input_width(), 68);
  EXPECT_EQ(small(InputMode::XYOD, 17).input_width(), 51);
  for (auto m : {InputMode::XY, InputMode::XYC, InputMode::XYCD, InputMode::XYOD})
    EXPECT_EQ(input_mode_from_string(to_string(m)), m);
  EXPECT_THROW(input_mode_from_string("XYZ"), Error);
}

TEST(Init, DeterministicZeroBiasScaledVariance) {
  const auto cfg = small(InputMode::XYCD, 17, 256, 2);
  const auto a = init_params(cfg, 5), b = init_params(cfg, 5);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == init_params(cfg, 6));
  for (std::size_t t = 1; t < a.tensors.size(); t += 2) EXPECT_EQ(a.tensors[t].cwiseAbs().maxCoeff(), 0.0);
  for (std::size_t t = 0; t < a.tensors.size(); t += 2) {
    const auto& w = a.tensors[t];
    if (w.size() < 10000) continue;
    const double var = w.squaredNorm() / static_cast<double>(w.size());
    EXPECT_NEAR(var * static_cast<double>(w.cols()), 1.0, 0.2) << "tensor " << t;
  }
}

TEST(Forward, ZeroWeightsGiveOutputBias) {
  const auto cfg = small(InputMode::XYC);
  auto p = init_params(cfg, 1);
  for (auto& t : p.tensors) t.setZero();
  std::mt19937_64 rng(3);
  p.tensors.back() = randn(cfg.output_width(), 1, rng);
  const Eigen::MatrixXd x = randn(cfg.input_width(), 5, rng, 10.0);
  const Eigen::MatrixXd y = forward(p, x, Phase::Eval);
  for (int c = 0; c < 5; ++c) EXPECT_EQ(y.col(c), p.tensors.back().col(0));
}

TEST(Forward, EvalIsPureTrainIsStochastic) {
  const auto cfg = small(InputMode::XYCD);
  const auto p = init_params(cfg, 2);
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = randn(cfg.input_width(), 8, rng);
  EXPECT_EQ(forward(p, x, Phase::Eval), forward(p, x, Phase::Eval));
  std::mt19937_64 r1(9), r2(10);
  EXPECT_NE(forward(p, x, Phase::Train, &r1), forward(p, x, Phase::Train, &r2));
  EXPECT_THROW(forward(p, Eigen::MatrixXd::Zero(3, 1), Phase::Eval), Error);
}

TEST(Forward, CueDropoutZeroesOnlyCueChannels) {
  auto cfg = small(InputMode::XYCD, 3, 8, 1);
  cfg.dropout_rate = 0.0;
  const auto p = init_params(cfg, 3);
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = randn(cfg.input_width(), 1, rng);
  DropoutMasks m;
  for (int l = 0; l < 3; ++l) m.hidden.push_back(Eigen::MatrixXd::Ones(8, 1));
  m.cue_keep = Eigen::MatrixXd::Ones(3, 1);
  m.cue_keep(1, 0) = 0.0;
  Eigen::MatrixXd zeroed = x;
  zeroed(4 + 2, 0) = 0.0;
  zeroed(4 + 3, 0) = 0.0;
  EXPECT_EQ(forward_masked(p, x, &m), forward_masked(p, zeroed, nullptr));
}

TEST(Forward, XycdWithZeroCueWeightsEqualsXy) {
  const auto cxy = small(InputMode::XY, 5, 12, 2);
  const auto cxycd = small(InputMode::XYCD, 5, 12, 2);
  const auto pxy = init_params(cxy, 21);
  auto p4 = init_params(cxycd, 21);
  for (std::size_t t = 1; t < pxy.tensors.size(); ++t) p4.tensors[t] = pxy.tensors[t];
  p4.tensors[0].setZero();
  for (int j = 0; j < 5; ++j) {
    p4.tensors[0].col(4 * j) = pxy.tensors[0].col(2 * j);
    p4.tensors[0].col(4 * j + 1) = pxy.tensors[0].col(2 * j + 1);
  }
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd x4 = randn(20, 6, rng);
  Eigen::MatrixXd x2(10, 6);
  for (int j = 0; j < 5; ++j) x2.middleRows(2 * j, 2) = x4.middleRows(4 * j, 2);
  EXPECT_LE((forward(p4, x4, Phase::Eval) - forward(pxy, x2, Phase::Eval)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Loss, ZeroNetworkZeroTargets) {
  const auto cfg = small(InputMode::XY);
  auto p = init_params(cfg, 1);
  for (auto& t : p.tensors) t.setZero();
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd x = randn(cfg.input_width(), 4, rng);
  const Eigen::MatrixXd y = Eigen::MatrixXd::Zero(cfg.output_width(), 4);
  for (auto loss : {Loss::MSE, Loss::MPJPE}) {
    const auto lg = loss_and_grad(p, x, y, loss, nullptr);
    EXPECT_EQ(lg.loss, 0.0);
    for (const auto& g : lg.grad) EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Loss, MpjpeIsHomogeneousInTargets) {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd pred = Eigen::MatrixXd::Zero(12, 3);
  const Eigen::MatrixXd y = randn(12, 3, rng, 100.0);
  EXPECT_NEAR(batch_loss(pred, 2.0 * y, Loss::MPJPE), 2.0 * batch_loss(pred, y, Loss::MPJPE), 1e-9);
  EXPECT_THROW(loss_and_grad(init_params(small(InputMode::XY), 1), Eigen::MatrixXd::Constant(8, 1, NAN),
                             Eigen::MatrixXd::Zero(12, 1), Loss::MSE, nullptr),
               Error);
}

TEST(Gradient, MatchesFiniteDifferencesOnSmallNetwork) {
  std::mt19937_64 rng(77);
  for (auto mode : {InputMode::XY, InputMode::XYCD}) {
    for (auto loss : {Loss::MSE, Loss::MPJPE}) {
      const auto cfg = small(mode, 4, 16, 2);
      auto p = init_params(cfg, 13);
      p.input_mean = randn(cfg.input_width(), 1, rng);
      p.input_scale = randn(cfg.input_width(), 1, rng).cwiseAbs().array() + 0.5;
      p.output_scale = randn(cfg.output_width(), 1, rng).cwiseAbs().array() + 0.5;
      for (std::size_t t = 1; t < p.tensors.size(); t += 2) p.tensors[t] = randn(p.tensors[t].rows(), 1, rng, 0.1);
      const Eigen::MatrixXd x = randn(cfg.input_width(), 3, rng);
      const Eigen::MatrixXd y = randn(cfg.output_width(), 3, rng);
      const DropoutMasks masks = sample_masks(cfg, 3, rng);
      const auto res = oracle::finite_difference_check(p, x, y, loss, &masks);
      EXPECT_LT(res.max_rel_error, 1e-4);
      EXPECT_GT(res.checked, static_cast<long>(p.parameter_count()) / 2);
    }
  }
}

TEST(Train, ToySetConverges) {
  auto cfg = small(InputMode::XY, 4, 32, 1);
  cfg.dropout_rate = 0.0;
  const Dataset d = toy_set(cfg, 32, 1);
  TrainConfig tc;
  tc.epochs = 200;
  tc.batch_size = 8;
  tc.learning_rate = 0.02;
  tc.lr_decay = 1.0;
  tc.seed = 3;
  const auto r = train(d, cfg, tc);
  ASSERT_EQ(r.history.size(), 200u);
  EXPECT_LT(r.history.back(), 0.1 * r.initial_loss);
}

TEST(Train, ZeroLearningRateKeepsHistoryConstant) {
  const auto cfg = small(InputMode::XYC);
  TrainConfig tc;
  tc.epochs = 5;
  tc.learning_rate = 0.0;
  const auto r = train(toy_set(cfg, 40, 2), cfg, tc);
  for (double h : r.history) EXPECT_EQ(h, r.initial_loss);
}

TEST(Train, DeterministicPerSeed) {
  const auto cfg = small(InputMode::XYCD);
  TrainConfig tc;
  tc.epochs = 3;
  tc.seed = 11;
  const auto d = toy_set(cfg, 100, 3);
  const auto a = train(d, cfg, tc), b = train(d, cfg, tc);
  EXPECT_TRUE(a.params == b.params);
  EXPECT_EQ(a.history, b.history);
  tc.seed = 12;
  EXPECT_FALSE(train(d, cfg, tc).params == a.params);
}

TEST(Train, DivergenceIsReported) {
  auto cfg = small(InputMode::XY);
  cfg.dropout_rate = 0.0;
  TrainConfig tc;
  tc.epochs = 20;
  tc.learning_rate = 50.0;
  EXPECT_THROW(train(toy_set(cfg, 64, 4), cfg, tc), Error);
}

TEST(Checkpoint, RoundTripAndRejections) {
  const auto cfg = small(InputMode::XYCD, 17, 16, 2);
  auto p = init_params(cfg, 9);
  std::mt19937_64 rng(1);
  p.input_mean = randn(cfg.input_width(), 1, rng);
  const auto path = scratch("ckpt.bin");
  save_params(p, path);
  EXPECT_TRUE(load_params(path) == p);
  EXPECT_TRUE(load_params(path, cfg) == p);

  auto wrong_k = cfg;
  wrong_k.joints = 16;
  EXPECT_THROW(load_params(path, wrong_k), Error);

  const auto size = fs::file_size(path);
  const auto cut = scratch("cut.bin");
  fs::copy_file(path, cut, fs::copy_options::overwrite_existing);
  fs::resize_file(cut, size - 9);
  EXPECT_THROW(load_params(cut), Error);

  fs::copy_file(path, cut, fs::copy_options::overwrite_existing);
  { std::ofstream(cut, std::ios::app | std::ios::binary) << 'x'; }
  EXPECT_THROW(load_params(cut), Error);

  fs::copy_file(path, cut, fs::copy_options::overwrite_existing);
  {
    std::fstream f(cut, std::ios::in | std::ios::out | std::ios::binary);
    f.write("NOTMAGIC", 8);
  }
  EXPECT_THROW(load_params(cut), Error);
  EXPECT_THROW(load_params(scratch("absent.bin")), Error);
}
