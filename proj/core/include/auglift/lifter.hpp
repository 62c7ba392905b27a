#pragma once

#include "auglift/skeleton.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Single-frame residual MLP lifter:
//
//   x -> standardize -> Dense -> ReLU -> Dropout
//     -> num_blocks x [ (Dense -> ReLU -> Dropout) x 2 + skip ]
//     -> Dense -> de-standardize -> root-relative joints (mm)
//
// Inputs are per-joint interleaved channels, so the first two channels of
// every joint are always (x, y).
namespace auglift::lifter {

enum class InputMode { XY, XYC, XYCD, XYOD };

int channels_per_joint(InputMode mode);
std::string_view to_string(InputMode mode);
InputMode input_mode_from_string(std::string_view s);

enum class Loss { MSE, MPJPE };

std::string_view to_string(Loss loss);
Loss loss_from_string(std::string_view s);

struct LifterConfig {
  InputMode input_mode = InputMode::XYCD;
  int hidden_width = 1024;
  int num_blocks = 2;
  double dropout_rate = 0.25;
  double cue_dropout_rate = 0.1;
  int joints = kDefaultJointCount;

  int input_width() const { return channels_per_joint(input_mode) * joints; }
  int output_width() const { return 3 * joints; }
  void validate() const;

  friend bool operator==(const LifterConfig&, const LifterConfig&) = default;
};

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  double lr_decay = 0.96;  // per-epoch multiplicative factor
  int batch_size = 64;
  int epochs = 40;
  std::uint64_t seed = 0;
  Loss loss = Loss::MSE;
  int history_samples = 1024;  // train-set prefix used for the per-epoch loss

  void validate() const;
};

/// Trainable tensors live in `tensors`, in the order
///   [W_in, b_in, {W1, b1, W2, b2} x num_blocks, W_out, b_out]
/// with biases stored as single-column matrices. The standardization
/// vectors are fitted from data and not trained.
struct LifterParams {
  LifterConfig config;
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_scale;
  Eigen::VectorXd output_mean;
  Eigen::VectorXd output_scale;
  std::vector<Eigen::MatrixXd> tensors;

  std::size_t parameter_count() const;
  bool all_finite() const;

  friend bool operator==(const LifterParams& a, const LifterParams& b);
};

using Gradient = std::vector<Eigen::MatrixXd>;

/// Weights ~ N(0, 1/fan_in), biases zero, identity standardization.
LifterParams init_params(const LifterConfig& cfg, std::uint64_t seed);

/// Fixed dropout draws for one batch. `hidden` holds one inverted-dropout
/// scale matrix (width x batch) per hidden activation; `cue_keep` is
/// joints x batch, 0 where the cue channels are dropped.
struct DropoutMasks {
  std::vector<Eigen::MatrixXd> hidden;
  Eigen::MatrixXd cue_keep;
};

DropoutMasks sample_masks(const LifterConfig& cfg, int batch, std::mt19937_64& rng);

enum class Phase { Train, Eval };

/// Batched forward. `inputs` is input_width x batch; returns 3K x batch in mm.
/// Train phase draws fresh masks from `rng`.
Eigen::MatrixXd forward(const LifterParams& params, const Eigen::MatrixXd& inputs, Phase phase,
                        std::mt19937_64* rng = nullptr);

/// Forward with explicit masks (nullptr means no dropout).
Eigen::MatrixXd forward_masked(const LifterParams& params, const Eigen::MatrixXd& inputs, const DropoutMasks* masks);

/// Single-sample convenience returning a Pose3D.
Pose3D predict(const LifterParams& params, std::span<const double> input);

double batch_loss(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets, Loss loss);

struct LossAndGrad {
  double loss = 0.0;
  Gradient grad;
};

/// Exact gradient of the batch loss under the given masks (nullptr: no dropout).
LossAndGrad loss_and_grad(const LifterParams& params, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                          Loss loss, const DropoutMasks* masks);

/// Sign pattern of every hidden pre-activation, for detecting ReLU kinks.
std::vector<bool> activation_pattern(const LifterParams& params, const Eigen::MatrixXd& inputs,
                                     const DropoutMasks* masks);

struct Dataset {
  Eigen::MatrixXd inputs;   // input_width x N
  Eigen::MatrixXd targets;  // 3K x N, mm

  int size() const { return static_cast<int>(inputs.cols()); }
};

/// Fits input/output standardization from the dataset into `params`.
void fit_standardization(LifterParams& params, const Dataset& data);

struct TrainResult {
  LifterParams params;
  double initial_loss = 0.0;
  std::vector<double> history;  // eval-mode loss on the history subset after each epoch
};

TrainResult train(const Dataset& data, const LifterConfig& cfg, const TrainConfig& tcfg);

/// Little-endian binary checkpoint with a JSON header.
void save_params(const LifterParams& params, const std::filesystem::path& path);
LifterParams load_params(const std::filesystem::path& path);
/// Also rejects a checkpoint whose config differs from `expected`.
LifterParams load_params(const std::filesystem::path& path, const LifterConfig& expected);

}  // namespace auglift::lifter
