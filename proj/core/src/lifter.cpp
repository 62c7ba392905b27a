#include "auglift/lifter.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace auglift::lifter {

namespace {

constexpr char kMagic[8] = {'A', 'U', 'G', 'L', 'I', 'F', 'T', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

int hidden_layer_count(const LifterConfig& cfg) { return 1 + 2 * cfg.num_blocks; }

std::vector<std::pair<int, int>> tensor_shapes(const LifterConfig& cfg) {
  const int h = cfg.hidden_width;
  std::vector<std::pair<int, int>> s;
  s.emplace_back(h, cfg.input_width());
  s.emplace_back(h, 1);
  for (int b = 0; b < cfg.num_blocks; ++b) {
    s.emplace_back(h, h);
    s.emplace_back(h, 1);
    s.emplace_back(h, h);
    s.emplace_back(h, 1);
  }
  s.emplace_back(cfg.output_width(), h);
  s.emplace_back(cfg.output_width(), 1);
  return s;
}

// Per-joint channel indices zeroed by cue dropout.
std::vector<int> cue_channels(InputMode mode) {
  switch (mode) {
    case InputMode::XYC:
      return {2};
    case InputMode::XYCD:
      return {2, 3};
    default:
      return {};
  }
}

struct ForwardCache {
  Eigen::MatrixXd xn;
  std::vector<Eigen::MatrixXd> pre;   // hidden pre-activations, in layer order
  std::vector<Eigen::MatrixXd> post;  // post-dropout activations, in layer order
  std::vector<Eigen::MatrixXd> block_in;  // residual stream entering each block
  Eigen::MatrixXd trunk;                  // final residual stream
  Eigen::MatrixXd pred;
};

Eigen::MatrixXd standardize(const LifterParams& p, const Eigen::MatrixXd& inputs, const DropoutMasks* masks) {
  const auto& cfg = p.config;
  if (inputs.rows() != cfg.input_width())
    throw Error("shape_mismatch", "lifter input has " + std::to_string(inputs.rows()) + " rows, expected " +
                                      std::to_string(cfg.input_width()));
  Eigen::MatrixXd x = inputs;
  if (masks != nullptr && masks->cue_keep.size() > 0) {
    const int stride = channels_per_joint(cfg.input_mode);
    for (int ch : cue_channels(cfg.input_mode)) {
      for (int j = 0; j < cfg.joints; ++j) x.row(j * stride + ch).array() *= masks->cue_keep.row(j).array();
    }
  }
  return ((x.colwise() - p.input_mean).array().colwise() / p.input_scale.array()).matrix();
}

void apply_relu_dropout(Eigen::MatrixXd& z_to_a, const DropoutMasks* masks, int layer) {
  z_to_a = z_to_a.cwiseMax(0.0);
  if (masks != nullptr) z_to_a.array() *= masks->hidden[static_cast<std::size_t>(layer)].array();
}

ForwardCache run_forward(const LifterParams& p, const Eigen::MatrixXd& inputs, const DropoutMasks* masks) {
  const auto& t = p.tensors;
  ForwardCache c;
  c.xn = standardize(p, inputs, masks);

  Eigen::MatrixXd z;
  z.noalias() = t[0] * c.xn;
  z.colwise() += t[1].col(0);
  c.pre.push_back(z);
  Eigen::MatrixXd a = std::move(z);
  apply_relu_dropout(a, masks, 0);
  c.post.push_back(a);

  std::size_t ti = 2;
  int layer = 1;
  for (int b = 0; b < p.config.num_blocks; ++b) {
    c.block_in.push_back(a);
    Eigen::MatrixXd z1;
    z1.noalias() = t[ti] * a;
    z1.colwise() += t[ti + 1].col(0);
    c.pre.push_back(z1);
    apply_relu_dropout(z1, masks, layer++);
    c.post.push_back(z1);

    Eigen::MatrixXd z2;
    z2.noalias() = t[ti + 2] * z1;
    z2.colwise() += t[ti + 3].col(0);
    c.pre.push_back(z2);
    apply_relu_dropout(z2, masks, layer++);
    c.post.push_back(z2);

    a += z2;
    ti += 4;
  }
  c.trunk = a;
  Eigen::MatrixXd out;
  out.noalias() = t[ti] * a;
  out.colwise() += t[ti + 1].col(0);
  c.pred = (out.array().colwise() * p.output_scale.array()).colwise() + p.output_mean.array();
  return c;
}

Eigen::MatrixXd loss_gradient(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& targets, Loss loss) {
  const auto n = static_cast<double>(pred.cols());
  if (loss == Loss::MSE) return 2.0 * (pred - targets) / (n * static_cast<double>(pred.rows()));
  const Eigen::Index k = pred.rows() / 3;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(pred.rows(), pred.cols());
  for (Eigen::Index col = 0; col < pred.cols(); ++col) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::Vector3d d = pred.block<3, 1>(3 * j, col) - targets.block<3, 1>(3 * j, col);
      const double norm = d.norm();
      if (norm > 0.0) g.block<3, 1>(3 * j, col) = d / (norm * n * static_cast<double>(k));
    }
  }
  return g;
}

void write_raw(std::ostream& out, const double* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_raw(std::istream& in, double* data, std::size_t n) {
  const auto bytes = static_cast<std::streamsize>(n * sizeof(double));
  in.read(reinterpret_cast<char*>(data), bytes);
  if (in.gcount() != bytes) throw Error("invalid_checkpoint", "checkpoint is truncated");
}

nlohmann::json config_to_json(const LifterConfig& c) {
  return {{"input_mode", std::string(to_string(c.input_mode))},
          {"hidden_width", c.hidden_width},
          {"num_blocks", c.num_blocks},
          {"dropout_rate", c.dropout_rate},
          {"cue_dropout_rate", c.cue_dropout_rate},
          {"joints", c.joints}};
}

LifterConfig config_from_json(const nlohmann::json& j) {
  LifterConfig c;
  c.input_mode = input_mode_from_string(j.at("input_mode").get<std::string>());
  c.hidden_width = j.at("hidden_width").get<int>();
  c.num_blocks = j.at("num_blocks").get<int>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.cue_dropout_rate = j.at("cue_dropout_rate").get<double>();
  c.joints = j.at("joints").get<int>();
  return c;
}

}  // namespace

int channels_per_joint(InputMode mode) {
  switch (mode) {
    case InputMode::XY:
      return 2;
    case InputMode::XYC:
    case InputMode::XYOD:
      return 3;
    case InputMode::XYCD:
      return 4;
  }
  return 2;
}

std::string_view to_string(InputMode mode) {
  switch (mode) {
    case InputMode::XY:
      return "XY";
    case InputMode::XYC:
      return "XYC";
    case InputMode::XYCD:
      return "XYCD";
    case InputMode::XYOD:
      return "XY+OD3";
  }
  return "?";
}

InputMode input_mode_from_string(std::string_view s) {
  if (s == "XY") return InputMode::XY;
  if (s == "XYC") return InputMode::XYC;
  if (s == "XYCD") return InputMode::XYCD;
  if (s == "XY+OD3" || s == "XYOD") return InputMode::XYOD;
  throw Error("invalid_config", "unknown input mode '" + std::string(s) + "'");
}

std::string_view to_string(Loss loss) { return loss == Loss::MSE ? "mse" : "mpjpe"; }

Loss loss_from_string(std::string_view s) {
  if (s == "mse" || s == "MSE") return Loss::MSE;
  if (s == "mpjpe" || s == "MPJPE") return Loss::MPJPE;
  throw Error("invalid_config", "unknown loss '" + std::string(s) + "'");
}

void LifterConfig::validate() const {
  if (hidden_width < 1) throw Error("invalid_config", "lifter.hidden_width must be >= 1");
  if (num_blocks < 0) throw Error("invalid_config", "lifter.num_blocks must be >= 0");
  if (joints < 1) throw Error("invalid_config", "lifter.joints must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error("invalid_config", "lifter.dropout_rate must lie in [0, 1)");
  if (!(cue_dropout_rate >= 0.0 && cue_dropout_rate < 1.0))
    throw Error("invalid_config", "lifter.cue_dropout_rate must lie in [0, 1)");
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw Error("invalid_config", "train.learning_rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error("invalid_config", "train.momentum must lie in [0, 1)");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw Error("invalid_config", "train.lr_decay must lie in (0, 1]");
  if (batch_size < 1) throw Error("invalid_config", "train.batch_size must be >= 1");
  if (epochs < 0) throw Error("invalid_config", "train.epochs must be >= 0");
  if (history_samples < 1) throw Error("invalid_config", "train.history_samples must be >= 1");
}

std::size_t LifterParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += static_cast<std::size_t>(t.size());
  return n;
}

bool LifterParams::all_finite() const {
  return std::all_of(tensors.begin(), tensors.end(), [](const auto& t) { return t.allFinite(); }) &&
         input_mean.allFinite() && input_scale.allFinite() && output_mean.allFinite() && output_scale.allFinite();
}

bool operator==(const LifterParams& a, const LifterParams& b) {
  if (!(a.config == b.config) || a.tensors.size() != b.tensors.size()) return false;
  auto same = [](const auto& x, const auto& y) { return x.rows() == y.rows() && x.cols() == y.cols() && x == y; };
  for (std::size_t i = 0; i < a.tensors.size(); ++i) {
    if (!same(a.tensors[i], b.tensors[i])) return false;
  }
  return same(a.input_mean, b.input_mean) && same(a.input_scale, b.input_scale) &&
         same(a.output_mean, b.output_mean) && same(a.output_scale, b.output_scale);
}

LifterParams init_params(const LifterConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  LifterParams p;
  p.config = cfg;
  p.input_mean = Eigen::VectorXd::Zero(cfg.input_width());
  p.input_scale = Eigen::VectorXd::Ones(cfg.input_width());
  p.output_mean = Eigen::VectorXd::Zero(cfg.output_width());
  p.output_scale = Eigen::VectorXd::Ones(cfg.output_width());
  const auto shapes = tensor_shapes(cfg);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto [rows, cols] = shapes[i];
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
    // Even positions are weights, odd positions are biases (left at zero).
    if (i % 2 == 0) {
      const double sd = 1.0 / std::sqrt(static_cast<double>(cols));
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = sd * unit(rng);
    }
    p.tensors.push_back(std::move(m));
  }
  return p;
}

DropoutMasks sample_masks(const LifterConfig& cfg, int batch, std::mt19937_64& rng) {
  DropoutMasks m;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - cfg.dropout_rate);
  for (int l = 0; l < hidden_layer_count(cfg); ++l) {
    Eigen::MatrixXd mask(cfg.hidden_width, batch);
    for (Eigen::Index c = 0; c < mask.cols(); ++c)
      for (Eigen::Index r = 0; r < mask.rows(); ++r)
        mask(r, c) = (cfg.dropout_rate > 0.0 && u(rng) < cfg.dropout_rate) ? 0.0 : keep_scale;
    m.hidden.push_back(std::move(mask));
  }
  m.cue_keep = Eigen::MatrixXd::Ones(cfg.joints, batch);
  if (!cue_channels(cfg.input_mode).empty() && cfg.cue_dropout_rate > 0.0) {
    for (Eigen::Index c = 0; c < batch; ++c)
      for (Eigen::Index j = 0; j < cfg.joints; ++j)
        if (u(rng) < cfg.cue_dropout_rate) m.cue_keep(j, c) = 0.0;
  }
  return m;
}

Eigen::MatrixXd forward_masked(const LifterParams& params, const Eigen::MatrixXd& inputs, const DropoutMasks* masks) {
  return run_forward(params, inputs, masks).pred;
}

Eigen::MatrixXd forward(const LifterParams& params, const Eigen::MatrixXd& inputs, Phase phase, std::mt19937_64* rng) {
  if (phase == Phase::Eval) return forward_masked(params, inputs, nullptr);
  if (rng == nullptr) throw Error("invalid_argument", "train-phase forward needs an rng");
  const DropoutMasks masks = sample_masks(params.config, static_cast<int>(inputs.cols()), *rng);
  return forward_masked(params, inputs, &masks);
}

Pose3D predict(const LifterParams& params, std::span<const double> input) {
  const Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
  const Eigen::MatrixXd out = forward_masked(params, x, nullptr);
  Pose3D pose;
  for (int j = 0; j < params.config.joints; ++j) pose.joints.emplace_back(out.block<3, 1>(3 * j, 0));
  return pose;
}

double batch_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& targets, Loss loss) {
  if (pred.rows() != targets.rows() || pred.cols() != targets.cols())
    throw Error("shape_mismatch", "prediction and target shapes differ");
  if (pred.cols() == 0) throw Error("invalid_argument", "empty batch");
  if (loss == Loss::MSE) return (pred - targets).squaredNorm() / static_cast<double>(pred.size());
  const Eigen::Index k = pred.rows() / 3;
  double sum = 0.0;
  for (Eigen::Index c = 0; c < pred.cols(); ++c)
    for (Eigen::Index j = 0; j < k; ++j)
      sum += (pred.block<3, 1>(3 * j, c) - targets.block<3, 1>(3 * j, c)).norm();
  return sum / static_cast<double>(k * pred.cols());
}

LossAndGrad loss_and_grad(const LifterParams& params, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                          Loss loss, const DropoutMasks* masks) {
  if (inputs.cols() == 0) throw Error("invalid_argument", "empty batch");
  if (targets.rows() != params.config.output_width() || targets.cols() != inputs.cols())
    throw Error("shape_mismatch", "target batch has the wrong shape");
  const ForwardCache c = run_forward(params, inputs, masks);
  LossAndGrad out;
  out.loss = batch_loss(c.pred, targets, loss);
  if (!std::isfinite(out.loss)) throw Error("non_finite_loss", "batch loss is not finite");

  const auto& t = params.tensors;
  out.grad.resize(t.size());
  auto relu_back = [&](Eigen::MatrixXd& d, int layer) {
    d.array() *= (c.pre[static_cast<std::size_t>(layer)].array() > 0.0).cast<double>();
    if (masks != nullptr) d.array() *= masks->hidden[static_cast<std::size_t>(layer)].array();
  };

  const Eigen::MatrixXd dpred = loss_gradient(c.pred, targets, loss);
  const Eigen::MatrixXd dout = (dpred.array().colwise() * params.output_scale.array()).matrix();
  const std::size_t out_i = t.size() - 2;
  out.grad[out_i].noalias() = dout * c.trunk.transpose();
  out.grad[out_i + 1] = dout.rowwise().sum();
  Eigen::MatrixXd da;
  da.noalias() = t[out_i].transpose() * dout;

  for (int b = params.config.num_blocks - 1; b >= 0; --b) {
    const std::size_t ti = 2 + 4 * static_cast<std::size_t>(b);
    const int l1 = 1 + 2 * b;
    const int l2 = l1 + 1;
    Eigen::MatrixXd dz2 = da;
    relu_back(dz2, l2);
    out.grad[ti + 2].noalias() = dz2 * c.post[static_cast<std::size_t>(l1)].transpose();
    out.grad[ti + 3] = dz2.rowwise().sum();
    Eigen::MatrixXd dz1;
    dz1.noalias() = t[ti + 2].transpose() * dz2;
    relu_back(dz1, l1);
    out.grad[ti].noalias() = dz1 * c.block_in[static_cast<std::size_t>(b)].transpose();
    out.grad[ti + 1] = dz1.rowwise().sum();
    da.noalias() += t[ti].transpose() * dz1;
  }

  Eigen::MatrixXd dz0 = da;
  relu_back(dz0, 0);
  out.grad[0].noalias() = dz0 * c.xn.transpose();
  out.grad[1] = dz0.rowwise().sum();
  return out;
}

std::vector<bool> activation_pattern(const LifterParams& params, const Eigen::MatrixXd& inputs,
                                     const DropoutMasks* masks) {
  const ForwardCache c = run_forward(params, inputs, masks);
  std::vector<bool> pattern;
  for (const auto& z : c.pre)
    for (Eigen::Index i = 0; i < z.size(); ++i) pattern.push_back(z.data()[i] > 0.0);
  return pattern;
}

void fit_standardization(LifterParams& params, const Dataset& data) {
  if (data.size() < 1) throw Error("invalid_argument", "cannot fit standardization on an empty dataset");
  auto fit = [](const Eigen::MatrixXd& m, Eigen::VectorXd& mean, Eigen::VectorXd& scale) {
    mean = m.rowwise().mean();
    const Eigen::MatrixXd centered = m.colwise() - mean;
    scale = (centered.array().square().rowwise().sum() / static_cast<double>(m.cols())).sqrt();
    for (Eigen::Index i = 0; i < scale.size(); ++i) {
      if (scale[i] < 1e-9) scale[i] = 1.0;
    }
  };
  fit(data.inputs, params.input_mean, params.input_scale);
  fit(data.targets, params.output_mean, params.output_scale);
}

TrainResult train(const Dataset& data, const LifterConfig& cfg, const TrainConfig& tcfg) {
  cfg.validate();
  tcfg.validate();
  if (data.size() < 1) throw Error("invalid_argument", "training split is empty");
  if (data.inputs.rows() != cfg.input_width() || data.targets.rows() != cfg.output_width() ||
      data.targets.cols() != data.inputs.cols())
    throw Error("shape_mismatch", "training data does not match the lifter config");

  TrainResult r;
  r.params = init_params(cfg, tcfg.seed);
  fit_standardization(r.params, data);
  std::mt19937_64 rng(tcfg.seed ^ 0xA5A5A5A5DEADBEEFULL);

  const int n = data.size();
  const int hist_n = std::min(n, tcfg.history_samples);
  const Eigen::MatrixXd hist_x = data.inputs.leftCols(hist_n);
  const Eigen::MatrixXd hist_y = data.targets.leftCols(hist_n);
  auto eval_loss = [&] { return batch_loss(forward_masked(r.params, hist_x, nullptr), hist_y, tcfg.loss); };

  r.initial_loss = eval_loss();
  if (!std::isfinite(r.initial_loss)) throw Error("non_finite_loss", "initial loss is not finite");

  std::vector<Eigen::MatrixXd> velocity;
  for (const auto& t : r.params.tensors) velocity.push_back(Eigen::MatrixXd::Zero(t.rows(), t.cols()));

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  // The loss is in mm; dividing by the target scale expresses the learning
  // rate in standardized units so one value works across datasets.
  const double target_scale = r.params.output_scale.mean();
  double lr = tcfg.learning_rate / (tcfg.loss == Loss::MSE ? target_scale * target_scale : target_scale);
  int over = 0;
  Eigen::MatrixXd bx, by;
  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += tcfg.batch_size) {
      const int b = std::min(tcfg.batch_size, n - start);
      bx.resize(data.inputs.rows(), b);
      by.resize(data.targets.rows(), b);
      for (int i = 0; i < b; ++i) {
        bx.col(i) = data.inputs.col(order[static_cast<std::size_t>(start + i)]);
        by.col(i) = data.targets.col(order[static_cast<std::size_t>(start + i)]);
      }
      const DropoutMasks masks = sample_masks(cfg, b, rng);
      const LossAndGrad lg = loss_and_grad(r.params, bx, by, tcfg.loss, &masks);
      for (std::size_t i = 0; i < velocity.size(); ++i) {
        velocity[i] = tcfg.momentum * velocity[i] - lr * lg.grad[i];
        r.params.tensors[i] += velocity[i];
      }
    }
    const double loss = eval_loss();
    if (!std::isfinite(loss)) throw Error("diverged", "training loss became non-finite at epoch " + std::to_string(epoch));
    r.history.push_back(loss);
    over = loss > 10.0 * r.initial_loss ? over + 1 : 0;
    if (over >= 3)
      throw Error("diverged", "training loss exceeded 10x its initial value for 3 consecutive epochs (epoch " +
                                  std::to_string(epoch) + ")");
    lr *= tcfg.lr_decay;
  }
  return r;
}

void save_params(const LifterParams& params, const std::filesystem::path& path) {
  nlohmann::json header;
  header["format_version"] = kFormatVersion;
  header["config"] = config_to_json(params.config);
  nlohmann::json shapes = nlohmann::json::array();
  for (const auto& t : params.tensors) shapes.push_back({t.rows(), t.cols()});
  header["tensor_shapes"] = shapes;
  header["standardization_length"] = {params.input_mean.size(), params.output_mean.size()};
  const std::string hs = header.dump();

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("io_error", "cannot open " + tmp + " for writing");
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t version = kFormatVersion;
    const std::uint64_t len = hs.size();
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto* v : {&params.input_mean, &params.input_scale, &params.output_mean, &params.output_scale})
      write_raw(out, v->data(), static_cast<std::size_t>(v->size()));
    for (const auto& t : params.tensors) write_raw(out, t.data(), static_cast<std::size_t>(t.size()));
    if (!out) throw Error("io_error", "failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

LifterParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error("invalid_checkpoint", path.string() + " is not a lifter checkpoint");
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in) throw Error("invalid_checkpoint", "checkpoint is truncated");
  if (version != kFormatVersion) throw Error("invalid_checkpoint", "unsupported checkpoint version " + std::to_string(version));
  if (len > (1u << 24)) throw Error("invalid_checkpoint", "checkpoint header is implausibly large");
  std::string hs(len, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(len));
  if (static_cast<std::uint64_t>(in.gcount()) != len) throw Error("invalid_checkpoint", "checkpoint is truncated");

  LifterParams p;
  std::vector<std::pair<int, int>> shapes;
  try {
    const auto header = nlohmann::json::parse(hs);
    p.config = config_from_json(header.at("config"));
    for (const auto& s : header.at("tensor_shapes")) shapes.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid_checkpoint", std::string("bad checkpoint header: ") + e.what());
  }
  p.config.validate();
  if (shapes != tensor_shapes(p.config)) throw Error("invalid_checkpoint", "tensor shapes do not match the stored config");

  const auto in_w = p.config.input_width();
  const auto out_w = p.config.output_width();
  p.input_mean.resize(in_w);
  p.input_scale.resize(in_w);
  p.output_mean.resize(out_w);
  p.output_scale.resize(out_w);
  for (auto* v : {&p.input_mean, &p.input_scale, &p.output_mean, &p.output_scale})
    read_raw(in, v->data(), static_cast<std::size_t>(v->size()));
  for (const auto& [rows, cols] : shapes) {
    Eigen::MatrixXd m(rows, cols);
    read_raw(in, m.data(), static_cast<std::size_t>(m.size()));
    p.tensors.push_back(std::move(m));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw Error("invalid_checkpoint", "trailing bytes after checkpoint data");
  if (!p.all_finite()) throw Error("invalid_checkpoint", "checkpoint holds non-finite values");
  return p;
}

LifterParams load_params(const std::filesystem::path& path, const LifterConfig& expected) {
  LifterParams p = load_params(path);
  if (!(p.config == expected))
    throw Error("config_mismatch", "checkpoint config (" + std::string(to_string(p.config.input_mode)) + ", K=" +
                                       std::to_string(p.config.joints) + ") differs from the expected config");
  return p;
}

}  // namespace auglift::lifter
