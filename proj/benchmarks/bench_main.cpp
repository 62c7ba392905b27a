// Microbenchmarks for the per-frame hot paths.

#include "auglift/lifter.hpp"
#include "auglift/metrics.hpp"
#include "auglift/pipeline.hpp"
#include "auglift/synth.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace auglift;

namespace {

synth::LabeledSample make_sample() {
  synth::SceneConfig cfg;
  cfg.seed = 11;
  return synth::generate_sample(cfg, 0);
}

void BM_SampleDepths(benchmark::State& state) {
  const auto s = make_sample();
  const int radius = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_depths(s.detection, s.depth, radius));
}
BENCHMARK(BM_SampleDepths)->DenseRange(0, 3);

void BM_AugmentFrame(benchmark::State& state) {
  const auto s = make_sample();
  AugLiftConfig cfg;
  cfg.mean_box_size = 60.0;
  for (auto _ : state) benchmark::DoNotOptimize(augment_frame(s.detection, s.depth, cfg));
}
BENCHMARK(BM_AugmentFrame);

void BM_GenerateSample(benchmark::State& state) {
  synth::SceneConfig cfg;
  cfg.seed = 5;
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synth::generate_sample(cfg, i++));
}
BENCHMARK(BM_GenerateSample)->Unit(benchmark::kMicrosecond);

lifter::LifterParams bench_params(int width) {
  lifter::LifterConfig cfg;
  cfg.hidden_width = width;
  cfg.num_blocks = 2;
  cfg.input_mode = lifter::InputMode::XYCD;
  return lifter::init_params(cfg, 3);
}

void BM_LifterForward(benchmark::State& state) {
  const auto p = bench_params(static_cast<int>(state.range(0)));
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(p.config.input_width(), 64);
  for (auto _ : state) benchmark::DoNotOptimize(lifter::forward(p, x, lifter::Phase::Eval));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_LifterForward)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);

void BM_LifterLossAndGrad(benchmark::State& state) {
  const auto p = bench_params(static_cast<int>(state.range(0)));
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(p.config.input_width(), 64);
  const Eigen::MatrixXd y = 100.0 * Eigen::MatrixXd::Random(p.config.output_width(), 64);
  std::mt19937_64 rng(1);
  const auto masks = lifter::sample_masks(p.config, 64, rng);
  for (auto _ : state) benchmark::DoNotOptimize(lifter::loss_and_grad(p, x, y, lifter::Loss::MSE, &masks));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_LifterLossAndGrad)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);

void BM_PMpjpe(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 300.0);
  Pose3D a, b;
  for (int j = 0; j < 17; ++j) {
    a.joints.emplace_back(n(rng), n(rng), n(rng));
    b.joints.emplace_back(n(rng), n(rng), n(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(metrics::p_mpjpe(a, b));
}
BENCHMARK(BM_PMpjpe);

}  // namespace

BENCHMARK_MAIN();
