// auglift: command-line front end.
//
//   auglift generate --config exp.json --out data/ [--seed S]
//   auglift augment  --input data/test_ood --config auglift.json --out aug.jsonl [--rescaling on|off] [--reference data/train]
//   auglift train    --config exp.json --out model/ --variant XYCD [--rescaling on] [--seed S] [--data data/]
//   auglift eval     --config exp.json --model model/ [--out metrics.json] [--data data/]
//   auglift ablate   --config exp.json --out run/ [--threads N] [--seed S] [--data data/]
//   auglift report   --run run/
//
// Results go to stdout as JSON. Failures exit nonzero with one JSON object
// {"error": code, "message": text} on stderr.

#include "auglift/harness.hpp"
#include "auglift/interchange.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace auglift;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void emit_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << std::endl;
}

harness::RescalingArm parse_arm(const std::string& s) {
  if (s == "on") return harness::RescalingArm::On;
  if (s == "off") return harness::RescalingArm::Off;
  throw Error("usage_error", "--rescaling must be 'on' or 'off'");
}

// A single --seed replaces the config's seed list.
void apply_seed(harness::ExperimentConfig& cfg, const std::optional<std::uint64_t>& seed) {
  if (seed) cfg.seeds = {*seed};
}

harness::SplitData obtain_split(const harness::ExperimentConfig& cfg, const std::string& name,
                                const std::optional<fs::path>& data_dir) {
  return data_dir ? harness::load_split(*data_dir / name, cfg.auglift.radius)
                  : harness::generate_split(cfg.split(name), cfg.auglift.radius);
}

int cmd_generate(const fs::path& config, const fs::path& out, std::optional<std::uint64_t> seed) {
  auto cfg = harness::load_config(config);
  if (seed) {
    // Re-key every split from one master seed, keeping them distinct.
    for (std::size_t i = 0; i < cfg.splits.size(); ++i) cfg.splits[i].scene.seed = synth::derive_seed(*seed, i);
    cfg.validate();
  }
  json written = json::object();
  for (const auto& s : cfg.splits) {
    harness::write_split(s, out / s.name);
    written[s.name] = s.n_samples;
  }
  io::write_text_file(out / "config.json", harness::config_to_json(cfg));
  std::cout << json{{"out", out.string()}, {"frames", written}}.dump() << std::endl;
  return 0;
}

int cmd_augment(const fs::path& input, const fs::path& config, const fs::path& out, const std::string& rescaling,
                const std::optional<fs::path>& reference) {
  const auto j = json::parse(io::read_text_file(config), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error("schema_error", "augment config must be a JSON object");
  AugLiftConfig cfg;
  try {
    cfg.radius = j.value("radius", cfg.radius);
    cfg.d_max = j.value("d_max", cfg.d_max);
    cfg.clip_lower = j.value("clip_lower", cfg.clip_lower);
    cfg.mean_box_size = j.value("mean_box_size", cfg.mean_box_size);
  } catch (const json::exception& e) {
    throw Error("schema_error", std::string("augment config: ") + e.what());
  }
  cfg.rescaling_enabled = parse_arm(rescaling) == harness::RescalingArm::On;
  if (reference) {
    std::vector<Pose2D> poses;
    for (const auto& d : io::read_detections(*reference / "detections.jsonl")) poses.push_back(d.pose);
    cfg.mean_box_size = compute_mean_box_size(poses);
  }
  const auto summary = harness::run_augment(input, cfg, out);
  for (const auto& e : summary.errors) std::cerr << e << '\n';
  std::cout << json{{"written", summary.written}, {"skipped", summary.skipped}, {"mean_box_size", cfg.mean_box_size}}.dump()
            << std::endl;
  return 0;
}

int cmd_train(const fs::path& config, const fs::path& out, const std::string& variant, const std::string& rescaling,
              std::optional<std::uint64_t> seed, const std::optional<fs::path>& data_dir) {
  auto cfg = harness::load_config(config);
  const auto mode = lifter::input_mode_from_string(variant);
  const auto arm = parse_arm(rescaling);
  const auto train_split = obtain_split(cfg, "train", data_dir);
  AugLiftConfig auglift = cfg.auglift;
  auglift.mean_box_size = harness::fit_mean_box_size(train_split);
  const auto data = harness::build_dataset(train_split, mode, arm, auglift, cfg.od);

  lifter::LifterConfig lc = cfg.lifter;
  lc.input_mode = mode;
  lc.joints = train_split.detections.front().joint_count();
  lifter::TrainConfig tc = cfg.train;
  tc.seed = seed.value_or(cfg.seeds.front());
  const auto result = lifter::train(data, lc, tc);

  fs::create_directories(out);
  lifter::save_params(result.params, out / "checkpoint.bin");
  const json model = {{"variant", std::string(lifter::to_string(mode))},
                      {"rescaling", harness::to_string(arm)},
                      {"seed", tc.seed},
                      {"mean_box_size", auglift.mean_box_size},
                      {"history", result.history}};
  io::write_text_file(out / "model.json", model.dump(2));
  std::cout << json{{"checkpoint", (out / "checkpoint.bin").string()},
                    {"final_loss", result.history.empty() ? json(nullptr) : json(result.history.back())}}
                   .dump()
            << std::endl;
  return 0;
}

int cmd_eval(const fs::path& config, const fs::path& model_dir, const std::optional<fs::path>& out,
             const std::optional<fs::path>& data_dir) {
  const auto cfg = harness::load_config(config);
  const auto model = json::parse(io::read_text_file(model_dir / "model.json"), nullptr, false);
  if (model.is_discarded() || !model.contains("variant") || !model.contains("rescaling") || !model.contains("mean_box_size"))
    throw Error("schema_error", "model.json must carry variant, rescaling and mean_box_size");
  const auto mode = lifter::input_mode_from_string(model["variant"].get<std::string>());
  const auto arm = parse_arm(model["rescaling"].get<std::string>());
  const auto params = lifter::load_params(model_dir / "checkpoint.bin");
  if (params.config.input_mode != mode) throw Error("shape_mismatch", "checkpoint input mode disagrees with model.json");

  AugLiftConfig auglift = cfg.auglift;
  auglift.mean_box_size = model["mean_box_size"].get<double>();
  json result = json::object();
  for (const auto& s : cfg.splits) {
    if (s.name == "train") continue;
    const auto split = obtain_split(cfg, s.name, data_dir);
    const auto data = harness::build_dataset(split, mode, arm, auglift, cfg.od);
    result[s.name] = json::parse(harness::metric_report_json(harness::evaluate_split(params, data)));
  }
  if (out) io::write_text_file(*out, result.dump(2));
  std::cout << result.dump() << std::endl;
  return 0;
}

int cmd_ablate(const fs::path& config, const fs::path& out, int threads, std::optional<std::uint64_t> seed,
               const std::optional<fs::path>& data_dir) {
  auto cfg = harness::load_config(config);
  apply_seed(cfg, seed);
  harness::AblationOptions opts;
  opts.threads = threads;
  opts.data_dir = data_dir;
  harness::run_ablation(cfg, out, opts);
  std::cout << harness::render_report_dir(out).text;
  return 0;
}

int cmd_report(const fs::path& run) {
  const auto rep = harness::render_report_dir(run);
  io::write_text_file(run / "report.txt", rep.text);
  io::write_text_file(run / "report.csv", rep.csv);
  std::cout << rep.text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AugLift feature construction, synthetic data and lifter experiments"};
  app.require_subcommand(1);

  std::string config, out, input, model, run, variant = "XYCD", rescaling = "on";
  std::optional<std::string> reference, data, metrics_out;
  std::optional<std::uint64_t> seed;
  int threads = 1;

  auto* gen = app.add_subcommand("generate", "Render synthetic splits to interchange files");
  gen->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--seed", seed, "Master seed; re-keys every split");

  auto* aug = app.add_subcommand("augment", "Build augmented features for a split directory");
  aug->add_option("--input", input, "Split directory with detections.jsonl and depth/")->required()->check(CLI::ExistingDirectory);
  aug->add_option("--config", config, "Feature config (JSON)")->required()->check(CLI::ExistingFile);
  aug->add_option("--out", out, "Output JSONL")->required();
  aug->add_option("--rescaling", rescaling, "on|off");
  aug->add_option("--reference", reference, "Split whose detections define the mean box size");

  auto* tr = app.add_subcommand("train", "Train one lifter");
  tr->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", out, "Model directory")->required();
  tr->add_option("--variant", variant, "XY|XYC|XYCD|XY+OD3");
  tr->add_option("--rescaling", rescaling, "on|off");
  tr->add_option("--seed", seed, "Training seed");
  tr->add_option("--threads", threads, "Unused; accepted for symmetry");
  tr->add_option("--data", data, "Pre-generated split directory");

  auto* ev = app.add_subcommand("eval", "Evaluate a trained lifter on the evaluation splits");
  ev->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  ev->add_option("--model", model, "Model directory written by train")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--out", metrics_out, "Metrics JSON");
  ev->add_option("--data", data, "Pre-generated split directory");

  auto* ab = app.add_subcommand("ablate", "Run the variant x rescaling x seed grid");
  ab->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  ab->add_option("--out", out, "Run directory")->required();
  ab->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  ab->add_option("--seed", seed, "Single seed replacing the config's list");
  ab->add_option("--data", data, "Pre-generated split directory");

  auto* rep = app.add_subcommand("report", "Re-render report.txt and report.csv from a run record");
  rep->add_option("--run", run, "Run directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage_error", e.what());
    return kExitUsage;
  }

  const auto opt_path = [](const std::optional<std::string>& s) -> std::optional<fs::path> {
    if (s) return fs::path(*s);
    return std::nullopt;
  };

  try {
    if (gen->parsed()) return cmd_generate(config, out, seed);
    if (aug->parsed()) return cmd_augment(input, config, out, rescaling, opt_path(reference));
    if (tr->parsed()) return cmd_train(config, out, variant, rescaling, seed, opt_path(data));
    if (ev->parsed()) return cmd_eval(config, model, opt_path(metrics_out), opt_path(data));
    if (ab->parsed()) return cmd_ablate(config, out, threads, seed, opt_path(data));
    if (rep->parsed()) return cmd_report(run);
  } catch (const Error& e) {
    emit_error(e.code(), e.what());
    return e.code() == "usage_error" ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    emit_error("internal_error", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
