#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int status = 0;
  std::string out;
  std::string err;
};

Run run(const std::string& args) {
  const auto err_path = fs::temp_directory_path() / "auglift_cli_test_stderr.txt";
  const std::string cmd = std::string(AUGLIFT_CLI_PATH) + " " + args + " 2>" + err_path.string();
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) r.out += buf.data();
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream e(err_path);
  r.err.assign(std::istreambuf_iterator<char>(e), {});
  return r;
}

fs::path workdir() {
  const auto d = fs::temp_directory_path() / "auglift_cli_test";
  static bool cleaned = false;
  if (!cleaned) {
    fs::remove_all(d);
    cleaned = true;
  }
  fs::create_directories(d);
  return d;
}

fs::path write_config() {
  const auto path = workdir() / "exp.json";
  std::ofstream(path) << R"({
    "schema_version": 1,
    "scene_defaults": {"resolution": [160, 160], "focal": 150.0},
    "splits": {
      "train":    {"n_samples": 80, "seed": 21, "scene": {"camera_distance_range": [5.2, 6.1]}},
      "test_id":  {"n_samples": 20, "seed": 22, "scene": {"camera_distance_range": [5.2, 6.1]}},
      "test_ood": {"n_samples": 20, "seed": 23, "scene": {"camera_distance_range": [2.5, 4.0]}}
    },
    "lifter": {"hidden_width": 16, "num_blocks": 1},
    "train": {"learning_rate": 0.05, "epochs": 2},
    "variants": ["XY", "XYCD"],
    "rescaling": "on",
    "seeds": [1]
  })";
  return path;
}

json parse_error(const std::string& err) {
  const auto j = json::parse(err, nullptr, false);
  EXPECT_FALSE(j.is_discarded()) << err;
  return j;
}

}  // namespace

TEST(Cli, GenerateAugmentTrainEvalReport) {
  const auto cfg = write_config();
  const auto dir = workdir();
  auto r = run("generate --config " + cfg.string() + " --out " + (dir / "data").string());
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "data/train/detections.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "data/test_ood/depth/000019.pfm"));

  std::ofstream(dir / "aug.json") << R"({"radius": 3, "d_max": 2.0})";
  r = run("augment --input " + (dir / "data/test_ood").string() + " --config " + (dir / "aug.json").string() +
          " --reference " + (dir / "data/train").string() + " --out " + (dir / "aug.jsonl").string());
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["written"], 20);

  r = run("augment --input " + (dir / "data/test_ood").string() + " --config " + (dir / "aug.json").string() +
          " --out " + (dir / "aug2.jsonl").string());
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(parse_error(r.err)["error"], "invalid_config");

  r = run("train --config " + cfg.string() + " --out " + (dir / "model").string() + " --variant XYCD --seed 4 --data " +
          (dir / "data").string());
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "model/checkpoint.bin"));

  r = run("eval --config " + cfg.string() + " --model " + (dir / "model").string() + " --data " + (dir / "data").string());
  ASSERT_EQ(r.status, 0) << r.err;
  const auto m = json::parse(r.out);
  EXPECT_GT(m["test_ood"]["mpjpe"].get<double>(), 0.0);
  EXPECT_EQ(m["test_id"]["n_frames"], 20);

  r = run("ablate --config " + cfg.string() + " --out " + (dir / "run").string() + " --threads 2");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto before = r.out;
  r = run("report --run " + (dir / "run").string());
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, before);
}

TEST(Cli, ErrorsAreJsonOnStderr) {
  auto r = run("");
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(parse_error(r.err)["error"], "usage_error");

  r = run("train --config /nonexistent.json --out x");
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(parse_error(r.err)["error"], "usage_error");

  const auto bad = workdir() / "bad.json";
  std::ofstream(bad) << R"({"schema_version": 1, "splits": {}})";
  r = run("ablate --config " + bad.string() + " --out " + (workdir() / "never").string());
  EXPECT_EQ(r.status, 1);
  const auto e = parse_error(r.err);
  EXPECT_EQ(e["error"], "schema_error");
  EXPECT_FALSE(e["message"].get<std::string>().empty());

  r = run("train --config " + write_config().string() + " --out " + (workdir() / "m2").string() + " --rescaling maybe");
  EXPECT_EQ(r.status, 2);

  r = run("report --run " + workdir().string());
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(parse_error(r.err)["error"], "io_error");
}
