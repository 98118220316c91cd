#include "ecgssl/commands.hpp"
#include "ecgssl/model_io.hpp"
#include "ecgssl/recording_io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

RunResult cli(std::initializer_list<std::string> args) {
  std::vector<std::string> owned = {"ecgssl"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::ostringstream out, err;
  RunResult r;
  r.code = ecgssl::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ecgssl_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Small corpus shared by the training commands: 4 recordings of 20 s, 8 segments.
const fs::path& tiny_data() {
  static const fs::path dir = [] {
    auto d = scratch("tiny_data");
    const auto r = cli({"--out", d.string(), "--no-timestamp", "--seed", "5", "synth", "--count", "4", "--duration", "20"});
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("synth writes a balanced, reproducible manifest") {
  const auto a = scratch("synth_a");
  const auto b = scratch("synth_b");
  for (const auto& dir : {a, b}) {
    const auto r = cli({"--out", dir.string(), "--no-timestamp", "--seed", "3", "synth", "--count", "20", "--duration", "12"});
    REQUIRE(r.code == 0);
  }
  const auto rows = lines(a / "manifest.csv");
  REQUIRE(rows.size() == 21);
  int low = 0, high = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    low += rows[i].find("low_hr") != std::string::npos;
    high += rows[i].find("high_hr") != std::string::npos;
  }
  CHECK(low == 10);
  CHECK(high == 10);
  CHECK(slurp(a / "manifest.csv") == slurp(b / "manifest.csv"));
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
  CHECK(fs::exists(a / "config.txt"));
  CHECK(ecgssl::io::load_recordings(a).size() == 20);
}

TEST_CASE("timestamped run directories do not collide") {
  const auto root = scratch("stamped");
  const auto r1 = cli({"--out", root.string(), "synth", "--count", "2", "--duration", "10"});
  const auto r2 = cli({"--out", root.string(), "synth", "--count", "2", "--duration", "10"});
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  int dirs = 0;
  for (const auto& e : fs::directory_iterator(root)) {
    dirs += e.is_directory();
    CHECK(e.path().filename().string().rfind("synth-", 0) == 0);
  }
  CHECK(dirs == 2);
  CHECK(r1.out.find("run directory: ") != std::string::npos);
}

TEST_CASE("transform writes one column per transformation") {
  const auto dir = scratch("transform");
  const auto r = cli({"--out", dir.string(), "--no-timestamp", "transform"});
  REQUIRE(r.code == 0);
  const auto rows = lines(dir / "transforms.csv");
  REQUIRE(rows.size() == 2561);
  CHECK(rows[0] == "sample,original,noise,scale,negate,hflip,permute,time_warp");
  const auto from_data = scratch("transform_data");
  CHECK(cli({"--out", from_data.string(), "--no-timestamp", "transform", "--data", tiny_data().string(), "--segment",
             "3"})
            .code == 0);
  CHECK(cli({"--out", from_data.string(), "--no-timestamp", "transform", "--data", tiny_data().string(), "--segment",
             "99"})
            .code != 0);
}

TEST_CASE("gradcheck passes and catches an injected sign error") {
  const auto dir = scratch("gradcheck");
  const auto ok = cli({"--out", dir.string(), "--no-timestamp", "gradcheck"});
  CHECK(ok.code == 0);
  const auto rows = lines(dir / "gradcheck.csv");
  REQUIRE(rows.size() > 1);
  CHECK(rows[0] == "check,max_rel_error,max_abs_error,entries,passed");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].ends_with(",true"));
  const auto bad = cli({"--out", dir.string(), "--no-timestamp", "gradcheck", "--inject-sign-error", "dense"});
  CHECK(bad.code != 0);
  CHECK(slurp(dir / "gradcheck.csv").find(",false") != std::string::npos);
}

TEST_CASE("pretrain writes a loadable model and a full loss trace") {
  const auto dir = scratch("pretrain");
  const auto r = cli({"--out", dir.string(), "--no-timestamp", "--set", "batch_size=14", "pretrain", "--data",
                      tiny_data().string(), "--epochs", "2"});
  REQUIRE(r.code == 0);
  const auto trace = lines(dir / "loss_trace.csv");
  CHECK(trace[0] == "epoch,task_id,mean_loss");
  CHECK(trace.size() == 1 + 7 * 2);
  const auto net = ecgssl::models::load_pretext_model(dir / "pretext_model.bin");
  CHECK(net.heads.size() == 7);
  CHECK(slurp(dir / "config.txt").find("pretext_epochs = 2\n") != std::string::npos);
}

TEST_CASE("train-eval writes reports for every fold and target") {
  const auto pre = scratch("train_eval_model");
  REQUIRE(cli({"--out", pre.string(), "--no-timestamp", "--set", "batch_size=14", "pretrain", "--data",
               tiny_data().string(), "--epochs", "1"})
              .code == 0);
  const auto dir = scratch("train_eval");
  const auto r = cli({"--out", dir.string(), "--no-timestamp", "--set", "kfolds=2", "--set", "emotion_epochs=2",
                      "train-eval", "--data", tiny_data().string(), "--model", (pre / "pretext_model.bin").string(),
                      "--supervised-baseline", "--targets", "arousal,stress"});
  REQUIRE(r.code == 0);
  const auto report = lines(dir / "report.csv");
  const auto baseline = lines(dir / "baseline_report.csv");
  CHECK(report.size() == 1 + 2 * 2);
  CHECK(report[0] == "fold,target,accuracy,f1");
  CHECK(baseline.size() == report.size());
  CHECK(baseline[0] == report[0]);
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "emotion_arousal.bin"));
  CHECK(fs::exists(dir / "emotion_stress.bin"));
  CHECK_FALSE(fs::exists(dir / "emotion_valence.bin"));
  CHECK_FALSE(fs::exists(dir / "pretext_model.bin"));
  const auto head = ecgssl::models::load_emotion_model(dir / "emotion_arousal.bin");
  CHECK(head.trunk.frozen());
}

TEST_CASE("bad input yields a nonzero exit and a message") {
  const auto dir = scratch("bad");
  const auto missing = cli({"--out", dir.string(), "--no-timestamp", "pretrain", "--data", (dir / "nowhere").string()});
  CHECK(missing.code != 0);
  CHECK(missing.err.find("error:") != std::string::npos);

  const auto garbled = scratch("garbled");
  fs::create_directories(garbled);
  std::ofstream(garbled / "x.csv") << "not,a,recording\n";
  CHECK(cli({"--out", dir.string(), "--no-timestamp", "pretrain", "--data", garbled.string()}).code != 0);

  CHECK(cli({"--out", dir.string(), "--set", "no_such_key=1", "synth"}).code == 2);
  CHECK(cli({"--out", dir.string(), "--set", "lr=-1", "gradcheck"}).code != 0);
  CHECK(cli({"--out", dir.string(), "--config", (dir / "missing.cfg").string(), "synth"}).code == 2);
  CHECK(cli({"frobnicate"}).code != 0);
  CHECK(cli({}).code != 0);
}

TEST_CASE("config file, --set and flags layer in order") {
  const auto dir = scratch("layers");
  fs::create_directories(dir);
  std::ofstream(dir / "run.cfg") << "seed = 11\nsynth_count = 6\nsynth_duration_s = 10\nlr = 0.01\n";
  const auto out = dir / "out";
  REQUIRE(cli({"--config", (dir / "run.cfg").string(), "--set", "synth_count=4", "--out", out.string(),
               "--no-timestamp", "synth", "--count", "2"})
              .code == 0);
  const auto echoed = slurp(out / "config.txt");
  CHECK(echoed.find("seed = 11\n") != std::string::npos);
  CHECK(echoed.find("synth_count = 2\n") != std::string::npos);
  CHECK(echoed.find("lr = 0.01\n") != std::string::npos);
  CHECK(lines(out / "manifest.csv").size() == 3);
}
