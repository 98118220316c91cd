#include "ecgssl/config.hpp"
#include "ecgssl/corpus.hpp"
#include "ecgssl/errors.hpp"
#include "ecgssl/model_io.hpp"
#include "ecgssl/recording_io.hpp"
#include "ecgssl/reports.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ecgssl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ecgssl_test_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

signal::RawRecording small_recording() {
  signal::RawRecording r;
  r.samples = Eigen::VectorXd::LinSpaced(50, -1.0, 1.0);
  r.samples[3] = 0.1;
  r.samples[7] = 1.0 / 3.0;
  r.sample_rate_hz = 512.0;
  r.subject_id = "S07";
  r.condition = "rest";
  r.condition_labels = {{"arousal", 3.5}, {"valence", 6.0}};
  return r;
}

template <class Net>
void check_same_parameters(Net a, Net b) {
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].name == pb[i].name);
    CHECK(pa[i].trainable == pb[i].trainable);
    CHECK(*pa[i].tensor == *pb[i].tensor);
  }
}

std::string saved(const models::PretextNetwork<float>& net) {
  std::ostringstream out(std::ios::binary);
  models::save_model(out, net);
  return out.str();
}

}  // namespace

TEST_CASE("recording CSV round trip") {
  const auto r = small_recording();
  std::stringstream buf;
  io::write_recording_csv(buf, r);
  const auto back = io::read_recording_csv(buf);
  CHECK(back.samples == r.samples);
  CHECK(back.sample_rate_hz == r.sample_rate_hz);
  CHECK(back.subject_id == "S07");
  CHECK(back.condition == "rest");
  CHECK(back.condition_labels == r.condition_labels);
}

TEST_CASE("recording CSV rejects malformed input") {
  const std::string header = "subject,condition,score_arousal,score_valence,score_stress,sample_rate_hz\n";
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return io::read_recording_csv(in);
  };
  CHECK_NOTHROW(parse(header + "S1,a,1,2,3,256\n0.5\n-0.5\n"));
  CHECK_THROWS_AS(parse("wrong,header\nS1,a,1,2,3,256\n0.5\n"), FormatError);
  CHECK_THROWS_AS(parse(header), FormatError);
  CHECK_THROWS_AS(parse(header + "S1,a,1,2,256\n0.5\n"), FormatError);
  CHECK_THROWS_AS(parse(header + "S1,a,1,2,3,256\n0.5\nabc\n"), FormatError);
  CHECK_THROWS_AS(parse(header + "S1,a,1,2,3,256\n"), ValidationError);
  CHECK_THROWS_AS(parse(header + "S1,a,12,2,3,256\n0.5\n"), ValidationError);
  CHECK_THROWS_AS(parse(header + "S1,a,1,2,3,0\n0.5\n"), ParameterError);
  CHECK_THROWS_AS(parse(header + "S1,a,1,2,3,256\nnan\n"), ValidationError);
  try {
    parse(header + "S1,a,1,2,3,256\n0.5\nabc\n");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find(":4:") != std::string::npos);
  }
}

TEST_CASE("dataset manifest round trip and loader dispatch") {
  const auto dir = scratch_dir("manifest");
  corpus::SynthOptions o;
  o.count = 4;
  o.duration_s = 12.0;
  const auto recs = corpus::synthesize_recordings(o);
  io::write_dataset(dir, recs);
  CHECK(fs::exists(dir / "manifest.csv"));
  for (const auto& source : {dir, dir / "manifest.csv"}) {
    const auto back = io::load_recordings(source);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(back[i].subject_id == recs[i].subject_id);
      CHECK(back[i].sample_rate_hz == recs[i].sample_rate_hz);
      CHECK(back[i].condition_labels.size() == 3);
      // float32 storage
      CHECK((back[i].samples - recs[i].samples).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
  const auto csv_dir = scratch_dir("csvs");
  for (const auto& name : {"b.csv", "a.csv"}) {
    auto r = small_recording();
    r.subject_id = std::string(name).substr(0, 1);
    std::ofstream out(csv_dir / name);
    io::write_recording_csv(out, r);
  }
  const auto loaded = io::load_recordings(csv_dir);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].subject_id == "a");
  CHECK(io::load_recordings(csv_dir / "b.csv")[0].subject_id == "b");
  CHECK_THROWS_AS(io::load_recordings(dir / "missing"), FormatError);
  CHECK_THROWS_AS(io::load_recordings(scratch_dir("empty")), FormatError);
}

TEST_CASE("f32 files are raw little-endian floats") {
  const auto dir = scratch_dir("f32");
  Eigen::VectorXd v(3);
  v << 1.0, -2.0, 0.5;
  io::write_f32le(dir / "x.f32", v);
  CHECK(fs::file_size(dir / "x.f32") == 12);
  std::ifstream in(dir / "x.f32", std::ios::binary);
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  // 1.0f = 0x3f800000
  CHECK(bytes[0] == 0x00);
  CHECK(bytes[1] == 0x00);
  CHECK(bytes[2] == 0x80);
  CHECK(bytes[3] == 0x3f);
  CHECK(io::read_f32le(dir / "x.f32") == v);
  std::ofstream(dir / "bad.f32", std::ios::binary) << "abc";
  CHECK_THROWS_AS(io::read_f32le(dir / "bad.f32"), FormatError);
}

TEST_CASE("model container round trip is bit-exact") {
  models::ArchitectureSpec two_unit;
  two_unit.pretext_head_units = 2;
  const auto pretext = models::PretextNetwork<float>::build(two_unit, 9);
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  models::save_model(buf, pretext);
  const auto back = models::load_pretext_model(buf);
  CHECK(back.arch.input_length == pretext.arch.input_length);
  CHECK(back.arch.pretext_head_units == 2);
  check_same_parameters(pretext, back);

  auto emotion = models::EmotionNetwork<float>::with_trunk(
      {}, models::transfer_weights(pretext.trunk, pretext.arch, models::ArchitectureSpec{}), 3);
  const auto dir = scratch_dir("model");
  models::save_model(dir / "e.bin", emotion);
  const auto eback = models::load_emotion_model(dir / "e.bin");
  CHECK(eback.trunk.frozen());
  check_same_parameters(emotion, eback);
  CHECK_THROWS_AS(models::load_pretext_model(dir / "e.bin"), FormatError);
}

TEST_CASE("model container layout and rejection") {
  const auto net = models::PretextNetwork<float>::build({}, 1);
  const auto bytes = saved(net);
  REQUIRE(bytes.size() > 16);
  CHECK(bytes.substr(0, 8) == std::string("ECGSSLM\0", 8));
  CHECK(static_cast<unsigned char>(bytes[8]) == 1);
  std::uint32_t manifest_len = 0;
  for (int i = 0; i < 4; ++i) manifest_len |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[12 + i])) << (8 * i);
  const auto manifest = nlohmann::json::parse(bytes.substr(16, manifest_len));
  CHECK(manifest["architecture"] == "pretext");
  CHECK(manifest["format_version"] == 1);
  std::size_t floats = 0;
  for (const auto& a : manifest["arrays"]) floats += a["count"].get<std::size_t>();
  CHECK(bytes.size() == 16 + manifest_len + 4 * floats);

  auto load = [](std::string b) {
    std::istringstream in(b, std::ios::binary);
    return models::load_pretext_model(in);
  };
  auto newer = bytes;
  newer[8] = 2;
  try {
    load(newer);
    FAIL("newer version accepted");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("newer") != std::string::npos);
  }
  auto zero = bytes;
  zero[8] = 0;
  CHECK_THROWS_AS(load(zero), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(load(magic), FormatError);
  CHECK_THROWS_AS(load(bytes.substr(0, 10)), FormatError);
  CHECK_THROWS_AS(load(bytes.substr(0, bytes.size() - 4)), FormatError);
  CHECK_THROWS_AS(load(""), FormatError);
}

TEST_CASE("config set, echo and file round trip") {
  config::RunConfig c;
  config::set(c, "lr", "0.0005");
  config::set(c, "alphas", "1,2,1,1,1,1,1");
  config::set(c, "fold_unit", "subject");
  config::set(c, "supervised_baseline", "true");
  config::set(c, "noise_sigma_rel", "0.1");
  config::set(c, "targets", "arousal,stress");
  CHECK(c.train.lr == 0.0005);
  CHECK(c.train.alphas[1] == 2.0);
  CHECK(c.train.fold_unit == training::FoldUnit::Subject);
  CHECK(c.supervised_baseline);

  const auto text = config::echo(c);
  config::RunConfig d;
  std::istringstream in(text);
  config::apply_text(d, in);
  CHECK(config::echo(d) == text);
  CHECK(config::entries(d) == config::entries(c));

  std::istringstream with_comments("# comment\n\nseed = 9\n  batch_size=16  \n");
  config::apply_text(d, with_comments);
  CHECK(d.train.seed == 9);
  CHECK(d.train.batch_size == 16);
  CHECK(d.transform_params().rng_seed == 9);

  CHECK_THROWS_AS(config::set(c, "learning_rate", "0.1"), ParameterError);
  CHECK_THROWS_AS(config::set(c, "lr", "fast"), ParameterError);
  CHECK_THROWS_AS(config::set(c, "fold_unit", "patient"), ParameterError);
  CHECK_THROWS_AS(config::set(c, "format_version", "2"), FormatError);
  std::istringstream broken("seed 3\n");
  CHECK_THROWS_AS(config::apply_text(d, broken), ParameterError);
  config::set(c, "pretext_head_units", "3");
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("format_number round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-4, 256.0, -2.5}) {
    CHECK(std::stod(config::format_number(v)) == v);
  }
  CHECK(config::format_number(0.001) == "0.001");
  CHECK(config::format_number(32) == "32");
}

TEST_CASE("report and loss trace CSV schemas") {
  training::EvalReport r;
  r.kfolds = 2;
  r.targets = {"arousal"};
  training::Metrics m;
  m.accuracy = 0.75;
  m.f1 = 0.5;
  r.folds.push_back({0, "arousal", m, 8, 2});
  m.accuracy = 1.0;
  m.f1 = 1.0;
  r.folds.push_back({1, "arousal", m, 8, 2});
  std::ostringstream out;
  reports::write_report_csv(out, r);
  CHECK(out.str() == "fold,target,accuracy,f1\n1,arousal,0.75,0.5\n2,arousal,1,1\n");

  training::LossTrace t;
  t.task_loss = {std::vector<double>(7, 0.5), std::vector<double>(7, 0.25)};
  t.total_loss = {3.5, 1.75};
  std::ostringstream trace;
  reports::write_loss_trace_csv(trace, t);
  std::istringstream lines(trace.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "epoch,task_id,mean_loss");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 14);
  CHECK(trace.str().find("\n2,6,0.25\n") != std::string::npos);

  config::RunConfig c;
  const auto summary = nlohmann::json::parse(reports::summary_json(c, r, r, {"note"}));
  CHECK(summary["kfolds"] == 2);
  CHECK(summary["mean"]["arousal"]["accuracy"].get<double>() == doctest::Approx(0.875));
  CHECK(summary["baseline_mean"]["arousal"]["f1"].get<double>() == doctest::Approx(0.75));
  CHECK(summary["warnings"][0] == "note");
  CHECK(summary["config"]["lr"] == "0.001");
}
