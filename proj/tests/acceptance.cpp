// Acceptance run: one PASS/FAIL line per criterion, echoed to acceptance_report.txt.
// Pass criterion numbers as arguments to run a subset; criterion 9 needs
// ECGSSL_GATED_DATA. Exits nonzero on an aborted run, or on any FAIL with --strict.

#include "ecgssl/commands.hpp"
#include "ecgssl/corpus.hpp"
#include "ecgssl/model_io.hpp"
#include "ecgssl/nn/gradcheck.hpp"
#include "ecgssl/recording_io.hpp"
#include "ecgssl/training.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace ecgssl;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradcheckTolerance = 1e-4;
constexpr double kGradcheckBudgetS = 60.0;
constexpr int kOracleInstances = 200;
constexpr double kOracleTolerance = 1e-6;
constexpr double kOracleBudgetS = 30.0;
constexpr int kAlgebraSegments = 1000;
constexpr double kAlgebraBudgetS = 30.0;
constexpr double kPretextAccuracy = 0.90;
constexpr int kPretextMaxEpochs = 30;
constexpr double kPretextBudgetS = 15 * 60.0;
constexpr double kMonotoneSlack = 0.05;       // of the task's first-epoch loss
constexpr double kSteadyStateSpread = 1.2;    // max / min final task loss
constexpr double kTransferAccuracy = 0.90;
constexpr double kTransferBudgetS = 20 * 60.0;
constexpr double kReducedFraction = 0.01;

// Pretext run: 20 recordings of 100 s give 200 segments.
constexpr int kSynthRecordings = 20;
constexpr double kSynthSeconds = 100.0;
constexpr std::uint64_t kSeed = 1;
constexpr int kPretextEpochs = 18;
constexpr int kPretextBatch = 8;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  int criterion;
  bool pass;
  std::string detail;
};

std::vector<Verdict> verdicts;
std::ofstream report_file;

void emit(const std::string& line) {
  std::cout << line << std::endl;
  report_file << line << std::endl;
}

void report(int criterion, bool pass, const std::string& detail) {
  emit("criterion " + std::to_string(criterion) + ": " + (pass ? "PASS" : "FAIL") + "  " + detail);
  verdicts.push_back({criterion, pass, detail});
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ecgssl_acceptance_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<char> trunk_bytes(const models::Trunk<float>& trunk) {
  std::vector<char> out;
  for (const auto& block : trunk.blocks) {
    for (const auto& conv : block.convs) {
      for (const auto* t : {&conv.kernel, &conv.bias}) {
        const auto* p = reinterpret_cast<const char*>(t->flat().data());
        out.insert(out.end(), p, p + t->flat().size() * sizeof(float));
      }
    }
  }
  return out;
}

void criterion_gradcheck() {
  const auto t0 = Clock::now();
  nn::GradcheckOptions opts;
  opts.tolerance = kGradcheckTolerance;
  const auto results = nn::run_gradcheck_suite(opts);
  const double elapsed = seconds_since(t0);
  bool ok = !results.empty();
  double worst = 0.0;
  std::string failed;
  for (const auto& r : results) {
    ok = ok && r.passed && r.max_rel_error < kGradcheckTolerance;
    worst = std::max(worst, r.max_rel_error);
    if (!r.passed) failed += " " + r.name;
  }
  ok = ok && elapsed < kGradcheckBudgetS;
  report(1, ok,
         fmt("%.0f checks, max rel error %.2e (< %.0e), %.1f s", static_cast<double>(results.size()), worst,
             kGradcheckTolerance, elapsed) +
             (failed.empty() ? "" : ", failed:" + failed));
}

void criterion_oracles() {
  const auto t0 = Clock::now();
  const auto e = oracle::compare_with_library(kOracleInstances, 2024);
  const double elapsed = seconds_since(t0);
  const bool ok = e.conv <= kOracleTolerance && e.maxpool <= kOracleTolerance && e.dense <= kOracleTolerance &&
                  elapsed < kOracleBudgetS;
  report(2, ok,
         fmt("%.0f instances each; max |diff| conv %.2e, maxpool %.2e, dense %.2e", kOracleInstances, e.conv, e.maxpool,
             e.dense) +
             fmt(", %.1f s", elapsed));
}

void criterion_architecture() {
  using nn::Shape;
  const models::ArchitectureSpec arch;
  const std::vector<Shape> expected = {{2560, 1}, {2560, 32}, {1277, 32}, {1277, 64},
                                       {635, 64}, {635, 128}, {1, 128}};
  bool ok = arch.trunk_shape_trace() == expected;

  auto net = models::PretextNetwork<float>::build(arch, 1);
  models::TrunkCache<float> cache;
  const nn::Vector<float> x = signal::synth_ecg(70.0, 256.0, 10.0, 1).cast<float>();
  const auto features = models::trunk_forward(net.trunk, arch, x, &cache);
  std::vector<Shape> observed = {{x.size(), 1}};
  const auto& c = cache.conv_outputs;
  ok = ok && c.size() == 6 && cache.pools.size() == 2;
  if (ok) {
    observed.push_back({c[1].rows(), c[1].cols()});
    observed.push_back({cache.pools[0].output.rows(), cache.pools[0].output.cols()});
    observed.push_back({c[3].rows(), c[3].cols()});
    observed.push_back({cache.pools[1].output.rows(), cache.pools[1].output.cols()});
    observed.push_back({c[5].rows(), c[5].cols()});
    observed.push_back({1, features.size()});
    ok = observed == expected && c[0].rows() == 2560 && c[0].cols() == 32 && c[2].rows() == 1277 &&
         c[2].cols() == 64 && c[4].rows() == 635 && c[4].cols() == 128;
  }
  ok = ok && net.heads.size() == 7;
  const auto probs = models::pretext_probabilities(net, x, models::Mode::Inference, 0.0, 0, 0);
  ok = ok && probs.size() == 7;
  const auto emotion = models::EmotionNetwork<float>::build(arch, 1);
  ok = ok && emotion.head.layers[2].weights.shape() == nn::Shape{arch.emotion_hidden, 2};
  std::ostringstream trace;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    trace << (i ? " -> " : "") << observed[i][0] << "x" << observed[i][1];
  }
  report(3, ok, trace.str() + " -> 7 pretext heads, 2-way emotion head");
}

void criterion_transform_algebra() {
  const auto t0 = Clock::now();
  transforms::TransformParams params;
  std::uint64_t failures = 0;
  std::string first_failure;
  auto fail = [&](const std::string& what) {
    if (failures++ == 0) first_failure = what;
  };
  CounterRng rng(99);
  for (int i = 0; i < kAlgebraSegments; ++i) {
    const double hr = 50.0 + 60.0 * rng.uniform();
    const Eigen::VectorXd x = signal::synth_ecg(hr, 256.0, 10.0, 1000 + static_cast<std::uint64_t>(i));
    const auto seed = transforms::sample_seed(params.rng_seed, static_cast<std::size_t>(i), transforms::TransformId::Noise);
    if (transforms::negate(transforms::negate(x)) != x) fail("negate involution");
    if (transforms::hflip(transforms::hflip(x)) != x) fail("hflip involution");
    if (transforms::negate(transforms::hflip(x)) != transforms::hflip(transforms::negate(x))) fail("negate/hflip commute");
    const auto p = transforms::permute(x, params.permute_pieces, seed);
    Eigen::VectorXd a = x, b = p;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) fail("permute multiset");
    if (p == x) fail("permute identity");
    const auto s = transforms::scale(x, params.scale_factor);
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if ((s[k] > 0) != (x[k] > 0) || (s[k] < 0) != (x[k] < 0)) {
        fail("scale sign pattern");
        break;
      }
    }
    for (auto id : transforms::kAllTransforms) {
      const auto y1 = transforms::apply(id, x, params, seed);
      const auto y2 = transforms::apply(id, x, params, seed);
      if (y1 != y2) fail(std::string(transforms::name(id)) + " determinism");
      if (y1.size() != x.size()) fail(std::string(transforms::name(id)) + " length");
      if (id != transforms::TransformId::Original && y1 == x) fail(std::string(transforms::name(id)) + " unchanged");
    }
  }
  const double elapsed = seconds_since(t0);
  const bool ok = failures == 0 && elapsed < kAlgebraBudgetS;
  report(4, ok,
         fmt("%.0f segments, %.0f violations, %.1f s", kAlgebraSegments, static_cast<double>(failures), elapsed) +
             (first_failure.empty() ? "" : " (first: " + first_failure + ")"));
}

struct PretextRun {
  training::LabeledCorpus corpus;
  std::optional<models::PretextNetwork<float>> net;
  training::LossTrace trace;
  std::vector<double> held_out_accuracy;
  double seconds = 0.0;
};

// Synthesizes through the CLI, trains on 80% of the segments, scores the rest each epoch.
PretextRun run_pretext() {
  PretextRun run;
  const auto data = scratch("synth");
  cli::Invocation inv;
  inv.config.train.seed = kSeed;
  inv.config.synth.count = kSynthRecordings;
  inv.config.synth.duration_s = kSynthSeconds;
  inv.out_root = data;
  inv.timestamp = false;
  const auto synth = cli::cmd_synth(inv);
  if (synth.exit_code != 0) throw std::runtime_error("synth failed: " + synth.message);
  run.corpus = corpus::build_corpus(io::load_recordings(data));
  run.corpus.canonicalize();

  const auto split = training::kfold_split(run.corpus.segments.size(), 5, kSeed)[0];
  std::vector<signal::EcgSegment> train, held_out;
  for (auto i : split.train) train.push_back(run.corpus.segments[i]);
  for (auto i : split.test) held_out.push_back(run.corpus.segments[i]);
  transforms::TransformParams params;
  params.rng_seed = kSeed;
  const auto train_samples = transforms::build_pretext_dataset(train, params);
  params.rng_seed = kSeed + 1;
  const auto test_samples = transforms::build_pretext_dataset(held_out, params);

  training::TrainConfig cfg;
  cfg.seed = kSeed;
  cfg.pretext_epochs = kPretextEpochs;
  cfg.batch_size = kPretextBatch;
  auto net = models::PretextNetwork<float>::build({}, training::derive_seed(kSeed, {0}));
  const auto t0 = Clock::now();
  double scoring = 0.0;
  run.trace = training::train_pretext(net, train_samples, cfg, {}, [&](int epoch, const training::LossTrace& t) {
    const auto s0 = Clock::now();
    run.held_out_accuracy.push_back(training::pretext_accuracy(net, test_samples));
    scoring += seconds_since(s0);
    std::cout << "  pretext epoch " << epoch + 1 << " loss " << t.total_loss.back() << " held-out accuracy "
              << run.held_out_accuracy.back() << std::endl;
  });
  run.seconds = seconds_since(t0) - scoring;
  run.net = std::move(net);
  std::cout << "  " << train.size() << " training / " << held_out.size() << " held-out segments, "
            << train_samples.size() << " pretext samples" << std::endl;
  return run;
}

void criterion_pretext(const PretextRun& run) {
  const double acc = run.held_out_accuracy.empty() ? 0.0 : run.held_out_accuracy.back();
  const bool ok = run.corpus.segments.size() == 200 && kPretextEpochs <= kPretextMaxEpochs && acc >= kPretextAccuracy &&
                  run.seconds < kPretextBudgetS;
  report(5, ok,
         fmt("%.0f segments, %.0f epochs, held-out 7-way accuracy %.3f (>= %.2f)",
             static_cast<double>(run.corpus.segments.size()), kPretextEpochs, acc, kPretextAccuracy) +
             fmt(", training %.0f s (< %.0f s)", run.seconds, kPretextBudgetS));
}

void criterion_loss_shape(const PretextRun& run) {
  const auto& tl = run.trace.task_loss;
  bool monotone = tl.size() >= 2;
  std::string worst;
  double worst_excess = 0.0;
  for (std::size_t j = 0; monotone && j < tl[0].size(); ++j) {
    const double slack = kMonotoneSlack * tl[0][j];
    for (std::size_t e = 0; e + 1 < tl.size(); ++e) {
      const double excess = tl[e + 1][j] - tl[e][j] - slack;
      if (excess > worst_excess) {
        worst_excess = excess;
        worst = fmt("task %.0f epoch %.0f->%.0f", static_cast<double>(j), static_cast<double>(e + 1),
                    static_cast<double>(e + 2));
      }
    }
  }
  monotone = monotone && worst_excess <= 0.0;
  double lo = 0.0, hi = 0.0;
  if (!tl.empty()) {
    lo = *std::min_element(tl.back().begin(), tl.back().end());
    hi = *std::max_element(tl.back().begin(), tl.back().end());
  }
  const bool distinct = hi >= kSteadyStateSpread * lo && hi > 0.0;
  std::ostringstream finals;
  for (std::size_t j = 0; !tl.empty() && j < tl.back().size(); ++j) finals << (j ? "," : "") << fmt("%.4f", tl.back()[j]);
  report(6, monotone && distinct,
         std::string(monotone ? "non-increasing within slack" : "rise beyond slack at " + worst) +
             fmt(" (slack %.0f%% of first-epoch loss); final task losses [", kMonotoneSlack * 100) + finals.str() +
             fmt("], max/min %.1f (>= %.1f)", lo > 0 ? hi / lo : 0.0, kSteadyStateSpread));
}

void criterion_transfer(const PretextRun& run) {
  const auto t0 = Clock::now();
  const auto& pretrained = *run.net;
  const auto before = trunk_bytes(pretrained.trunk);

  training::TrainConfig cfg;
  cfg.seed = kSeed;
  training::ExperimentOptions opts;
  opts.pretrained = &pretrained;
  opts.fit_final_models = true;
  const auto full = training::run_cv_experiment(run.corpus, cfg, {}, opts);
  bool unchanged = trunk_bytes(pretrained.trunk) == before;
  for (const auto& [target, model] : full.final_models) unchanged = unchanged && trunk_bytes(model.trunk) == before;
  double mean_acc = 0.0;
  for (const auto& t : full.report.targets) mean_acc += full.report.mean(t).accuracy;
  mean_acc /= static_cast<double>(std::max<std::size_t>(1, full.report.targets.size()));

  training::TrainConfig reduced_cfg = cfg;
  reduced_cfg.kfolds = 5;
  reduced_cfg.label_fraction = kReducedFraction;
  training::ExperimentOptions reduced_opts;
  reduced_opts.pretrained = &pretrained;
  reduced_opts.targets = {"arousal"};
  reduced_opts.supervised_baseline = true;
  const auto reduced = training::run_cv_experiment(run.corpus, reduced_cfg, {}, reduced_opts);
  const double ssl = reduced.report.mean("arousal").accuracy;
  const double base = reduced.baseline ? reduced.baseline->mean("arousal").accuracy : 1.0;
  const std::size_t train_size = reduced.report.folds.empty() ? 0 : reduced.report.folds[0].train_size;
  const double elapsed = seconds_since(t0);

  const bool ok = unchanged && mean_acc >= kTransferAccuracy && ssl > base && elapsed < kTransferBudgetS;
  report(7, ok,
         std::string(unchanged ? "trunk bytes unchanged" : "trunk bytes CHANGED") +
             fmt("; frozen-trunk %.0f-fold mean accuracy %.3f (>= %.2f)", cfg.kfolds, mean_acc, kTransferAccuracy) +
             fmt("; label fraction %.2f (%.0f training segments/fold): transferred %.3f vs supervised baseline %.3f",
                 kReducedFraction, static_cast<double>(train_size), ssl, base) +
             fmt("; %.0f s", elapsed));
}

void criterion_determinism() {
  const auto data = scratch("det_data");
  cli::Invocation synth;
  synth.config.synth.count = 4;
  synth.config.synth.duration_s = 20.0;
  synth.out_root = data;
  synth.timestamp = false;
  bool ok = cli::cmd_synth(synth).exit_code == 0;

  std::vector<fs::path> dirs;
  for (const char* name : {"det_a", "det_b"}) {
    cli::Invocation inv;
    inv.config.data = data.string();
    inv.config.train.seed = 17;
    inv.config.train.kfolds = 2;
    inv.config.train.pretext_epochs = 2;
    inv.config.train.emotion_epochs = 3;
    inv.config.train.batch_size = 14;
    inv.config.supervised_baseline = true;
    inv.out_root = scratch(name);
    inv.timestamp = false;
    const auto out = cli::cmd_train_eval(inv);
    ok = ok && out.exit_code == 0;
    dirs.push_back(out.run_dir);
  }
  int compared = 0;
  std::string differing;
  if (ok) {
    std::set<std::string> names;
    for (const auto& d : dirs) {
      for (const auto& e : fs::directory_iterator(d)) names.insert(e.path().filename().string());
    }
    for (const auto& n : names) {
      ++compared;
      if (!fs::exists(dirs[0] / n) || !fs::exists(dirs[1] / n) || slurp(dirs[0] / n) != slurp(dirs[1] / n)) {
        differing += " " + n;
      }
    }
    ok = differing.empty() && fs::exists(dirs[0] / "report.csv") && fs::exists(dirs[0] / "pretext_model.bin");
  }
  report(8, ok,
         fmt("two train-eval runs, %.0f output files compared", compared) +
             (differing.empty() ? ", all byte-identical" : ", differing:" + differing));
}

void criterion_gated_data() {
  const char* path = std::getenv("ECGSSL_GATED_DATA");
  if (path == nullptr || *path == '\0') {
    emit("criterion 9: SKIP  set ECGSSL_GATED_DATA to a recordings path to run the full protocol");
    return;
  }
  cli::Invocation inv;
  inv.config.data = path;
  inv.config.supervised_baseline = true;
  inv.out_root = scratch("gated");
  inv.log = &std::cout;
  const auto out = cli::cmd_train_eval(inv);
  std::string detail = out.exit_code == 0 ? "reports in " + out.run_dir.string() : "failed: " + out.message;
  report(9, out.exit_code == 0, detail);
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  bool strict = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) strict = true;
    else selected.insert(std::atoi(argv[i]));
  }
  report_file.open("acceptance_report.txt");
  auto wants = [&](int c) { return selected.empty() || selected.count(c) > 0; };

  try {
    if (wants(1)) criterion_gradcheck();
    if (wants(2)) criterion_oracles();
    if (wants(3)) criterion_architecture();
    if (wants(4)) criterion_transform_algebra();
    if (wants(5) || wants(6) || wants(7)) {
      const auto run = run_pretext();
      if (wants(5)) criterion_pretext(run);
      if (wants(6)) criterion_loss_shape(run);
      if (wants(7)) criterion_transfer(run);
    }
    if (wants(8)) criterion_determinism();
    if (wants(9)) criterion_gated_data();
  } catch (const std::exception& e) {
    emit(std::string("acceptance aborted: ") + e.what());
    return 2;
  }
  const auto failed = std::count_if(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return !v.pass; });
  emit(std::to_string(verdicts.size() - static_cast<std::size_t>(failed)) + "/" + std::to_string(verdicts.size()) +
       " criteria passed");
  return strict && failed > 0 ? 1 : 0;
}
