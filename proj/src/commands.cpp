#include "ecgssl/commands.hpp"

#include "ecgssl/corpus.hpp"
#include "ecgssl/errors.hpp"
#include "ecgssl/model_io.hpp"
#include "ecgssl/nn/gradcheck.hpp"
#include "ecgssl/recording_io.hpp"
#include "ecgssl/reports.hpp"
#include "ecgssl/signal.hpp"
#include "ecgssl/transforms.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace ecgssl::cli {

namespace fs = std::filesystem;

namespace {

std::ostream& log_of(const Invocation& inv) {
  static std::ostringstream sink;
  if (inv.log != nullptr) return *inv.log;
  sink.str({});
  return sink;
}

fs::path make_run_dir(const Invocation& inv, const std::string& command) {
  if (!inv.timestamp) {
    fs::create_directories(inv.out_root);
    return inv.out_root;
  }
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream name;
  name << command << '-' << std::put_time(&tm, "%Y%m%d-%H%M%S");
  fs::path dir = inv.out_root / name.str();
  for (int n = 2; fs::exists(dir); ++n) dir = inv.out_root / (name.str() + "-" + std::to_string(n));
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

template <typename Writer>
void write_with(const fs::path& path, Writer&& writer) {
  std::ostringstream ss;
  writer(ss);
  write_file(path, ss.str());
}

training::LabeledCorpus load_corpus(const config::RunConfig& cfg) {
  if (cfg.data.empty()) throw ParameterError("no data path given (set data or pass --data)");
  const auto recordings = io::load_recordings(cfg.data);
  if (recordings.empty()) throw ValidationError("no recordings found under " + cfg.data);
  auto corpus = corpus::build_corpus(recordings);
  if (corpus.segments.empty()) throw ValidationError("recordings under " + cfg.data + " yield no 10 s segments");
  return corpus;
}

// Runs body with a fresh run directory; exceptions become exit code 1.
template <typename Body>
Outcome guarded(const Invocation& inv, const std::string& command, Body&& body) {
  Outcome outcome;
  auto& log = log_of(inv);
  try {
    inv.config.validate();
    outcome.run_dir = make_run_dir(inv, command);
    write_file(outcome.run_dir / "config.txt", config::echo(inv.config));
    outcome.exit_code = body(outcome.run_dir, log);
  } catch (const std::exception& e) {
    outcome.exit_code = 1;
    outcome.message = e.what();
  }
  return outcome;
}

training::ProgressFn progress_to(std::ostream& log) {
  return [&log](const std::string& line) { log << line << '\n' << std::flush; };
}

}  // namespace

Outcome cmd_synth(const Invocation& inv) {
  return guarded(inv, "synth", [&](const fs::path& dir, std::ostream& log) {
    auto options = inv.config.synth;
    options.seed = inv.config.train.seed;
    const auto recordings = corpus::synthesize_recordings(options);
    io::write_dataset(dir, recordings);
    log << "wrote " << recordings.size() << " recordings to " << dir.string() << '\n';
    return 0;
  });
}

Outcome cmd_transform(const Invocation& inv) {
  return guarded(inv, "transform", [&](const fs::path& dir, std::ostream& log) {
    const auto& cfg = inv.config;
    signal::EcgSegment seg;
    if (cfg.data.empty()) {
      seg.samples = signal::synth_ecg(72.0, signal::kModelRateHz, signal::kWindowSeconds, cfg.train.seed);
      seg.source = {"synthetic", 0};
    } else {
      const auto corpus = load_corpus(cfg);
      auto segments = corpus.segments;
      std::sort(segments.begin(), segments.end(), [](const auto& a, const auto& b) { return a.source < b.source; });
      if (static_cast<std::size_t>(cfg.segment_index) >= segments.size()) {
        throw ParameterError("segment_index " + std::to_string(cfg.segment_index) + " is out of range (" +
                             std::to_string(segments.size()) + " segments)");
      }
      seg = segments[static_cast<std::size_t>(cfg.segment_index)];
    }
    const auto params = cfg.transform_params();
    std::vector<Eigen::VectorXd> columns;
    for (auto id : transforms::kAllTransforms) {
      columns.push_back(transforms::apply(
          id, seg.samples, params, transforms::sample_seed(params.rng_seed, static_cast<std::size_t>(cfg.segment_index), id)));
    }
    write_with(dir / "transforms.csv", [&](std::ostream& out) {
      out << "sample";
      for (auto id : transforms::kAllTransforms) out << ',' << transforms::name(id);
      out << '\n';
      for (Eigen::Index i = 0; i < seg.samples.size(); ++i) {
        out << i;
        for (const auto& c : columns) out << ',' << config::format_number(c[i]);
        out << '\n';
      }
    });
    log << "wrote transforms of segment " << seg.source.subject_id << '#' << seg.source.segment_index << '\n';
    return 0;
  });
}

Outcome cmd_pretrain(const Invocation& inv) {
  return guarded(inv, "pretrain", [&](const fs::path& dir, std::ostream& log) {
    const auto& cfg = inv.config;
    auto corpus = load_corpus(cfg);
    corpus.canonicalize();
    auto [net, trace] =
        training::pretrain(corpus.segments, cfg.train, cfg.transform_params(), cfg.architecture(), progress_to(log));
    models::save_model(dir / "pretext_model.bin", net);
    write_with(dir / "loss_trace.csv", [&](std::ostream& out) { reports::write_loss_trace_csv(out, trace); });
    log << "wrote pretext model and loss trace to " << dir.string() << '\n';
    return 0;
  });
}

Outcome cmd_train_eval(const Invocation& inv) {
  return guarded(inv, "train-eval", [&](const fs::path& dir, std::ostream& log) {
    const auto& cfg = inv.config;
    auto corpus = load_corpus(cfg);
    std::optional<models::PretextNetwork<float>> pretrained;
    if (!cfg.model.empty()) pretrained = models::load_pretext_model(fs::path(cfg.model));

    training::ExperimentOptions options;
    options.supervised_baseline = cfg.supervised_baseline;
    options.pretrained = pretrained ? &*pretrained : nullptr;
    options.arch = cfg.architecture();
    options.targets = cfg.targets;
    options.fit_final_models = true;
    options.progress = progress_to(log);
    const auto result = training::run_cv_experiment(std::move(corpus), cfg.train, cfg.transform_params(), options);

    if (!pretrained) {
      models::save_model(dir / "pretext_model.bin", result.pretext);
      write_with(dir / "loss_trace.csv", [&](std::ostream& out) { reports::write_loss_trace_csv(out, result.pretext_trace); });
    }
    write_with(dir / "report.csv", [&](std::ostream& out) { reports::write_report_csv(out, result.report); });
    if (result.baseline) {
      write_with(dir / "baseline_report.csv", [&](std::ostream& out) { reports::write_report_csv(out, *result.baseline); });
    }
    for (const auto& [target, net] : result.final_models) models::save_model(dir / ("emotion_" + target + ".bin"), net);
    write_file(dir / "summary.json", reports::summary_json(cfg, result.report, result.baseline, result.warnings));
    for (const auto& w : result.warnings) log << "warning: " << w << '\n';
    for (const auto& target : result.report.targets) {
      const auto m = result.report.mean(target);
      log << target << ": accuracy " << config::format_number(m.accuracy) << " f1 " << config::format_number(m.f1);
      if (result.baseline) log << " (baseline accuracy " << config::format_number(result.baseline->mean(target).accuracy) << ')';
      log << '\n';
    }
    return 0;
  });
}

Outcome cmd_gradcheck(const Invocation& inv, const std::string& inject_sign_error, double tolerance) {
  return guarded(inv, "gradcheck", [&](const fs::path& dir, std::ostream& log) {
    nn::GradcheckOptions options;
    options.tolerance = tolerance;
    options.inject_sign_error = inject_sign_error;
    const auto results = nn::run_gradcheck_suite(options);
    bool ok = true;
    std::ostringstream csv;
    csv << "check,max_rel_error,max_abs_error,entries,passed\n";
    for (const auto& r : results) {
      ok = ok && r.passed;
      csv << r.name << ',' << config::format_number(r.max_rel_error) << ',' << config::format_number(r.max_abs_error)
          << ',' << r.entries_checked << ',' << (r.passed ? "true" : "false") << '\n';
      log << std::left << std::setw(28) << r.name << " max rel error " << std::scientific << std::setprecision(3)
          << r.max_rel_error << std::defaultfloat << "  " << (r.passed ? "ok" : "FAIL") << '\n';
    }
    write_file(dir / "gradcheck.csv", csv.str());
    log << (ok ? "all checks passed" : "gradient check failed") << '\n';
    return ok ? 0 : 1;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-supervised ECG representation learning"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "runs";
  bool no_timestamp = false;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Config file of key = value lines");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--out", out_dir, "Output root directory")->capture_default_str();
  app.add_flag("--no-timestamp", no_timestamp, "Write into --out directly instead of a timestamped run directory");
  app.add_option("--set", overrides, "Config override KEY=VALUE (repeatable)");

  std::optional<std::string> data, model, targets;
  std::optional<int> count, epochs, segment_index;
  std::optional<double> label_fraction, duration;
  bool baseline = false;
  std::string inject;
  double tolerance = 1e-4;

  auto* synth = app.add_subcommand("synth", "Write a synthetic two-heart-rate dataset");
  synth->add_option("--count", count, "Number of recordings");
  synth->add_option("--duration", duration, "Seconds per recording");

  auto* transform = app.add_subcommand("transform", "Write one segment under every transformation as CSV");
  transform->add_option("--data", data, "Recordings path");
  transform->add_option("--segment", segment_index, "Segment index");

  auto* pretrain = app.add_subcommand("pretrain", "Train the transformation-recognition network");
  pretrain->add_option("--data", data, "Recordings path");
  pretrain->add_option("--epochs", epochs, "Pretext epochs");

  auto* train_eval = app.add_subcommand("train-eval", "Cross-validated emotion classification on a frozen trunk");
  train_eval->add_option("--data", data, "Recordings path");
  train_eval->add_option("--model", model, "Pretext model file (pretrains when omitted)");
  train_eval->add_option("--label-fraction", label_fraction, "Fraction of training labels per subject and class");
  train_eval->add_option("--targets", targets, "Comma-separated targets");
  train_eval->add_flag("--supervised-baseline", baseline, "Also train the same network end to end without transfer");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gradcheck->add_option("--inject-sign-error", inject, "Negate the analytic gradient of this check");
  gradcheck->add_option("--tolerance", tolerance, "Maximum relative error")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  Invocation inv;
  inv.out_root = out_dir;
  inv.timestamp = !no_timestamp;
  inv.log = &out;
  try {
    auto& cfg = inv.config;
    if (!config_path.empty()) config::apply_file(cfg, config_path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ParameterError("--set expects KEY=VALUE, got '" + o + "'");
      config::set(cfg, o.substr(0, eq), o.substr(eq + 1));
    }
    if (seed) cfg.train.seed = *seed;
    if (data) cfg.data = *data;
    if (model) cfg.model = *model;
    if (targets) config::set(cfg, "targets", *targets);
    if (count) cfg.synth.count = *count;
    if (duration) cfg.synth.duration_s = *duration;
    if (epochs) cfg.train.pretext_epochs = *epochs;
    if (segment_index) cfg.segment_index = *segment_index;
    if (label_fraction) cfg.train.label_fraction = *label_fraction;
    if (baseline) cfg.supervised_baseline = true;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  Outcome outcome;
  if (*synth) outcome = cmd_synth(inv);
  else if (*transform) outcome = cmd_transform(inv);
  else if (*pretrain) outcome = cmd_pretrain(inv);
  else if (*train_eval) outcome = cmd_train_eval(inv);
  else outcome = cmd_gradcheck(inv, inject, tolerance);

  if (outcome.exit_code != 0 && !outcome.message.empty()) err << "error: " << outcome.message << '\n';
  if (!outcome.run_dir.empty()) out << "run directory: " << outcome.run_dir.string() << '\n';
  return outcome.exit_code;
}

}  // namespace ecgssl::cli
