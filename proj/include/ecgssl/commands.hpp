#pragma once

#include "ecgssl/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace ecgssl::cli {

struct Invocation {
  config::RunConfig config;
  std::filesystem::path out_root = "runs";
  bool timestamp = true;  // false: write straight into out_root
  std::ostream* log = nullptr;
};

struct Outcome {
  int exit_code = 0;
  std::filesystem::path run_dir;
  std::string message;
};

// Every command writes config.txt (the resolved config) into its run directory.
// Failures are reported through Outcome, never thrown.

// manifest.csv plus one float32 file per synthetic recording.
Outcome cmd_synth(const Invocation& inv);
// transforms.csv: one column per transformation of one preprocessed segment.
Outcome cmd_transform(const Invocation& inv);
// pretext_model.bin, loss_trace.csv.
Outcome cmd_pretrain(const Invocation& inv);
// report.csv, summary.json, emotion_<target>.bin, and baseline_report.csv when asked;
// pretrains first (pretext_model.bin, loss_trace.csv) when no model is given.
Outcome cmd_train_eval(const Invocation& inv);
// gradcheck.csv; exit code 1 when any check fails.
Outcome cmd_gradcheck(const Invocation& inv, const std::string& inject_sign_error = {}, double tolerance = 1e-4);

// Command-line front end; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ecgssl::cli
