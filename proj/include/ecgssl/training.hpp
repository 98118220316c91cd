#pragma once

#include "ecgssl/models.hpp"
#include "ecgssl/signal.hpp"
#include "ecgssl/transforms.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ecgssl::training {

enum class FoldUnit { Segment, Subject };
enum class BinarizeScope { Global, PerFold };

struct TrainConfig {
  double lr = 0.001;
  int batch_size = 128;
  int pretext_epochs = 30;
  int emotion_epochs = 100;
  std::vector<double> alphas = std::vector<double>(transforms::kTransformCount, 1.0 / transforms::kTransformCount);
  double dropout = 0.6;
  double emotion_dropout = 0.6;
  double l2_beta = 0.0001;
  int kfolds = 10;
  std::uint64_t seed = 0;
  double label_fraction = 1.0;
  FoldUnit fold_unit = FoldUnit::Segment;
  BinarizeScope binarize_scope = BinarizeScope::Global;

  // Throws ParameterError on any invariant violation.
  void validate() const;
};

// Progress sink for long loops; receives one human-readable line per event.
using ProgressFn = std::function<void(const std::string&)>;

// ---------------------------------------------------------------------------
// Labels, folds, metrics
// ---------------------------------------------------------------------------

struct BinaryLabels {
  std::vector<int> labels;
  double threshold = 0.0;
  bool degenerate = false;  // every score equal: all labels are 0
};

// label = 1 iff score > mean(scores).
BinaryLabels binarize_labels(std::span<const double> scores);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded shuffle, then k contiguous test blocks whose sizes differ by at most one.
std::vector<Fold> kfold_split(std::size_t n, int k, std::uint64_t seed);

// Same partition law, applied to the distinct group ids (subject-level folds).
std::vector<Fold> group_kfold_split(std::span<const std::string> groups, int k, std::uint64_t seed);

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool degenerate = false;  // precision + recall == 0, F1 reported as 0
};

Metrics evaluate(std::span<const int> predictions, std::span<const int> labels);

// ceil(fraction * count) indices per (subject, class) cell, at least one per non-empty
// cell. Returned in ascending order.
std::vector<std::size_t> label_fraction_subset(std::span<const std::size_t> indices,
                                               std::span<const std::string> subjects, std::span<const int> labels,
                                               double fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Training loops
// ---------------------------------------------------------------------------

struct LossTrace {
  std::vector<std::vector<double>> task_loss;  // [epoch][task], mean BCE over the epoch
  std::vector<double> total_loss;              // [epoch], sum_j alpha_j L_j
};

// Called after every epoch with the 0-based epoch and the trace so far.
using EpochFn = std::function<void(int, const LossTrace&)>;

// Minibatch Adam over reshuffled epochs. Head j is trained with P_j = 1 iff the
// sample carries task j. Deterministic given config.seed.
LossTrace train_pretext(models::PretextNetwork<float>& net, std::span<const transforms::PretextSample> samples,
                        const TrainConfig& config, const ProgressFn& progress = {},
                        const EpochFn& on_epoch = {});

// Argmax over the per-task probabilities, inference mode.
std::vector<int> predict_transforms(const models::PretextNetwork<float>& net,
                                    std::span<const transforms::PretextSample> samples);
double pretext_accuracy(const models::PretextNetwork<float>& net, std::span<const transforms::PretextSample> samples);

nn::Vector<float> to_input(const signal::EcgSegment& segment);

// Global-pool features, one row per segment.
nn::Matrix<float> extract_features(const models::Trunk<float>& trunk, const models::ArchitectureSpec& arch,
                                   std::span<const signal::EcgSegment> segments);

struct EmotionTrace {
  std::vector<double> loss;  // [epoch] mean head loss + L2 penalty
};

// Head-only training on precomputed trunk features (trunk must be frozen).
EmotionTrace train_emotion_head(models::EmotionNetwork<float>& net, const nn::Matrix<float>& features,
                                std::span<const std::size_t> indices, std::span<const int> labels,
                                const TrainConfig& config, std::uint64_t seed);

// Trains whatever is trainable in `net` on segments[indices]. A frozen trunk
// takes the feature shortcut; a trainable trunk is trained end to end.
EmotionTrace train_emotion(models::EmotionNetwork<float>& net, std::span<const signal::EcgSegment> segments,
                           std::span<const std::size_t> indices, std::span<const int> labels,
                           const TrainConfig& config, std::uint64_t seed);

std::vector<int> predict_from_features(const models::EmotionNetwork<float>& net, const nn::Matrix<float>& features,
                                       std::span<const std::size_t> indices);
std::vector<int> predict(const models::EmotionNetwork<float>& net, std::span<const signal::EcgSegment> segments,
                         std::span<const std::size_t> indices);

// ---------------------------------------------------------------------------
// Cross-validated experiment
// ---------------------------------------------------------------------------

struct LabeledCorpus {
  std::vector<signal::EcgSegment> segments;
  std::vector<std::string> targets;         // e.g. arousal, valence, stress
  std::vector<std::vector<double>> scores;  // [target][segment], 1..9

  // Orders segments by (subject, segment index) so results do not depend on input order.
  void canonicalize();
};

struct FoldResult {
  int fold = 0;
  std::string target;
  Metrics metrics;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

struct EvalReport {
  int kfolds = 0;
  std::vector<std::string> targets;
  std::vector<FoldResult> folds;

  [[nodiscard]] Metrics mean(const std::string& target) const;
};

struct ExperimentOptions {
  bool supervised_baseline = false;
  const models::PretextNetwork<float>* pretrained = nullptr;
  models::ArchitectureSpec arch;
  std::vector<std::string> targets;  // empty: every target present on all segments
  bool fit_final_models = false;     // one head per target on all (fraction-subset) segments
  ProgressFn progress;
};

struct ExperimentResult {
  EvalReport report;
  std::optional<EvalReport> baseline;
  models::PretextNetwork<float> pretext;
  LossTrace pretext_trace;  // empty when a pretrained network was supplied
  std::vector<std::pair<std::string, models::EmotionNetwork<float>>> final_models;
  std::vector<std::string> warnings;
};

// Builds the pretext dataset from `segments` and trains a freshly initialized network.
std::pair<models::PretextNetwork<float>, LossTrace> pretrain(std::span<const signal::EcgSegment> segments,
                                                             const TrainConfig& config,
                                                             const transforms::TransformParams& transform_params,
                                                             const models::ArchitectureSpec& arch,
                                                             const ProgressFn& progress = {});

ExperimentResult run_cv_experiment(LabeledCorpus corpus, const TrainConfig& config,
                                   const transforms::TransformParams& transform_params,
                                   const ExperimentOptions& options);

// Seed for one purpose of a run; `path` disambiguates folds, targets and epochs.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

}  // namespace ecgssl::training
