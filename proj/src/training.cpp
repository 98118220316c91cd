#include "ecgssl/training.hpp"

#include "ecgssl/errors.hpp"
#include "ecgssl/nn/adam.hpp"
#include "ecgssl/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace ecgssl::training {

namespace {

// Seed purposes.
enum : std::uint64_t {
  kPretextInit = 1,
  kPretextShuffle,
  kPretextDropout,
  kFolds,
  kHeadInit,
  kHeadShuffle,
  kHeadDropout,
  kLabelFraction,
  kBaselineInit,
  kFinalModel,
};

template <typename Network>
void zero_grads(Network& grads) {
  for (auto& p : grads.parameters()) p.tensor->set_zero();
}

std::vector<std::size_t> shuffled(std::span<const std::size_t> indices, std::uint64_t seed) {
  std::vector<std::size_t> order(indices.begin(), indices.end());
  CounterRng(seed).shuffle(order.begin(), order.end());
  return order;
}

std::string format_loss(double v) {
  std::ostringstream ss;
  ss.precision(5);
  ss << v;
  return ss.str();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  return CounterRng(seed).split(path).key();
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ParameterError("lr must be > 0");
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (pretext_epochs < 1 || emotion_epochs < 1) throw ParameterError("epoch counts must be >= 1");
  if (alphas.size() != static_cast<std::size_t>(transforms::kTransformCount)) {
    throw ParameterError("alphas must have " + std::to_string(transforms::kTransformCount) + " entries");
  }
  bool any = false;
  for (double a : alphas) {
    if (!(a >= 0.0)) throw ParameterError("alphas must be non-negative");
    any = any || a > 0.0;
  }
  if (!any) throw ParameterError("alphas must not all be zero");
  if (!(dropout >= 0.0 && dropout < 1.0) || !(emotion_dropout >= 0.0 && emotion_dropout < 1.0)) {
    throw ParameterError("dropout rates must be in [0, 1)");
  }
  if (!(l2_beta >= 0.0)) throw ParameterError("l2_beta must be >= 0");
  if (kfolds < 2) throw ParameterError("kfolds must be >= 2");
  if (!(label_fraction > 0.0 && label_fraction <= 1.0)) throw ParameterError("label_fraction must be in (0, 1]");
}

BinaryLabels binarize_labels(std::span<const double> scores) {
  if (scores.empty()) throw ParameterError("binarize_labels: no scores");
  BinaryLabels out;
  out.threshold = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  out.labels.reserve(scores.size());
  bool all_equal = true;
  for (double s : scores) {
    out.labels.push_back(s > out.threshold ? 1 : 0);
    all_equal = all_equal && s == scores.front();
  }
  out.degenerate = all_equal;
  return out;
}

std::vector<Fold> kfold_split(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw ParameterError("kfold_split: k must be >= 2");
  if (n < static_cast<std::size_t>(k)) {
    throw ParameterError("kfold_split: " + std::to_string(n) + " items cannot fill " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  CounterRng(seed).shuffle(order.begin(), order.end());

  std::vector<Fold> folds(static_cast<std::size_t>(k));
  const std::size_t base = n / k, extra = n % k;
  std::size_t start = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].test.assign(order.begin() + start, order.begin() + start + size);
    std::sort(folds[f].test.begin(), folds[f].test.end());
    start += size;
  }
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) folds[f].train.insert(folds[f].train.end(), folds[g].test.begin(), folds[g].test.end());
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

std::vector<Fold> group_kfold_split(std::span<const std::string> groups, int k, std::uint64_t seed) {
  const std::set<std::string> distinct(groups.begin(), groups.end());
  const std::vector<std::string> ids(distinct.begin(), distinct.end());
  const auto group_folds = kfold_split(ids.size(), k, seed);
  std::map<std::string, std::size_t> fold_of;
  for (std::size_t f = 0; f < group_folds.size(); ++f) {
    for (auto g : group_folds[f].test) fold_of[ids[g]] = f;
  }
  std::vector<Fold> folds(group_folds.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto f = fold_of.at(groups[i]);
    for (std::size_t g = 0; g < folds.size(); ++g) (g == f ? folds[g].test : folds[g].train).push_back(i);
  }
  return folds;
}

Metrics evaluate(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw ShapeError("evaluate: prediction and label counts differ");
  if (labels.empty()) throw ParameterError("evaluate: no samples");
  std::size_t correct = 0, tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] != 0, y = labels[i] != 0;
    correct += p == y;
    tp += p && y;
    fp += p && !y;
    fn += !p && y;
  }
  Metrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1 = 0.0;
    m.degenerate = true;
  }
  return m;
}

std::vector<std::size_t> label_fraction_subset(std::span<const std::size_t> indices,
                                               std::span<const std::string> subjects, std::span<const int> labels,
                                               double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ParameterError("label_fraction_subset: fraction must be in (0, 1]");
  if (fraction == 1.0) {
    std::vector<std::size_t> all(indices.begin(), indices.end());
    std::sort(all.begin(), all.end());
    return all;
  }
  std::map<std::pair<std::string, int>, std::vector<std::size_t>> cells;
  for (auto i : indices) cells[{subjects[i], labels[i]}].push_back(i);

  std::vector<std::size_t> out;
  const CounterRng root(seed);
  std::uint64_t cell_index = 0;
  for (auto& [key, members] : cells) {
    const auto keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(members.size()) - 1e-12)));
    std::sort(members.begin(), members.end());
    CounterRng rng = root.split(cell_index++);
    rng.shuffle(members.begin(), members.end());
    out.insert(out.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  std::sort(out.begin(), out.end());
  return out;
}

nn::Vector<float> to_input(const signal::EcgSegment& segment) { return segment.samples.cast<float>(); }

LossTrace train_pretext(models::PretextNetwork<float>& net, std::span<const transforms::PretextSample> samples,
                        const TrainConfig& config, const ProgressFn& progress, const EpochFn& on_epoch) {
  config.validate();
  if (samples.empty()) throw ParameterError("train_pretext: empty dataset");
  const int tasks = net.arch.task_count;
  if (tasks != transforms::kTransformCount) throw ShapeError("train_pretext: network must have one head per transform");

  std::vector<nn::Vector<float>> inputs;
  inputs.reserve(samples.size());
  for (const auto& s : samples) inputs.push_back(to_input(s.segment));

  auto grads = models::PretextNetwork<float>::zeros(net.arch);
  auto params = net.parameters();
  auto grad_refs = grads.parameters();
  nn::AdamState<float> adam(nn::AdamConfig{config.lr});

  std::vector<std::size_t> all(samples.size());
  std::iota(all.begin(), all.end(), 0);
  const auto batch = static_cast<std::size_t>(config.batch_size);

  LossTrace trace;
  for (int epoch = 0; epoch < config.pretext_epochs; ++epoch) {
    const auto order = shuffled(all, derive_seed(config.seed, {kPretextShuffle, static_cast<std::uint64_t>(epoch)}));
    const auto dropout_seed = derive_seed(config.seed, {kPretextDropout, static_cast<std::uint64_t>(epoch)});
    std::vector<double> epoch_loss(static_cast<std::size_t>(tasks), 0.0);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const float scale = 1.0f / static_cast<float>(end - start);
      zero_grads(grads);
      for (std::size_t k = start; k < end; ++k) {
        const auto i = order[k];
        const auto losses = models::pretext_sample_gradients(net, inputs[i], static_cast<int>(samples[i].task),
                                                             config.alphas, config.dropout, dropout_seed, i, scale,
                                                             grads);
        for (int j = 0; j < tasks; ++j) epoch_loss[j] += losses[j];
      }
      models::apply_l2(params, grad_refs, config.l2_beta);
      adam.step(params, grad_refs);
    }
    for (auto& l : epoch_loss) l /= static_cast<double>(samples.size());
    trace.total_loss.push_back(nn::multitask_loss(epoch_loss, config.alphas));
    trace.task_loss.push_back(std::move(epoch_loss));
    if (progress) {
      progress("pretext epoch " + std::to_string(epoch + 1) + "/" + std::to_string(config.pretext_epochs) +
               " total loss " + format_loss(trace.total_loss.back()));
    }
    if (on_epoch) on_epoch(epoch, trace);
  }
  return trace;
}

std::vector<int> predict_transforms(const models::PretextNetwork<float>& net,
                                    std::span<const transforms::PretextSample> samples) {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const auto psi = models::pretext_probabilities(net, to_input(s.segment), models::Mode::Inference, 0.0, 0, 0);
    out.push_back(static_cast<int>(models::argmax(psi)));
  }
  return out;
}

double pretext_accuracy(const models::PretextNetwork<float>& net, std::span<const transforms::PretextSample> samples) {
  if (samples.empty()) throw ParameterError("pretext_accuracy: no samples");
  const auto predicted = predict_transforms(net, samples);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) correct += predicted[i] == static_cast<int>(samples[i].task);
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

nn::Matrix<float> extract_features(const models::Trunk<float>& trunk, const models::ArchitectureSpec& arch,
                                   std::span<const signal::EcgSegment> segments) {
  nn::Matrix<float> out(static_cast<Eigen::Index>(segments.size()), arch.feature_width());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        models::trunk_forward(trunk, arch, to_input(segments[i]), static_cast<models::TrunkCache<float>*>(nullptr))
            .transpose();
  }
  return out;
}

namespace {

// Shared minibatch loop for both emotion training paths. `sample_grad(i, seed, scale)`
// runs one forward/backward and returns its loss.
template <typename Network, typename SampleGrad>
EmotionTrace emotion_loop(Network& net, Network& grads, std::span<const std::size_t> indices,
                          const TrainConfig& config, std::uint64_t seed, SampleGrad&& sample_grad) {
  if (indices.empty()) throw ParameterError("train_emotion: empty training set");
  auto params = net.parameters();
  auto grad_refs = grads.parameters();
  nn::AdamState<float> adam(nn::AdamConfig{config.lr});
  const auto batch = static_cast<std::size_t>(config.batch_size);
  EmotionTrace trace;
  for (int epoch = 0; epoch < config.emotion_epochs; ++epoch) {
    const auto order = shuffled(indices, derive_seed(seed, {kHeadShuffle, static_cast<std::uint64_t>(epoch)}));
    const auto dropout_seed = derive_seed(seed, {kHeadDropout, static_cast<std::uint64_t>(epoch)});
    double epoch_loss = 0.0;
    double penalty = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const float scale = 1.0f / static_cast<float>(end - start);
      zero_grads(grads);
      for (std::size_t k = start; k < end; ++k) epoch_loss += sample_grad(order[k], dropout_seed, scale);
      penalty += models::apply_l2(params, grad_refs, config.l2_beta);
      ++steps;
      adam.step(params, grad_refs);
    }
    trace.loss.push_back(epoch_loss / static_cast<double>(order.size()) + penalty / static_cast<double>(steps));
  }
  return trace;
}

}  // namespace

EmotionTrace train_emotion_head(models::EmotionNetwork<float>& net, const nn::Matrix<float>& features,
                                std::span<const std::size_t> indices, std::span<const int> labels,
                                const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  if (!net.trunk.frozen()) throw ParameterError("train_emotion_head: trunk must be frozen");
  auto grads = models::EmotionNetwork<float>::zeros(net.arch);
  grads.trunk.set_trainable(false);
  return emotion_loop(net, grads, indices, config, seed, [&](std::size_t i, std::uint64_t dseed, float scale) {
    const nn::Vector<float> f = features.row(static_cast<Eigen::Index>(i)).transpose();
    return models::emotion_head_gradients(net.head, f, labels[i], config.emotion_dropout,
                                          models::dropout_stream(dseed, i, 0), scale, grads.head);
  });
}

EmotionTrace train_emotion(models::EmotionNetwork<float>& net, std::span<const signal::EcgSegment> segments,
                           std::span<const std::size_t> indices, std::span<const int> labels,
                           const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  if (net.trunk.frozen()) {
    nn::Matrix<float> features = nn::Matrix<float>::Zero(static_cast<Eigen::Index>(segments.size()),
                                                         net.arch.feature_width());
    for (auto i : indices) {
      features.row(static_cast<Eigen::Index>(i)) =
          models::trunk_forward(net.trunk, net.arch, to_input(segments[i]),
                                static_cast<models::TrunkCache<float>*>(nullptr))
              .transpose();
    }
    return train_emotion_head(net, features, indices, labels, config, seed);
  }
  std::map<std::size_t, nn::Vector<float>> inputs;
  for (auto i : indices) inputs.emplace(i, to_input(segments[i]));
  auto grads = models::EmotionNetwork<float>::zeros(net.arch);
  return emotion_loop(net, grads, indices, config, seed, [&](std::size_t i, std::uint64_t dseed, float scale) {
    return models::emotion_sample_gradients(net, inputs.at(i), labels[i], config.emotion_dropout, dseed, i, scale,
                                            grads);
  });
}

std::vector<int> predict_from_features(const models::EmotionNetwork<float>& net, const nn::Matrix<float>& features,
                                       std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (auto i : indices) {
    const nn::Vector<float> f = features.row(static_cast<Eigen::Index>(i)).transpose();
    const auto probs = models::emotion_probabilities_from_features(net, f, models::Mode::Inference, 0.0, 0, 0);
    out.push_back(static_cast<int>(models::argmax(probs)));
  }
  return out;
}

std::vector<int> predict(const models::EmotionNetwork<float>& net, std::span<const signal::EcgSegment> segments,
                         std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (auto i : indices) {
    const auto f = models::trunk_forward(net.trunk, net.arch, to_input(segments[i]),
                                         static_cast<models::TrunkCache<float>*>(nullptr));
    const auto probs = models::emotion_probabilities_from_features(net, f, models::Mode::Inference, 0.0, 0, 0);
    out.push_back(static_cast<int>(models::argmax(probs)));
  }
  return out;
}

void LabeledCorpus::canonicalize() {
  std::vector<std::size_t> order(segments.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return segments[a].source < segments[b].source; });
  std::vector<signal::EcgSegment> seg;
  seg.reserve(order.size());
  for (auto i : order) seg.push_back(std::move(segments[i]));
  segments = std::move(seg);
  for (auto& column : scores) {
    std::vector<double> sorted;
    sorted.reserve(order.size());
    for (auto i : order) sorted.push_back(column[i]);
    column = std::move(sorted);
  }
}

Metrics EvalReport::mean(const std::string& target) const {
  Metrics m;
  int count = 0;
  for (const auto& f : folds) {
    if (f.target != target) continue;
    m.accuracy += f.metrics.accuracy;
    m.f1 += f.metrics.f1;
    m.precision += f.metrics.precision;
    m.recall += f.metrics.recall;
    ++count;
  }
  if (count > 0) {
    m.accuracy /= count;
    m.f1 /= count;
    m.precision /= count;
    m.recall /= count;
  }
  return m;
}

ExperimentResult run_cv_experiment(LabeledCorpus corpus, const TrainConfig& config,
                                   const transforms::TransformParams& transform_params,
                                   const ExperimentOptions& options) {
  config.validate();
  const auto& arch = options.arch;
  const std::size_t n = corpus.segments.size();
  if (n < static_cast<std::size_t>(config.kfolds)) {
    throw ParameterError("run_cv_experiment: " + std::to_string(n) + " segments cannot fill " +
                         std::to_string(config.kfolds) + " folds");
  }
  if (corpus.scores.size() != corpus.targets.size()) throw ShapeError("run_cv_experiment: scores/targets mismatch");
  corpus.canonicalize();
  auto say = [&](const std::string& line) {
    if (options.progress) options.progress(line);
  };

  ExperimentResult result;

  // Targets scored on every segment, optionally restricted by the caller.
  std::vector<std::size_t> target_columns;
  for (std::size_t t = 0; t < corpus.targets.size(); ++t) {
    const auto& col = corpus.scores[t];
    const bool complete = std::all_of(col.begin(), col.end(), [](double v) { return std::isfinite(v); });
    const bool wanted = options.targets.empty() ||
                        std::find(options.targets.begin(), options.targets.end(), corpus.targets[t]) !=
                            options.targets.end();
    if (complete && wanted) target_columns.push_back(t);
  }
  if (target_columns.empty()) throw ParameterError("run_cv_experiment: no target is scored on every segment");

  std::vector<std::string> subjects;
  subjects.reserve(n);
  for (const auto& s : corpus.segments) subjects.push_back(s.source.subject_id);

  // Self-supervised step on every segment, labels unused.
  if (options.pretrained != nullptr) {
    result.pretext = *options.pretrained;
  } else {
    auto [net, trace] = pretrain(corpus.segments, config, transform_params, arch, options.progress);
    result.pretext = std::move(net);
    result.pretext_trace = std::move(trace);
  }
  const auto frozen = models::transfer_weights(result.pretext.trunk, result.pretext.arch, arch);
  say("extracting frozen-trunk features");
  const auto features = extract_features(frozen, arch, corpus.segments);

  const auto folds = config.fold_unit == FoldUnit::Subject
                         ? group_kfold_split(subjects, config.kfolds, derive_seed(config.seed, {kFolds}))
                         : kfold_split(n, config.kfolds, derive_seed(config.seed, {kFolds}));

  std::vector<std::string> target_names;
  for (auto t : target_columns) target_names.push_back(corpus.targets[t]);
  result.report.kfolds = config.kfolds;
  result.report.targets = target_names;
  if (options.supervised_baseline) result.baseline = EvalReport{config.kfolds, target_names, {}};

  std::vector<std::vector<int>> global_labels;
  for (auto t : target_columns) {
    auto b = binarize_labels(corpus.scores[t]);
    if (b.degenerate) result.warnings.push_back("target '" + corpus.targets[t] + "' has identical scores everywhere");
    global_labels.push_back(std::move(b.labels));
  }

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto& fold = folds[f];
    for (std::size_t ti = 0; ti < target_columns.size(); ++ti) {
      const auto& name = target_names[ti];
      std::vector<int> labels = global_labels[ti];
      if (config.binarize_scope == BinarizeScope::PerFold) {
        std::vector<double> train_scores;
        for (auto i : fold.train) train_scores.push_back(corpus.scores[target_columns[ti]][i]);
        const auto threshold = binarize_labels(train_scores).threshold;
        for (std::size_t i = 0; i < n; ++i) labels[i] = corpus.scores[target_columns[ti]][i] > threshold ? 1 : 0;
      }
      const auto ff = static_cast<std::uint64_t>(f), tt = static_cast<std::uint64_t>(ti);
      const auto train_idx = label_fraction_subset(fold.train, subjects, labels, config.label_fraction,
                                                   derive_seed(config.seed, {kLabelFraction, ff, tt}));
      for (auto i : train_idx) {
        if (std::binary_search(fold.test.begin(), fold.test.end(), i)) {
          throw std::logic_error("run_cv_experiment: test index leaked into the training set");
        }
      }
      std::vector<int> test_labels;
      for (auto i : fold.test) test_labels.push_back(labels[i]);

      auto net = models::EmotionNetwork<float>::with_trunk(arch, frozen, derive_seed(config.seed, {kHeadInit, ff, tt}));
      train_emotion_head(net, features, train_idx, labels, config, derive_seed(config.seed, {kHeadShuffle, ff, tt}));
      const auto metrics = evaluate(predict_from_features(net, features, fold.test), test_labels);
      result.report.folds.push_back({static_cast<int>(f), name, metrics, train_idx.size(), fold.test.size()});
      say("fold " + std::to_string(f + 1) + "/" + std::to_string(folds.size()) + " " + name + " accuracy " +
          format_loss(metrics.accuracy));

      if (options.supervised_baseline) {
        auto base = models::EmotionNetwork<float>::build(arch, derive_seed(config.seed, {kBaselineInit, ff, tt}));
        train_emotion(base, corpus.segments, train_idx, labels, config,
                      derive_seed(config.seed, {kBaselineInit, kHeadShuffle, ff, tt}));
        const auto bm = evaluate(predict(base, corpus.segments, fold.test), test_labels);
        result.baseline->folds.push_back({static_cast<int>(f), name, bm, train_idx.size(), fold.test.size()});
        say("fold " + std::to_string(f + 1) + "/" + std::to_string(folds.size()) + " " + name +
            " baseline accuracy " + format_loss(bm.accuracy));
      }
    }
  }

  if (options.fit_final_models) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t ti = 0; ti < target_columns.size(); ++ti) {
      const auto tt = static_cast<std::uint64_t>(ti);
      const auto& labels = global_labels[ti];
      const auto train_idx = label_fraction_subset(all, subjects, labels, config.label_fraction,
                                                   derive_seed(config.seed, {kFinalModel, kLabelFraction, tt}));
      auto net = models::EmotionNetwork<float>::with_trunk(arch, frozen, derive_seed(config.seed, {kFinalModel, kHeadInit, tt}));
      train_emotion_head(net, features, train_idx, labels, config, derive_seed(config.seed, {kFinalModel, kHeadShuffle, tt}));
      result.final_models.emplace_back(target_names[ti], std::move(net));
      say("final " + target_names[ti] + " head trained on " + std::to_string(train_idx.size()) + " segments");
    }
  }
  return result;
}

std::pair<models::PretextNetwork<float>, LossTrace> pretrain(std::span<const signal::EcgSegment> segments,
                                                             const TrainConfig& config,
                                                             const transforms::TransformParams& transform_params,
                                                             const models::ArchitectureSpec& arch,
                                                             const ProgressFn& progress) {
  config.validate();
  if (progress) progress("building pretext dataset from " + std::to_string(segments.size()) + " segments");
  const auto samples = transforms::build_pretext_dataset(segments, transform_params);
  auto net = models::PretextNetwork<float>::build(arch, derive_seed(config.seed, {kPretextInit}));
  auto trace = train_pretext(net, samples, config, progress);
  return {std::move(net), std::move(trace)};
}

}  // namespace ecgssl::training
