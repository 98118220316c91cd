#pragma once

#include "ecgssl/errors.hpp"
#include "ecgssl/nn/layers.hpp"
#include "ecgssl/nn/losses.hpp"
#include "ecgssl/nn/tensor.hpp"
#include "ecgssl/random.hpp"

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace ecgssl::models {

using nn::Index;
using nn::Matrix;
using nn::ParamRef;
using nn::Shape;
using nn::Tensor;
using nn::Vector;

enum class Mode { Training, Inference };

struct ConvBlockSpec {
  Index kernel;
  Index filters;

  bool operator==(const ConvBlockSpec&) const = default;
};

// Defaults reproduce the published network: three blocks of two same-padded
// convolutions (32x32, 16x64, 8x128), max-pool 8/2 after the first two blocks,
// global max-pool, 7 heads of dense 128-128-1 and an emotion head of 64-64-2.
struct ArchitectureSpec {
  Index input_length = 2560;
  std::vector<ConvBlockSpec> blocks = {{32, 32}, {16, 64}, {8, 128}};
  Index convs_per_block = 2;
  Index pool = 8;
  Index pool_stride = 2;
  int task_count = 7;
  Index pretext_hidden = 128;
  Index pretext_head_units = 1;
  Index emotion_hidden = 64;
  Index emotion_classes = 2;

  [[nodiscard]] Index feature_width() const { return blocks.back().filters; }

  [[nodiscard]] bool same_trunk(const ArchitectureSpec& o) const {
    return input_length == o.input_length && blocks == o.blocks && convs_per_block == o.convs_per_block &&
           pool == o.pool && pool_stride == o.pool_stride;
  }

  // Activation shapes from input to global pool, computed without running the network.
  [[nodiscard]] std::vector<Shape> trunk_shape_trace() const {
    std::vector<Shape> trace{{input_length, 1}};
    Index length = input_length;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      trace.push_back({length, blocks[b].filters});
      if (b + 1 < blocks.size()) {
        length = nn::pooled_length(length, pool, pool_stride);
        trace.push_back({length, blocks[b].filters});
      }
    }
    trace.push_back({1, feature_width()});
    return trace;
  }

  bool operator==(const ArchitectureSpec&) const = default;
};

template <typename Scalar>
struct ConvLayer {
  Tensor<Scalar> kernel;  // [K, C_in, C_out]
  Tensor<Scalar> bias;    // [C_out]
};

template <typename Scalar>
struct ConvBlock {
  std::vector<ConvLayer<Scalar>> convs;
  bool trainable = true;
};

template <typename Scalar>
struct DenseLayer {
  Tensor<Scalar> weights;  // [D_in, D_out]
  Tensor<Scalar> bias;     // [D_out]
};

template <typename Scalar>
struct Trunk {
  std::vector<ConvBlock<Scalar>> blocks;

  static Trunk zeros(const ArchitectureSpec& arch) {
    Trunk t;
    Index channels = 1;
    for (const auto& spec : arch.blocks) {
      ConvBlock<Scalar> block;
      for (Index c = 0; c < arch.convs_per_block; ++c) {
        block.convs.push_back({Tensor<Scalar>({spec.kernel, channels, spec.filters}), Tensor<Scalar>({spec.filters})});
        channels = spec.filters;
      }
      t.blocks.push_back(std::move(block));
    }
    return t;
  }

  [[nodiscard]] bool frozen() const {
    for (const auto& b : blocks) {
      if (b.trainable) return false;
    }
    return true;
  }

  void set_trainable(bool trainable) {
    for (auto& b : blocks) b.trainable = trainable;
  }

  void append_params(std::vector<ParamRef<Scalar>>& out, const std::string& prefix) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (std::size_t c = 0; c < blocks[b].convs.size(); ++c) {
        const std::string base = prefix + "b" + std::to_string(b + 1) + ".conv" + std::to_string(c + 1);
        out.push_back({base + ".kernel", &blocks[b].convs[c].kernel, blocks[b].trainable, false});
        out.push_back({base + ".bias", &blocks[b].convs[c].bias, blocks[b].trainable, false});
      }
    }
  }
};

// Three dense layers: in -> hidden -> hidden -> units, sigmoid on the output.
template <typename Scalar>
struct DenseHead {
  std::array<DenseLayer<Scalar>, 3> layers;
  bool trainable = true;

  static DenseHead zeros(Index in, Index hidden, Index units) {
    DenseHead h;
    const std::array<std::pair<Index, Index>, 3> dims = {{{in, hidden}, {hidden, hidden}, {hidden, units}}};
    for (std::size_t i = 0; i < 3; ++i) {
      h.layers[i] = {Tensor<Scalar>({dims[i].first, dims[i].second}), Tensor<Scalar>({dims[i].second})};
    }
    return h;
  }

  [[nodiscard]] Index units() const { return layers[2].bias.size(); }

  void append_params(std::vector<ParamRef<Scalar>>& out, const std::string& prefix) {
    for (std::size_t i = 0; i < 3; ++i) {
      const std::string base = prefix + "dense" + std::to_string(i + 1);
      out.push_back({base + ".weights", &layers[i].weights, trainable, true});
      out.push_back({base + ".bias", &layers[i].bias, trainable, false});
    }
  }
};

namespace detail {

// Glorot-uniform weights (limit sqrt(6 / (fan_in + fan_out))), zero biases, one RNG
// stream per parameter in container order.
template <typename Scalar>
void glorot_init(std::vector<ParamRef<Scalar>> params, std::uint64_t seed) {
  const CounterRng root(seed);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& t = *params[i].tensor;
    if (t.shape().size() == 1) {
      t.set_zero();
      continue;
    }
    double fan_in = 0.0, fan_out = 0.0;
    if (t.shape().size() == 3) {
      fan_in = static_cast<double>(t.dim(0) * t.dim(1));
      fan_out = static_cast<double>(t.dim(0) * t.dim(2));
    } else {
      fan_in = static_cast<double>(t.dim(0));
      fan_out = static_cast<double>(t.dim(1));
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    CounterRng rng = root.split(i);
    for (Index k = 0; k < t.size(); ++k) t.flat()[k] = static_cast<Scalar>(rng.uniform(-limit, limit));
  }
}

}  // namespace detail

template <typename Scalar>
struct PretextNetwork {
  ArchitectureSpec arch;
  Trunk<Scalar> trunk;
  std::vector<DenseHead<Scalar>> heads;

  static PretextNetwork zeros(const ArchitectureSpec& arch) {
    PretextNetwork n{arch, Trunk<Scalar>::zeros(arch), {}};
    for (int j = 0; j < arch.task_count; ++j) {
      n.heads.push_back(DenseHead<Scalar>::zeros(arch.feature_width(), arch.pretext_hidden, arch.pretext_head_units));
    }
    return n;
  }

  static PretextNetwork build(const ArchitectureSpec& arch, std::uint64_t seed) {
    auto n = zeros(arch);
    detail::glorot_init(n.parameters(), seed);
    return n;
  }

  std::vector<ParamRef<Scalar>> parameters() {
    std::vector<ParamRef<Scalar>> out;
    trunk.append_params(out, "trunk.");
    for (std::size_t j = 0; j < heads.size(); ++j) heads[j].append_params(out, "head" + std::to_string(j) + ".");
    return out;
  }
};

template <typename Scalar>
struct EmotionNetwork {
  ArchitectureSpec arch;
  Trunk<Scalar> trunk;
  DenseHead<Scalar> head;

  static EmotionNetwork zeros(const ArchitectureSpec& arch) {
    return {arch, Trunk<Scalar>::zeros(arch),
            DenseHead<Scalar>::zeros(arch.feature_width(), arch.emotion_hidden, arch.emotion_classes)};
  }

  // Fresh, fully trainable network (the supervised baseline).
  static EmotionNetwork build(const ArchitectureSpec& arch, std::uint64_t seed) {
    auto n = zeros(arch);
    detail::glorot_init(n.parameters(), seed);
    return n;
  }

  // Frozen transferred trunk plus a freshly initialized head.
  static EmotionNetwork with_trunk(const ArchitectureSpec& arch, Trunk<Scalar> frozen_trunk, std::uint64_t seed) {
    auto n = zeros(arch);
    std::vector<ParamRef<Scalar>> head_params;
    n.head.append_params(head_params, "head.");
    detail::glorot_init(head_params, seed);
    n.trunk = std::move(frozen_trunk);
    return n;
  }

  std::vector<ParamRef<Scalar>> parameters() {
    std::vector<ParamRef<Scalar>> out;
    trunk.append_params(out, "trunk.");
    head.append_params(out, "head.");
    return out;
  }
};

// Deep copy of the pretext trunk with every block frozen. Throws TransferError if the
// source does not have the trunk layout `target` expects.
template <typename Scalar>
Trunk<Scalar> transfer_weights(const Trunk<Scalar>& source, const ArchitectureSpec& source_arch,
                               const ArchitectureSpec& target) {
  if (!source_arch.same_trunk(target)) throw TransferError("transfer_weights: trunk architectures differ");
  const auto expected = Trunk<Scalar>::zeros(target);
  if (source.blocks.size() != expected.blocks.size()) throw TransferError("transfer_weights: block count mismatch");
  for (std::size_t b = 0; b < expected.blocks.size(); ++b) {
    if (source.blocks[b].convs.size() != expected.blocks[b].convs.size()) {
      throw TransferError("transfer_weights: conv count mismatch in block " + std::to_string(b + 1));
    }
    for (std::size_t c = 0; c < expected.blocks[b].convs.size(); ++c) {
      const auto& s = source.blocks[b].convs[c];
      const auto& e = expected.blocks[b].convs[c];
      if (s.kernel.shape() != e.kernel.shape() || s.bias.shape() != e.bias.shape()) {
        throw TransferError("transfer_weights: block " + std::to_string(b + 1) + " conv " + std::to_string(c + 1) +
                            " has kernel " + nn::shape_string(s.kernel.shape()) + ", expected " +
                            nn::shape_string(e.kernel.shape()));
      }
    }
  }
  Trunk<Scalar> out = source;
  out.set_trainable(false);
  return out;
}

// ---------------------------------------------------------------------------
// Trunk forward/backward
// ---------------------------------------------------------------------------

template <typename Scalar>
struct TrunkCache {
  std::vector<Matrix<Scalar>> block_inputs;   // input to the first conv of each block
  std::vector<Matrix<Scalar>> conv_outputs;   // post-relu output of every conv, in order
  std::vector<nn::PoolResult<Scalar>> pools;  // after every block but the last
  nn::GlobalPoolResult<Scalar> global;
};

template <typename Scalar>
Vector<Scalar> trunk_forward(const Trunk<Scalar>& trunk, const ArchitectureSpec& arch, const Vector<Scalar>& signal,
                             std::type_identity_t<TrunkCache<Scalar>>* cache = nullptr) {
  if (signal.size() != arch.input_length) {
    throw ShapeError("trunk_forward: input length " + std::to_string(signal.size()) + ", expected " +
                     std::to_string(arch.input_length));
  }
  Matrix<Scalar> x = Eigen::Map<const Matrix<Scalar>>(signal.data(), signal.size(), 1);
  if (cache) *cache = {};
  for (std::size_t b = 0; b < trunk.blocks.size(); ++b) {
    if (cache) cache->block_inputs.push_back(x);
    for (const auto& conv : trunk.blocks[b].convs) {
      x = nn::relu(nn::conv1d(x, conv.kernel, conv.bias));
      if (cache) cache->conv_outputs.push_back(x);
    }
    if (b + 1 < trunk.blocks.size()) {
      auto pooled = nn::maxpool1d(x, arch.pool, arch.pool_stride);
      x = pooled.output;
      if (cache) cache->pools.push_back(std::move(pooled));
    }
  }
  auto global = nn::global_maxpool(x);
  Vector<Scalar> features = global.output;
  if (cache) cache->global = std::move(global);
  return features;
}

// Accumulates trainable-block gradients into `grads`; frozen blocks are skipped and
// backpropagation stops below the lowest trainable block.
template <typename Scalar>
void trunk_backward(const Trunk<Scalar>& trunk, const TrunkCache<Scalar>& cache, const Vector<Scalar>& grad_features,
                    Trunk<Scalar>& grads) {
  const auto nblocks = trunk.blocks.size();
  std::size_t lowest_trainable = nblocks;
  for (std::size_t b = 0; b < nblocks; ++b) {
    if (trunk.blocks[b].trainable) {
      lowest_trainable = b;
      break;
    }
  }
  if (lowest_trainable == nblocks) return;

  std::size_t conv_index = cache.conv_outputs.size();
  Matrix<Scalar> grad =
      nn::global_maxpool_backward(cache.global, cache.conv_outputs.back().rows(), grad_features);
  for (std::size_t b = nblocks; b-- > lowest_trainable;) {
    const auto& block = trunk.blocks[b];
    if (b + 1 < nblocks) {
      const Index length = cache.conv_outputs[conv_index - 1].rows();
      grad = nn::maxpool1d_backward(cache.pools[b], length, grad);
    }
    for (std::size_t c = block.convs.size(); c-- > 0;) {
      --conv_index;
      const auto& out = cache.conv_outputs[conv_index];
      const Matrix<Scalar> grad_pre = nn::relu_backward(out, grad);
      const Matrix<Scalar>& input = c == 0 ? cache.block_inputs[b] : cache.conv_outputs[conv_index - 1];
      const bool need_input = c > 0 || b > lowest_trainable;
      auto& g = grads.blocks[b].convs[c];
      nn::conv1d_backward(input, block.convs[c].kernel, grad_pre, block.trainable ? &g.kernel : nullptr,
                          block.trainable ? &g.bias : nullptr, need_input ? &grad : nullptr);
    }
  }
}

// ---------------------------------------------------------------------------
// Head forward/backward. Dropout follows each hidden layer.
// ---------------------------------------------------------------------------

template <typename Scalar>
struct HeadCache {
  Vector<Scalar> input;
  Vector<Scalar> hidden1;
  nn::DropoutResult<Scalar> drop1;
  Vector<Scalar> hidden2;
  nn::DropoutResult<Scalar> drop2;
  Vector<Scalar> probs;
};

template <typename Scalar>
Vector<Scalar> head_forward(const DenseHead<Scalar>& head, const Vector<Scalar>& features, double dropout_rate,
                            const CounterRng& rng, Mode mode, HeadCache<Scalar>* cache) {
  const bool training = mode == Mode::Training;
  Vector<Scalar> h1 = nn::relu(nn::dense(features, head.layers[0].weights, head.layers[0].bias));
  auto d1 = nn::dropout(h1, dropout_rate, rng.split(1), training);
  Vector<Scalar> h2 = nn::relu(nn::dense(d1.output, head.layers[1].weights, head.layers[1].bias));
  auto d2 = nn::dropout(h2, dropout_rate, rng.split(2), training);
  Vector<Scalar> probs = nn::sigmoid(nn::dense(d2.output, head.layers[2].weights, head.layers[2].bias));
  if (cache) *cache = {features, std::move(h1), std::move(d1), std::move(h2), std::move(d2), probs};
  return probs;
}

// `grad_logits` is dL/d(pre-sigmoid output). Returns dL/dfeatures; parameter
// gradients accumulate into `grads` when non-null and the head is trainable.
template <typename Scalar>
Vector<Scalar> head_backward(const DenseHead<Scalar>& head, const HeadCache<Scalar>& cache,
                             const Vector<Scalar>& grad_logits, DenseHead<Scalar>* grads) {
  const bool accumulate = grads != nullptr && head.trainable;
  auto gw = [&](std::size_t i) { return accumulate ? &grads->layers[i].weights : nullptr; };
  auto gb = [&](std::size_t i) { return accumulate ? &grads->layers[i].bias : nullptr; };

  Vector<Scalar> g = nn::dense_backward(cache.drop2.output, head.layers[2].weights, grad_logits, gw(2), gb(2));
  g = nn::relu_backward(cache.hidden2, nn::dropout_backward(cache.drop2, g));
  g = nn::dense_backward(cache.drop1.output, head.layers[1].weights, g, gw(1), gb(1));
  g = nn::relu_backward(cache.hidden1, nn::dropout_backward(cache.drop1, g));
  return nn::dense_backward(cache.input, head.layers[0].weights, g, gw(0), gb(0));
}

// Head target for a binary decision: one unit -> [y], two units -> [1 - y, y].
template <typename Scalar>
Vector<Scalar> binary_target(Index units, int positive) {
  Vector<Scalar> t = Vector<Scalar>::Zero(units);
  if (units == 1) {
    t[0] = static_cast<Scalar>(positive);
  } else {
    t[positive ? units - 1 : 0] = Scalar(1);
  }
  return t;
}

// Mean per-unit BCE of sigmoid outputs against `target`, plus dL/dlogits.
template <typename Scalar>
Scalar head_loss(const Vector<Scalar>& probs, const Vector<Scalar>& target, Vector<Scalar>* grad_logits) {
  const auto units = static_cast<Scalar>(probs.size());
  Scalar loss(0);
  for (Index u = 0; u < probs.size(); ++u) loss += nn::bce_loss(probs[u], target[u]);
  if (grad_logits) {
    grad_logits->resize(probs.size());
    for (Index u = 0; u < probs.size(); ++u) (*grad_logits)[u] = nn::bce_grad_logit(probs[u], target[u]) / units;
  }
  return loss / units;
}

// Dropout stream for one sample: (seed, sample key, head index) -> per-layer splits.
inline CounterRng dropout_stream(std::uint64_t seed, std::uint64_t sample_key, std::uint64_t head) {
  return CounterRng(seed).split({sample_key, head});
}

// ---------------------------------------------------------------------------
// Network-level passes
// ---------------------------------------------------------------------------

// Per-task probability psi_j: the last unit of head j.
template <typename Scalar>
Vector<Scalar> pretext_probabilities(const PretextNetwork<Scalar>& net, const Vector<Scalar>& signal, Mode mode,
                                     double dropout_rate, std::uint64_t seed, std::uint64_t sample_key) {
  const Vector<Scalar> features = trunk_forward(net.trunk, net.arch, signal, nullptr);
  Vector<Scalar> psi(net.arch.task_count);
  for (int j = 0; j < net.arch.task_count; ++j) {
    const auto probs = head_forward(net.heads[j], features, dropout_rate, dropout_stream(seed, sample_key, j), mode,
                                    static_cast<HeadCache<Scalar>*>(nullptr));
    psi[j] = probs[probs.size() - 1];
  }
  return psi;
}

// batch: [B, L, 1] (or [B, L]); returns [B, task_count].
template <typename Scalar>
Tensor<Scalar> pretext_forward(const PretextNetwork<Scalar>& net, const Tensor<Scalar>& batch, Mode mode,
                               double dropout_rate = 0.6, std::uint64_t seed = 0) {
  if (batch.shape().size() < 2 || batch.dim(1) != net.arch.input_length ||
      (batch.shape().size() == 3 && batch.dim(2) != 1) || batch.shape().size() > 3) {
    throw ShapeError("pretext_forward: batch " + nn::shape_string(batch.shape()) + " is not [B, " +
                     std::to_string(net.arch.input_length) + ", 1]");
  }
  const Index b = batch.dim(0);
  Tensor<Scalar> out({b, static_cast<Index>(net.arch.task_count)});
  const auto rows = batch.matrix(b, net.arch.input_length);
  for (Index i = 0; i < b; ++i) {
    const Vector<Scalar> x = rows.row(i).transpose();
    out.matrix(b, net.arch.task_count).row(i) =
        pretext_probabilities(net, x, mode, dropout_rate, seed, static_cast<std::uint64_t>(i)).transpose();
  }
  return out;
}

// Forward + backward for one pretext sample with pseudo-label `task`. Adds
// grad_scale * d(sum_j alpha_j L_j)/dtheta into `grads`; returns per-task losses L_j.
template <typename Scalar>
std::vector<double> pretext_sample_gradients(const PretextNetwork<Scalar>& net, const Vector<Scalar>& signal,
                                             int task, std::span<const double> alphas, double dropout_rate,
                                             std::uint64_t seed, std::uint64_t sample_key, Scalar grad_scale,
                                             PretextNetwork<Scalar>& grads) {
  const int tasks = net.arch.task_count;
  if (static_cast<int>(alphas.size()) != tasks) throw ShapeError("pretext_sample_gradients: need one alpha per task");
  TrunkCache<Scalar> trunk_cache;
  const Vector<Scalar> features = trunk_forward(net.trunk, net.arch, signal, &trunk_cache);
  Vector<Scalar> grad_features = Vector<Scalar>::Zero(features.size());
  std::vector<double> losses(static_cast<std::size_t>(tasks));
  HeadCache<Scalar> cache;
  Vector<Scalar> grad_logits;
  for (int j = 0; j < tasks; ++j) {
    const auto& head = net.heads[j];
    const auto probs =
        head_forward(head, features, dropout_rate, dropout_stream(seed, sample_key, j), Mode::Training, &cache);
    const auto target = binary_target<Scalar>(head.units(), task == j ? 1 : 0);
    losses[j] = static_cast<double>(head_loss(probs, target, &grad_logits));
    grad_logits *= grad_scale * static_cast<Scalar>(alphas[j]);
    grad_features += head_backward(head, cache, grad_logits, &grads.heads[j]);
  }
  trunk_backward(net.trunk, trunk_cache, grad_features, grads.trunk);
  return losses;
}

template <typename Scalar>
Vector<Scalar> emotion_probabilities_from_features(const EmotionNetwork<Scalar>& net, const Vector<Scalar>& features,
                                                   Mode mode, double dropout_rate, std::uint64_t seed,
                                                   std::uint64_t sample_key) {
  return head_forward(net.head, features, dropout_rate, dropout_stream(seed, sample_key, 0), mode,
                      static_cast<HeadCache<Scalar>*>(nullptr));
}

// batch: [B, L, 1]; returns [B, classes] of per-class sigmoid outputs rho.
template <typename Scalar>
Tensor<Scalar> emotion_forward(const EmotionNetwork<Scalar>& net, const Tensor<Scalar>& batch, Mode mode,
                               double dropout_rate = 0.6, std::uint64_t seed = 0) {
  if (batch.shape().size() < 2 || batch.dim(1) != net.arch.input_length ||
      (batch.shape().size() == 3 && batch.dim(2) != 1) || batch.shape().size() > 3) {
    throw ShapeError("emotion_forward: batch " + nn::shape_string(batch.shape()) + " is not [B, " +
                     std::to_string(net.arch.input_length) + ", 1]");
  }
  const Index b = batch.dim(0);
  const Index classes = net.head.units();
  Tensor<Scalar> out({b, classes});
  const auto rows = batch.matrix(b, net.arch.input_length);
  for (Index i = 0; i < b; ++i) {
    const Vector<Scalar> x = rows.row(i).transpose();
    const auto features = trunk_forward(net.trunk, net.arch, x, nullptr);
    out.matrix(b, classes).row(i) =
        emotion_probabilities_from_features(net, features, mode, dropout_rate, seed, static_cast<std::uint64_t>(i))
            .transpose();
  }
  return out;
}

// One labeled sample through the emotion head only (trunk features precomputed).
template <typename Scalar>
double emotion_head_gradients(const DenseHead<Scalar>& head, const Vector<Scalar>& features, int label,
                              double dropout_rate, const CounterRng& rng, Scalar grad_scale, DenseHead<Scalar>& grads,
                              Vector<Scalar>* grad_features = nullptr) {
  HeadCache<Scalar> cache;
  const auto probs = head_forward(head, features, dropout_rate, rng, Mode::Training, &cache);
  Vector<Scalar> grad_logits;
  const auto loss = head_loss(probs, binary_target<Scalar>(head.units(), label), &grad_logits);
  grad_logits *= grad_scale;
  Vector<Scalar> gf = head_backward(head, cache, grad_logits, &grads);
  if (grad_features) *grad_features = std::move(gf);
  return static_cast<double>(loss);
}

// End-to-end pass for one labeled sample (used when the trunk is trainable).
template <typename Scalar>
double emotion_sample_gradients(const EmotionNetwork<Scalar>& net, const Vector<Scalar>& signal, int label,
                                double dropout_rate, std::uint64_t seed, std::uint64_t sample_key, Scalar grad_scale,
                                EmotionNetwork<Scalar>& grads) {
  TrunkCache<Scalar> trunk_cache;
  const bool trunk_trainable = !net.trunk.frozen();
  const Vector<Scalar> features = trunk_forward(net.trunk, net.arch, signal, trunk_trainable ? &trunk_cache : nullptr);
  Vector<Scalar> grad_features;
  const double loss = emotion_head_gradients(net.head, features, label, dropout_rate,
                                             dropout_stream(seed, sample_key, 0), grad_scale, grads.head,
                                             &grad_features);
  if (trunk_trainable) trunk_backward(net.trunk, trunk_cache, grad_features, grads.trunk);
  return loss;
}

// beta * sum w^2 over trainable, regularized tensors; adds 2 beta w into grads.
template <typename Scalar>
double apply_l2(const std::vector<ParamRef<Scalar>>& params, const std::vector<ParamRef<Scalar>>& grads, double beta) {
  double penalty = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable || !params[i].regularized) continue;
    penalty += static_cast<double>(nn::l2_penalty(*params[i].tensor, beta));
    nn::l2_penalty_backward(*params[i].tensor, beta, *grads[i].tensor);
  }
  return penalty;
}

template <typename Scalar>
Index argmax(const Vector<Scalar>& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace ecgssl::models
