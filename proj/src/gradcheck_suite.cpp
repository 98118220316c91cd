#include "ecgssl/nn/gradcheck.hpp"

#include "ecgssl/models.hpp"
#include "ecgssl/nn/layers.hpp"
#include "ecgssl/nn/losses.hpp"
#include "ecgssl/random.hpp"

#include <functional>

namespace ecgssl::nn {

namespace {

using T = Tensor<double>;
using Mat = Matrix<double>;
using Vec = Vector<double>;

T random_tensor(Shape shape, CounterRng& rng, double lo = -1.0, double hi = 1.0) {
  T t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t.flat()[i] = rng.uniform(lo, hi);
  return t;
}

// Values at least `gap` away from zero (keeps relu kinks out of the FD stencil).
T away_from_zero(Shape shape, CounterRng& rng, double gap = 0.05) {
  T t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) {
    const double mag = rng.uniform(gap, 1.0);
    t.flat()[i] = rng.uniform() < 0.5 ? -mag : mag;
  }
  return t;
}

// Distinct values spaced well beyond the FD step (keeps pooling argmaxes stable).
T spaced_values(Shape shape, CounterRng& rng) {
  T t(std::move(shape));
  std::vector<double> v(static_cast<std::size_t>(t.size()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.01 * static_cast<double>(i) - 0.5 * 0.01 * v.size();
  rng.shuffle(v.begin(), v.end());
  for (Index i = 0; i < t.size(); ++i) t.flat()[i] = v[static_cast<std::size_t>(i)];
  return t;
}

Mat as_matrix(const T& t) { return t.matrix(t.dim(0), t.size() / t.dim(0)); }
Vec as_vector(const T& t) { return t.flat(); }

T wrap(const Mat& m) { return T({m.rows(), m.cols()}, Eigen::Map<const Vec>(m.data(), m.size())); }
T wrap(const Vec& v) { return T({v.size()}, v); }

// Scalar projection sum(r .* y) turns any layer output into a loss.
double project(const T& weights, const Mat& y) { return weights.flat().dot(Eigen::Map<const Vec>(y.data(), y.size())); }
double project(const T& weights, const Vec& y) { return weights.flat().dot(y); }

struct Check {
  std::string name;
  std::function<GradcheckResult(CounterRng&, const GradcheckOptions&)> run;
};

GradcheckResult finish(std::string name, const GradcheckOptions& opt, const std::function<double()>& loss,
                       std::vector<CheckedTensor> entries, std::vector<T*> analytic) {
  if (opt.inject_sign_error == name) {
    for (auto* a : analytic) a->flat() = -a->flat();
  }
  return gradcheck(std::move(name), loss, entries, opt.tolerance, opt.step);
}

GradcheckResult check_conv(const std::string& name, Index kernel, CounterRng& rng, const GradcheckOptions& opt) {
  auto x = random_tensor({24, 3}, rng);
  auto w = random_tensor({kernel, 3, 4}, rng);
  auto b = random_tensor({4}, rng);
  auto r = random_tensor({24, 4}, rng);
  auto loss = [&] { return project(r, conv1d(as_matrix(x), w, b)); };
  T gw({kernel, 3, 4}), gb({4});
  Mat gx;
  conv1d_backward(as_matrix(x), w, as_matrix(r), &gw, &gb, &gx);
  T gxt = wrap(gx);
  return finish(name, opt, loss, {{"input", &x, &gxt}, {"kernel", &w, &gw}, {"bias", &b, &gb}}, {&gxt, &gw, &gb});
}

const std::vector<Check>& checks() {
  static const std::vector<Check> all = {
      {"conv1d", [](CounterRng& rng, const GradcheckOptions& o) { return check_conv("conv1d", 5, rng, o); }},
      {"conv1d_even_kernel",
       [](CounterRng& rng, const GradcheckOptions& o) { return check_conv("conv1d_even_kernel", 8, rng, o); }},
      {"maxpool1d",
       [](CounterRng& rng, const GradcheckOptions& o) {
         auto x = spaced_values({20, 3}, rng);
         auto r = random_tensor({7, 3}, rng);
         auto loss = [&] { return project(r, maxpool1d(as_matrix(x), 8, 2).output); };
         const auto fwd = maxpool1d(as_matrix(x), 8, 2);
         T gx = wrap(maxpool1d_backward(fwd, 20, as_matrix(r)));
         return finish("maxpool1d", o, loss, {{"input", &x, &gx}}, {&gx});
       }},
      {"global_maxpool",
       [](CounterRng& rng, const GradcheckOptions& o) {
         auto x = spaced_values({12, 4}, rng);
         auto r = random_tensor({4}, rng);
         auto loss = [&] { return project(r, global_maxpool(as_matrix(x)).output); };
         T gx = wrap(global_maxpool_backward(global_maxpool(as_matrix(x)), 12, as_vector(r)));
         return finish("global_maxpool", o, loss, {{"input", &x, &gx}}, {&gx});
       }},
      {"dense",
       [](CounterRng& rng, const GradcheckOptions& o) {
         auto x = random_tensor({8}, rng);
         auto w = random_tensor({8, 5}, rng);
         auto b = random_tensor({5}, rng);
         auto r = random_tensor({5}, rng);
         auto loss = [&] { return project(r, dense(as_vector(x), w, b)); };
         T gw({8, 5}), gb({5});
         T gx = wrap(dense_backward(as_vector(x), w, as_vector(r), &gw, &gb));
         return finish("dense", o, loss, {{"input", &x, &gx}, {"weights", &w, &gw}, {"bias", &b, &gb}},
                       {&gx, &gw, &gb});
       }},
      {"relu",
       [](CounterRng& rng, const GradcheckOptions& o) {
         auto x = away_from_zero({10}, rng);
         auto r = random_tensor({10}, rng);
         auto loss = [&] { return project(r, Vec(relu(as_vector(x)))); };
         const Vec y = relu(as_vector(x));
         T gx = wrap(Vec(relu_backward(y, as_vector(r))));
         return finish("relu", o, loss, {{"input", &x, &gx}}, {&gx});
       }},
      {"sigmoid",
       [](CounterRng& rng, const GradcheckOptions& o) {
         auto x = random_tensor({10}, rng, -4.0, 4.0);
         auto r = random_tensor({10}, rng);
         auto loss = [&] { return project(r, Vec(sigmoid(as_vector(x)))); };
         const Vec y = sigmoid(as_vector(x));
         T gx = wrap(Vec(sigmoid_backward(y, as_vector(r))));
         return finish("sigmoid", o, loss, {{"input", &x, &gx}}, {&gx});
       }},
      {"dropout_off",
       [](CounterRng& rng, const GradcheckOptions& o) {
         auto x = random_tensor({16}, rng);
         auto r = random_tensor({16}, rng);
         const CounterRng stream = rng.split(99);
         auto loss = [&] { return project(r, dropout(as_vector(x), 0.6, stream, false).output); };
         const auto fwd = dropout(as_vector(x), 0.6, stream, false);
         T gx = wrap(dropout_backward(fwd, as_vector(r)));
         return finish("dropout_off", o, loss, {{"input", &x, &gx}}, {&gx});
       }},
      {"dropout_fixed_mask",
       [](CounterRng& rng, const GradcheckOptions& o) {
         auto x = random_tensor({16}, rng);
         auto r = random_tensor({16}, rng);
         const CounterRng stream = rng.split(98);
         auto loss = [&] { return project(r, dropout(as_vector(x), 0.6, stream, true).output); };
         const auto fwd = dropout(as_vector(x), 0.6, stream, true);
         T gx = wrap(dropout_backward(fwd, as_vector(r)));
         return finish("dropout_fixed_mask", o, loss, {{"input", &x, &gx}}, {&gx});
       }},
      {"bce",
       [](CounterRng& rng, const GradcheckOptions& o) {
         auto p = random_tensor({6}, rng, 0.05, 0.95);
         Vec labels(6);
         for (Index i = 0; i < 6; ++i) labels[i] = static_cast<double>(i % 2);
         auto loss = [&] {
           double s = 0.0;
           for (Index i = 0; i < 6; ++i) s += bce_loss(p.flat()[i], labels[i]);
           return s;
         };
         T gp({6});
         for (Index i = 0; i < 6; ++i) gp.flat()[i] = bce_grad_prob(p.flat()[i], labels[i]);
         return finish("bce", o, loss, {{"probs", &p, &gp}}, {&gp});
       }},
      {"cross_entropy",
       [](CounterRng& rng, const GradcheckOptions& o) {
         auto p = random_tensor({4}, rng, 0.05, 0.95);
         Vec onehot = Vec::Zero(4);
         onehot[2] = 1.0;
         auto loss = [&] { return cross_entropy(as_vector(p), onehot); };
         T gp = wrap(cross_entropy_grad(as_vector(p), onehot));
         return finish("cross_entropy", o, loss, {{"probs", &p, &gp}}, {&gp});
       }},
      {"l2",
       [](CounterRng& rng, const GradcheckOptions& o) {
         auto w = random_tensor({5, 3}, rng);
         auto loss = [&] { return l2_penalty(w, 1e-4); };
         T gw({5, 3});
         l2_penalty_backward(w, 1e-4, gw);
         return finish("l2", o, loss, {{"weights", &w, &gw}}, {&gw});
       }},
      {"dense_sigmoid_bce",
       [](CounterRng& rng, const GradcheckOptions& o) {
         auto x = random_tensor({8}, rng);
         auto w = random_tensor({8, 1}, rng);
         auto b = random_tensor({1}, rng);
         auto loss = [&] { return bce_loss(sigmoid(dense(as_vector(x), w, b)[0]), 1.0); };
         const double prob = sigmoid(dense(as_vector(x), w, b)[0]);
         T gw({8, 1}), gb({1});
         Vec g(1);
         g[0] = bce_grad_logit(prob, 1.0);
         T gx = wrap(dense_backward(as_vector(x), w, g, &gw, &gb));
         return finish("dense_sigmoid_bce", o, loss, {{"input", &x, &gx}, {"weights", &w, &gw}, {"bias", &b, &gb}},
                       {&gx, &gw, &gb});
       }},
      {"conv_relu_globalpool_dense",
       [](CounterRng& rng, const GradcheckOptions& o) {
         auto x = random_tensor({32, 1}, rng);
         auto k = random_tensor({8, 1, 2}, rng);
         auto kb = random_tensor({2}, rng);
         auto w = random_tensor({2, 3}, rng);
         auto b = random_tensor({3}, rng);
         const Vec labels = (Vec(3) << 1.0, 0.0, 1.0).finished();
         auto forward = [&](Mat* act, GlobalPoolResult<double>* pool, Vec* probs) {
           const Mat a = relu(conv1d(as_matrix(x), k, kb));
           const auto g = global_maxpool(a);
           const Vec p = sigmoid(dense(g.output, w, b));
           if (act) *act = a;
           if (pool) *pool = g;
           if (probs) *probs = p;
           double s = 0.0;
           for (Index i = 0; i < 3; ++i) s += bce_loss(p[i], labels[i]);
           return s;
         };
         auto loss = [&] { return forward(nullptr, nullptr, nullptr); };
         Mat act;
         GlobalPoolResult<double> pool;
         Vec probs;
         forward(&act, &pool, &probs);
         Vec gz(3);
         for (Index i = 0; i < 3; ++i) gz[i] = bce_grad_logit(probs[i], labels[i]);
         T gw({2, 3}), gb({3}), gk({8, 1, 2}), gkb({2});
         const Vec gfeat = dense_backward(pool.output, w, gz, &gw, &gb);
         const Mat gact = global_maxpool_backward(pool, act.rows(), gfeat);
         const Mat gpre = relu_backward(act, gact);
         Mat gx;
         conv1d_backward(as_matrix(x), k, gpre, &gk, &gkb, &gx);
         T gxt = wrap(gx);
         return finish("conv_relu_globalpool_dense", o, loss,
                       {{"input", &x, &gxt}, {"kernel", &k, &gk}, {"conv_bias", &kb, &gkb}, {"weights", &w, &gw},
                        {"bias", &b, &gb}},
                       {&gxt, &gk, &gkb, &gw, &gb});
       }},
      {"pretext_network_small",
       [](CounterRng& rng, const GradcheckOptions& o) {
         models::ArchitectureSpec arch;
         arch.input_length = 40;
         arch.blocks = {{4, 2}, {3, 3}, {2, 3}};
         arch.pool = 3;
         arch.pool_stride = 2;
         arch.task_count = 3;
         arch.pretext_hidden = 4;
         auto net = models::PretextNetwork<double>::build(arch, rng.next_u64());
         for (auto& p : net.parameters()) {
           for (Index i = 0; i < p.tensor->size(); ++i) p.tensor->flat()[i] += rng.uniform(-0.1, 0.1);
         }
         Vec signal(arch.input_length);
         for (Index i = 0; i < signal.size(); ++i) signal[i] = rng.uniform(-1.0, 1.0);
         const std::vector<double> alphas = {0.5, 0.3, 0.2};
         const std::uint64_t seed = rng.next_u64();
         auto loss = [&] {
           auto scratch = models::PretextNetwork<double>::zeros(arch);
           const auto l = models::pretext_sample_gradients(net, signal, 1, alphas, 0.3, seed, 0, 1.0, scratch);
           return multitask_loss(l, alphas);
         };
         auto grads = models::PretextNetwork<double>::zeros(arch);
         models::pretext_sample_gradients(net, signal, 1, alphas, 0.3, seed, 0, 1.0, grads);
         auto params = net.parameters();
         auto gparams = grads.parameters();
         std::vector<CheckedTensor> entries;
         std::vector<T*> analytic;
         for (std::size_t i = 0; i < params.size(); ++i) {
           entries.push_back({params[i].name, params[i].tensor, gparams[i].tensor, false});
           analytic.push_back(gparams[i].tensor);
         }
         return finish("pretext_network_small", o, loss, entries, analytic);
       }},
      {"frozen_trunk",
       [](CounterRng& rng, const GradcheckOptions& o) {
         models::ArchitectureSpec arch;
         arch.input_length = 40;
         arch.blocks = {{4, 2}, {3, 3}, {2, 3}};
         arch.pool = 3;
         arch.pool_stride = 2;
         arch.emotion_hidden = 4;
         auto source = models::PretextNetwork<double>::build(arch, rng.next_u64());
         auto net = models::EmotionNetwork<double>::with_trunk(
             arch, models::transfer_weights(source.trunk, arch, arch), rng.next_u64());
         for (auto& p : net.parameters()) {
           for (Index i = 0; i < p.tensor->size(); ++i) p.tensor->flat()[i] += rng.uniform(-0.1, 0.1);
         }
         Vec signal(arch.input_length);
         for (Index i = 0; i < signal.size(); ++i) signal[i] = rng.uniform(-1.0, 1.0);
         const std::uint64_t seed = rng.next_u64();
         auto loss = [&] {
           auto scratch = models::EmotionNetwork<double>::zeros(arch);
           return models::emotion_sample_gradients(net, signal, 1, 0.3, seed, 0, 1.0, scratch);
         };
         auto grads = models::EmotionNetwork<double>::zeros(arch);
         models::emotion_sample_gradients(net, signal, 1, 0.3, seed, 0, 1.0, grads);
         auto params = net.parameters();
         auto gparams = grads.parameters();
         std::vector<CheckedTensor> entries;
         std::vector<T*> analytic;
         for (std::size_t i = 0; i < params.size(); ++i) {
           entries.push_back({params[i].name, params[i].tensor, gparams[i].tensor, !params[i].trainable});
           analytic.push_back(gparams[i].tensor);
         }
         return finish("frozen_trunk", o, loss, entries, analytic);
       }},
  };
  return all;
}

}  // namespace

std::vector<std::string> gradcheck_suite_names() {
  std::vector<std::string> out;
  for (const auto& c : checks()) out.push_back(c.name);
  return out;
}

std::vector<GradcheckResult> run_gradcheck_suite(const GradcheckOptions& options) {
  std::vector<GradcheckResult> out;
  const CounterRng root(options.seed);
  std::uint64_t index = 0;
  for (const auto& c : checks()) {
    CounterRng rng = root.split(index++);
    out.push_back(c.run(rng, options));
  }
  return out;
}

}  // namespace ecgssl::nn
