#pragma once

#include "ecgssl/nn/tensor.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace ecgssl::nn {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moments are keyed by parameter name and exist only for trainable parameters.
template <typename Scalar>
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(AdamConfig config) : config_(config) {}

  [[nodiscard]] const AdamConfig& config() const noexcept { return config_; }
  [[nodiscard]] long step_count() const noexcept { return t_; }
  [[nodiscard]] bool has_moments(const std::string& name) const { return moments_.count(name) != 0; }
  [[nodiscard]] std::size_t moment_count() const noexcept { return moments_.size(); }

  // One bias-corrected Adam update. `params` and `grads` come from two containers of
  // the same architecture, so entries pair up by position.
  void step(const std::vector<ParamRef<Scalar>>& params, const std::vector<ParamRef<Scalar>>& grads) {
    if (params.size() != grads.size()) throw ShapeError("adam_step: parameter and gradient lists differ");
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const auto b1 = static_cast<Scalar>(config_.beta1);
    const auto b2 = static_cast<Scalar>(config_.beta2);
    const auto step_size = static_cast<Scalar>(config_.lr / c1);
    const auto inv_sqrt_c2 = static_cast<Scalar>(1.0 / std::sqrt(c2));
    const auto eps = static_cast<Scalar>(config_.eps);

    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& p = params[i];
      if (!p.trainable) continue;
      const auto& g = grads[i].tensor->flat();
      if (grads[i].name != p.name || g.size() != p.tensor->size()) {
        throw ShapeError("adam_step: gradient for '" + p.name + "' does not match the parameter");
      }
      auto [it, inserted] = moments_.try_emplace(p.name);
      auto& [m, v] = it->second;
      if (inserted) {
        m = Vector<Scalar>::Zero(g.size());
        v = Vector<Scalar>::Zero(g.size());
      }
      m = b1 * m + (Scalar(1) - b1) * g;
      v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
      p.tensor->flat().array() -=
          step_size * m.array() / ((v.array().sqrt() * inv_sqrt_c2) + eps);
    }
  }

 private:
  AdamConfig config_;
  long t_ = 0;
  std::map<std::string, std::pair<Vector<Scalar>, Vector<Scalar>>> moments_;
};

template <typename Scalar>
void adam_step(const std::vector<ParamRef<Scalar>>& params, const std::vector<ParamRef<Scalar>>& grads,
               AdamState<Scalar>& state) {
  state.step(params, grads);
}

}  // namespace ecgssl::nn
