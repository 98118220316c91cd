#pragma once

#include "ecgssl/errors.hpp"
#include "ecgssl/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace ecgssl::nn {

inline constexpr double kProbClamp = 1e-7;

template <typename Scalar>
Scalar clamp_prob(Scalar p) {
  return std::clamp(p, Scalar(kProbClamp), Scalar(1.0 - kProbClamp));
}

// Binary cross-entropy -[y log p + (1 - y) log(1 - p)] with p clamped to [1e-7, 1 - 1e-7].
template <typename Scalar>
Scalar bce_loss(Scalar prob, Scalar label) {
  const Scalar p = clamp_prob(prob);
  return -(label * std::log(p) + (Scalar(1) - label) * std::log(Scalar(1) - p));
}

// dL/dp of bce_loss (inside the clamp range).
template <typename Scalar>
Scalar bce_grad_prob(Scalar prob, Scalar label) {
  const Scalar p = clamp_prob(prob);
  return -label / p + (Scalar(1) - label) / (Scalar(1) - p);
}

// dL/dz for p = sigmoid(z): the fused sigmoid + BCE backward.
template <typename Scalar>
Scalar bce_grad_logit(Scalar prob, Scalar label) {
  return prob - label;
}

inline double multitask_loss(std::span<const double> per_task, std::span<const double> alphas) {
  if (per_task.size() != alphas.size()) throw ShapeError("multitask_loss: losses and alphas differ in length");
  bool any_positive = false;
  for (double a : alphas) {
    if (!(a >= 0.0)) throw ParameterError("multitask_loss: alphas must be non-negative");
    any_positive = any_positive || a > 0.0;
  }
  if (!any_positive) throw ParameterError("multitask_loss: alphas must not all be zero");
  double total = 0.0;
  for (std::size_t j = 0; j < per_task.size(); ++j) total += alphas[j] * per_task[j];
  return total;
}

// Categorical cross-entropy -sum_i y_i log p_i with clamped p.
template <typename Scalar>
Scalar cross_entropy(const Vector<Scalar>& probs, const Vector<Scalar>& onehot) {
  if (probs.size() != onehot.size()) throw ShapeError("cross_entropy: probs and labels differ in length");
  Scalar total(0);
  for (Index i = 0; i < probs.size(); ++i) {
    if (onehot[i] != Scalar(0)) total -= onehot[i] * std::log(clamp_prob(probs[i]));
  }
  return total;
}

template <typename Scalar>
Vector<Scalar> cross_entropy_grad(const Vector<Scalar>& probs, const Vector<Scalar>& onehot) {
  Vector<Scalar> g(probs.size());
  for (Index i = 0; i < probs.size(); ++i) g[i] = -onehot[i] / clamp_prob(probs[i]);
  return g;
}

// beta * sum w^2; gradient 2 * beta * w.
template <typename Scalar>
Scalar l2_penalty(const Tensor<Scalar>& weights, double beta) {
  if (!(beta >= 0.0)) throw ParameterError("l2_penalty: beta must be >= 0");
  return static_cast<Scalar>(beta) * weights.flat().squaredNorm();
}

template <typename Scalar>
void l2_penalty_backward(const Tensor<Scalar>& weights, double beta, Tensor<Scalar>& grad) {
  grad.flat() += static_cast<Scalar>(2.0 * beta) * weights.flat();
}

}  // namespace ecgssl::nn
