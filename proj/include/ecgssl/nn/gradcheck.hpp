#pragma once

#include "ecgssl/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace ecgssl::nn {

struct CheckedTensor {
  std::string name;
  Tensor<double>* value;            // perturbed in place, restored afterwards
  const Tensor<double>* analytic;   // gradient computed by the backward pass
  bool frozen = false;              // analytic gradient must be exactly zero
};

struct GradcheckResult {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  Index entries_checked = 0;
  bool frozen_gradients_zero = true;
  bool passed = false;
};

// |a - n| / max(|a|, |n|, floor); the floor keeps round-off on near-zero gradients
// from dominating the ratio.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Central finite differences with step h on every entry of every non-frozen tensor;
// frozen tensors are only checked for an all-zero analytic gradient.
template <typename LossFn>
GradcheckResult gradcheck(std::string name, LossFn&& loss, const std::vector<CheckedTensor>& entries,
                          double tolerance = 1e-4, double h = 1e-4) {
  GradcheckResult r;
  r.name = std::move(name);
  for (const auto& e : entries) {
    if (e.value->shape() != e.analytic->shape()) {
      throw ShapeError("gradcheck: gradient for '" + e.name + "' has shape " + shape_string(e.analytic->shape()) +
                       ", parameter has " + shape_string(e.value->shape()));
    }
    if (e.frozen) {
      r.frozen_gradients_zero = r.frozen_gradients_zero && e.analytic->flat().isZero(0.0);
      continue;
    }
    auto& flat = e.value->flat();
    for (Index i = 0; i < flat.size(); ++i) {
      const double saved = flat[i];
      flat[i] = saved + h;
      const double up = loss();
      flat[i] = saved - h;
      const double down = loss();
      flat[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = e.analytic->flat()[i];
      r.max_rel_error = std::max(r.max_rel_error, relative_error(analytic, numeric));
      r.max_abs_error = std::max(r.max_abs_error, std::abs(analytic - numeric));
      ++r.entries_checked;
    }
  }
  r.passed = r.frozen_gradients_zero && r.max_rel_error < tolerance;
  return r;
}

struct GradcheckOptions {
  std::uint64_t seed = 20200504;
  double tolerance = 1e-4;
  double step = 1e-4;
  // Test fixture: negates the analytic gradient of the named check.
  std::string inject_sign_error;
};

std::vector<std::string> gradcheck_suite_names();

// Every layer, loss and composite fragment, evaluated in double precision.
std::vector<GradcheckResult> run_gradcheck_suite(const GradcheckOptions& options = {});

}  // namespace ecgssl::nn
