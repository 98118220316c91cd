#pragma once

// Naive nested-loop reference implementations used as test oracles.

#include "ecgssl/nn/layers.hpp"
#include "ecgssl/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include <cstdint>
#include <vector>

namespace oracle {

using ecgssl::nn::Index;

// x[t][c], kernel[k][c][f]; zero "same" padding with floor((K-1)/2) samples before.
inline std::vector<std::vector<double>> conv1d(const std::vector<std::vector<double>>& x,
                                               const std::vector<double>& kernel, const std::vector<double>& bias,
                                               Index k_size, Index c_in, Index c_out) {
  const auto length = static_cast<Index>(x.size());
  const Index before = (k_size - 1) / 2;
  std::vector<std::vector<double>> y(static_cast<std::size_t>(length), std::vector<double>(static_cast<std::size_t>(c_out)));
  for (Index t = 0; t < length; ++t) {
    for (Index f = 0; f < c_out; ++f) {
      double acc = bias[static_cast<std::size_t>(f)];
      for (Index k = 0; k < k_size; ++k) {
        const Index src = t + k - before;
        if (src < 0 || src >= length) continue;
        for (Index c = 0; c < c_in; ++c) {
          acc += x[static_cast<std::size_t>(src)][static_cast<std::size_t>(c)] *
                 kernel[static_cast<std::size_t>((k * c_in + c) * c_out + f)];
        }
      }
      y[static_cast<std::size_t>(t)][static_cast<std::size_t>(f)] = acc;
    }
  }
  return y;
}

inline std::vector<std::vector<double>> maxpool1d(const std::vector<std::vector<double>>& x, Index pool, Index stride) {
  const auto length = static_cast<Index>(x.size());
  const std::size_t channels = x.front().size();
  std::vector<std::vector<double>> y;
  for (Index start = 0; start + pool <= length; start += stride) {
    std::vector<double> row(channels);
    for (std::size_t c = 0; c < channels; ++c) {
      double m = x[static_cast<std::size_t>(start)][c];
      for (Index j = start; j < start + pool; ++j) m = std::max(m, x[static_cast<std::size_t>(j)][c]);
      row[c] = m;
    }
    y.push_back(row);
  }
  return y;
}

// weights[i][o] flattened row-major.
inline std::vector<double> dense(const std::vector<double>& x, const std::vector<double>& weights,
                                 const std::vector<double>& bias) {
  const std::size_t din = x.size(), dout = bias.size();
  std::vector<double> y(dout);
  for (std::size_t o = 0; o < dout; ++o) {
    double acc = bias[o];
    for (std::size_t i = 0; i < din; ++i) acc += x[i] * weights[i * dout + o];
    y[o] = acc;
  }
  return y;
}

// Small deterministic generator so oracle inputs do not share code with the library RNG.
struct Lcg {
  std::uint64_t state;
  double uniform(double lo, double hi) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return lo + (hi - lo) * static_cast<double>(state >> 11) * 0x1.0p-53;
  }
  Index integer(Index lo, Index hi) { return lo + static_cast<Index>(uniform(0.0, 1.0) * static_cast<double>(hi - lo + 1)); }
};

// Max |library - oracle| over `instances` random conv1d, maxpool1d and dense problems
// with lengths up to 64.
struct OracleErrors {
  double conv = 0.0;
  double maxpool = 0.0;
  double dense = 0.0;
};

inline OracleErrors compare_with_library(int instances, std::uint64_t seed) {
  using namespace ecgssl::nn;
  Lcg rng{seed};
  OracleErrors e;
  for (int n = 0; n < instances; ++n) {
    // conv1d
    {
      const Index length = rng.integer(1, 64), k = rng.integer(1, 9), cin = rng.integer(1, 4), cout = rng.integer(1, 4);
      std::vector<std::vector<double>> x(static_cast<std::size_t>(length), std::vector<double>(static_cast<std::size_t>(cin)));
      Matrix<double> xm(length, cin);
      for (Index t = 0; t < length; ++t) {
        for (Index c = 0; c < cin; ++c) xm(t, c) = x[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] = rng.uniform(-1, 1);
      }
      Tensor<double> kernel({k, cin, cout}), bias({cout});
      std::vector<double> kv(static_cast<std::size_t>(kernel.size())), bv(static_cast<std::size_t>(cout));
      for (Index i = 0; i < kernel.size(); ++i) kernel.flat()[i] = kv[static_cast<std::size_t>(i)] = rng.uniform(-1, 1);
      for (Index i = 0; i < cout; ++i) bias.flat()[i] = bv[static_cast<std::size_t>(i)] = rng.uniform(-1, 1);
      const auto got = ecgssl::nn::conv1d(xm, kernel, bias);
      const auto want = oracle::conv1d(x, kv, bv, k, cin, cout);
      for (Index t = 0; t < length; ++t) {
        for (Index f = 0; f < cout; ++f) {
          e.conv = std::max(e.conv, std::abs(got(t, f) - want[static_cast<std::size_t>(t)][static_cast<std::size_t>(f)]));
        }
      }
    }
    // maxpool1d
    {
      const Index pool = rng.integer(1, 8), stride = rng.integer(1, 3), length = rng.integer(pool, 64), ch = rng.integer(1, 4);
      std::vector<std::vector<double>> x(static_cast<std::size_t>(length), std::vector<double>(static_cast<std::size_t>(ch)));
      Matrix<double> xm(length, ch);
      for (Index t = 0; t < length; ++t) {
        // Coarse values make ties common.
        for (Index c = 0; c < ch; ++c) xm(t, c) = x[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] = std::round(rng.uniform(-3, 3));
      }
      const auto got = ecgssl::nn::maxpool1d(xm, pool, stride);
      const auto want = oracle::maxpool1d(x, pool, stride);
      if (static_cast<std::size_t>(got.output.rows()) != want.size()) {
        e.maxpool = INFINITY;
        continue;
      }
      for (Index t = 0; t < got.output.rows(); ++t) {
        for (Index c = 0; c < ch; ++c) {
          e.maxpool = std::max(e.maxpool, std::abs(got.output(t, c) - want[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)]));
        }
      }
    }
    // dense
    {
      const Index din = rng.integer(1, 64), dout = rng.integer(1, 16);
      std::vector<double> x(static_cast<std::size_t>(din)), w(static_cast<std::size_t>(din * dout)), b(static_cast<std::size_t>(dout));
      Vector<double> xv(din);
      Tensor<double> wt({din, dout}), bt({dout});
      for (Index i = 0; i < din; ++i) xv[i] = x[static_cast<std::size_t>(i)] = rng.uniform(-1, 1);
      for (Index i = 0; i < din * dout; ++i) wt.flat()[i] = w[static_cast<std::size_t>(i)] = rng.uniform(-1, 1);
      for (Index i = 0; i < dout; ++i) bt.flat()[i] = b[static_cast<std::size_t>(i)] = rng.uniform(-1, 1);
      const auto got = ecgssl::nn::dense(xv, wt, bt);
      const auto want = oracle::dense(x, w, b);
      for (Index o = 0; o < dout; ++o) e.dense = std::max(e.dense, std::abs(got[o] - want[static_cast<std::size_t>(o)]));
    }
  }
  return e;
}

}  // namespace oracle
