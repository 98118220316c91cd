#pragma once

#include "ecgssl/nn/tensor.hpp"
#include "ecgssl/random.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>

namespace ecgssl::nn {

// ---------------------------------------------------------------------------
// conv1d
//
// Input L x C_in (time-major), kernel [K, C_in, C_out], bias [C_out], output
// L x C_out with "same" zero padding: floor((K-1)/2) samples before, the rest after.
//
//   y[t, o] = b[o] + sum_k sum_c x[t + k - pad_before, c] * w[k, c, o]
//
// The padded input is flattened row-major, so the K*C_in receptive field of output
// row t is the contiguous slice starting at t*C_in. The im2col matrix is therefore a
// strided view with outer stride C_in and the layer reduces to one GEMM.
// ---------------------------------------------------------------------------

inline Index conv_pad_before(Index kernel) { return (kernel - 1) / 2; }

namespace detail {

template <typename Scalar>
void check_conv_shapes(const Matrix<Scalar>& input, const Tensor<Scalar>& kernel, const Tensor<Scalar>& bias) {
  if (kernel.shape().size() != 3 || kernel.dim(1) != input.cols() || bias.shape().size() != 1 ||
      bias.dim(0) != kernel.dim(2)) {
    throw ShapeError("conv1d: input " + shape_string({input.rows(), input.cols()}) + " incompatible with kernel " +
                     shape_string(kernel.shape()) + " and bias " + shape_string(bias.shape()));
  }
  if (input.rows() < 1) throw ShapeError("conv1d: empty input");
}

template <typename Scalar>
Vector<Scalar> pad_flat(const Matrix<Scalar>& input, Index kernel) {
  const Index channels = input.cols();
  Vector<Scalar> padded = Vector<Scalar>::Zero((input.rows() + kernel - 1) * channels);
  padded.segment(conv_pad_before(kernel) * channels, input.size()) =
      Eigen::Map<const Vector<Scalar>>(input.data(), input.size());
  return padded;
}

template <typename Scalar>
auto im2col(const Vector<Scalar>& padded, Index length, Index kernel, Index channels) {
  using Strided = Eigen::Map<const Matrix<Scalar>, 0, Eigen::OuterStride<>>;
  return Strided(padded.data(), length, kernel * channels, Eigen::OuterStride<>(channels));
}

}  // namespace detail

template <typename Scalar>
Matrix<Scalar> conv1d(const Matrix<Scalar>& input, const Tensor<Scalar>& kernel, const Tensor<Scalar>& bias) {
  detail::check_conv_shapes(input, kernel, bias);
  const Index k = kernel.dim(0), cin = kernel.dim(1), cout = kernel.dim(2);
  const auto padded = detail::pad_flat(input, k);
  Matrix<Scalar> out(input.rows(), cout);
  out.noalias() = detail::im2col(padded, input.rows(), k, cin) * kernel.matrix(k * cin, cout);
  out.rowwise() += bias.flat().transpose();
  return out;
}

// Accumulates parameter gradients into grad_kernel / grad_bias (either may be null)
// and, when grad_input is non-null, overwrites it with dL/dinput.
template <typename Scalar>
void conv1d_backward(const Matrix<Scalar>& input, const Tensor<Scalar>& kernel, const Matrix<Scalar>& grad_output,
                     Tensor<Scalar>* grad_kernel, Tensor<Scalar>* grad_bias, Matrix<Scalar>* grad_input) {
  const Index k = kernel.dim(0), cin = kernel.dim(1), cout = kernel.dim(2);
  const Index length = input.rows();
  if (grad_output.rows() != length || grad_output.cols() != cout) {
    throw ShapeError("conv1d_backward: grad_output " + shape_string({grad_output.rows(), grad_output.cols()}) +
                     " does not match output " + shape_string({length, cout}));
  }
  if (grad_kernel != nullptr) {
    const auto padded = detail::pad_flat(input, k);
    grad_kernel->matrix(k * cin, cout).noalias() +=
        detail::im2col(padded, length, k, cin).transpose() * grad_output;
  }
  if (grad_bias != nullptr) grad_bias->flat() += grad_output.colwise().sum().transpose();
  if (grad_input != nullptr) {
    Matrix<Scalar> grad_cols(length, k * cin);
    grad_cols.noalias() = grad_output * kernel.matrix(k * cin, cout).transpose();
    Vector<Scalar> grad_padded = Vector<Scalar>::Zero((length + k - 1) * cin);
    for (Index t = 0; t < length; ++t) grad_padded.segment(t * cin, k * cin) += grad_cols.row(t).transpose();
    grad_input->resize(length, cin);
    Eigen::Map<Vector<Scalar>>(grad_input->data(), length * cin) =
        grad_padded.segment(conv_pad_before(k) * cin, length * cin);
  }
}

// ---------------------------------------------------------------------------
// Activations. relu'(0) is taken as 0.
// ---------------------------------------------------------------------------

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(typename Derived::Scalar(0));
}

// Gradient through relu given the forward *output*.
template <typename DerivedOut, typename DerivedGrad>
auto relu_backward(const Eigen::MatrixBase<DerivedOut>& output, const Eigen::MatrixBase<DerivedGrad>& grad_output) {
  using Scalar = typename DerivedOut::Scalar;
  return (output.array() > Scalar(0)).select(grad_output.array(), Scalar(0)).matrix();
}

template <std::floating_point Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
  return x.unaryExpr([](typename Derived::Scalar v) { return sigmoid(v); });
}

// Gradient through sigmoid given the forward *output*.
template <typename DerivedOut, typename DerivedGrad>
auto sigmoid_backward(const Eigen::MatrixBase<DerivedOut>& output, const Eigen::MatrixBase<DerivedGrad>& grad_output) {
  using Scalar = typename DerivedOut::Scalar;
  return (grad_output.array() * output.array() * (Scalar(1) - output.array())).matrix();
}

// ---------------------------------------------------------------------------
// Pooling. Ties resolve to the lowest index, in both directions.
// ---------------------------------------------------------------------------

template <typename Scalar>
struct PoolResult {
  Matrix<Scalar> output;
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> argmax;  // input row per output cell
};

inline Index pooled_length(Index length, Index pool, Index stride) { return (length - pool) / stride + 1; }

template <typename Scalar>
PoolResult<Scalar> maxpool1d(const Matrix<Scalar>& input, Index pool = 8, Index stride = 2) {
  if (pool < 1 || stride < 1) throw ShapeError("maxpool1d: pool and stride must be positive");
  if (input.rows() < pool) {
    throw ShapeError("maxpool1d: input length " + std::to_string(input.rows()) + " shorter than pool " +
                     std::to_string(pool));
  }
  const Index out_len = pooled_length(input.rows(), pool, stride);
  const Index channels = input.cols();
  PoolResult<Scalar> r{Matrix<Scalar>(out_len, channels), {}};
  r.argmax.resize(out_len, channels);
  for (Index i = 0; i < out_len; ++i) {
    const Index start = i * stride;
    r.output.row(i) = input.row(start);
    r.argmax.row(i).setConstant(start);
    for (Index j = start + 1; j < start + pool; ++j) {
      for (Index c = 0; c < channels; ++c) {
        if (input(j, c) > r.output(i, c)) {
          r.output(i, c) = input(j, c);
          r.argmax(i, c) = j;
        }
      }
    }
  }
  return r;
}

template <typename Scalar>
Matrix<Scalar> maxpool1d_backward(const PoolResult<Scalar>& forward, Index input_length,
                                  const Matrix<Scalar>& grad_output) {
  Matrix<Scalar> grad = Matrix<Scalar>::Zero(input_length, grad_output.cols());
  for (Index i = 0; i < grad_output.rows(); ++i) {
    for (Index c = 0; c < grad_output.cols(); ++c) grad(forward.argmax(i, c), c) += grad_output(i, c);
  }
  return grad;
}

template <typename Scalar>
struct GlobalPoolResult {
  Vector<Scalar> output;
  Eigen::Matrix<Index, Eigen::Dynamic, 1> argmax;
};

template <typename Scalar>
GlobalPoolResult<Scalar> global_maxpool(const Matrix<Scalar>& input) {
  if (input.rows() < 1) throw ShapeError("global_maxpool: empty input");
  GlobalPoolResult<Scalar> r{Vector<Scalar>(input.cols()), Eigen::Matrix<Index, Eigen::Dynamic, 1>(input.cols())};
  for (Index c = 0; c < input.cols(); ++c) {
    Index best = 0;
    for (Index t = 1; t < input.rows(); ++t) {
      if (input(t, c) > input(best, c)) best = t;
    }
    r.output[c] = input(best, c);
    r.argmax[c] = best;
  }
  return r;
}

template <typename Scalar>
Matrix<Scalar> global_maxpool_backward(const GlobalPoolResult<Scalar>& forward, Index input_length,
                                       const Vector<Scalar>& grad_output) {
  Matrix<Scalar> grad = Matrix<Scalar>::Zero(input_length, grad_output.size());
  for (Index c = 0; c < grad_output.size(); ++c) grad(forward.argmax[c], c) = grad_output[c];
  return grad;
}

// ---------------------------------------------------------------------------
// dense: y = W^T x + b with W stored [D_in, D_out].
// ---------------------------------------------------------------------------

template <typename Scalar>
Vector<Scalar> dense(const Vector<Scalar>& input, const Tensor<Scalar>& weights, const Tensor<Scalar>& bias) {
  if (weights.shape().size() != 2 || weights.dim(0) != input.size() || bias.size() != weights.dim(1)) {
    throw ShapeError("dense: input " + shape_string({input.size()}) + " incompatible with weights " +
                     shape_string(weights.shape()) + " and bias " + shape_string(bias.shape()));
  }
  Vector<Scalar> out = bias.flat();
  out.noalias() += weights.matrix(weights.dim(0), weights.dim(1)).transpose() * input;
  return out;
}

template <typename Scalar>
Vector<Scalar> dense_backward(const Vector<Scalar>& input, const Tensor<Scalar>& weights,
                              const Vector<Scalar>& grad_output, Tensor<Scalar>* grad_weights,
                              Tensor<Scalar>* grad_bias) {
  const Index din = weights.dim(0), dout = weights.dim(1);
  if (grad_output.size() != dout) throw ShapeError("dense_backward: grad_output width mismatch");
  if (grad_weights != nullptr) grad_weights->matrix(din, dout).noalias() += input * grad_output.transpose();
  if (grad_bias != nullptr) grad_bias->flat() += grad_output;
  return weights.matrix(din, dout) * grad_output;
}

// ---------------------------------------------------------------------------
// Inverted dropout. In training mode each element survives with probability
// 1 - rate and is scaled by 1/(1 - rate); inference mode is the identity.
// ---------------------------------------------------------------------------

template <typename Scalar>
struct DropoutResult {
  Vector<Scalar> output;
  Vector<Scalar> mask;  // 0 or 1/(1 - rate); empty in inference mode
};

template <typename Scalar>
DropoutResult<Scalar> dropout(const Vector<Scalar>& input, double rate, CounterRng rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ParameterError("dropout: rate must be in [0, 1)");
  if (!training || rate == 0.0) return {input, {}};
  const double keep = 1.0 - rate;
  const auto survivor = static_cast<Scalar>(1.0 / keep);
  Vector<Scalar> mask(input.size());
  for (Index i = 0; i < mask.size(); ++i) mask[i] = rng.uniform() < keep ? survivor : Scalar(0);
  return {input.cwiseProduct(mask), std::move(mask)};
}

template <typename Scalar>
Vector<Scalar> dropout_backward(const DropoutResult<Scalar>& forward, const Vector<Scalar>& grad_output) {
  if (forward.mask.size() == 0) return grad_output;
  return grad_output.cwiseProduct(forward.mask);
}

}  // namespace ecgssl::nn
