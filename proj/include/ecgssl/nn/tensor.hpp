#pragma once

#include "ecgssl/errors.hpp"

#include <Eigen/Core>

#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace ecgssl::nn {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline std::string shape_string(const Shape& shape) {
  std::ostringstream ss;
  ss << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) ss << (i ? "x" : "") << shape[i];
  ss << ']';
  return ss.str();
}

inline Index element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

// Shaped, row-major, flat parameter/activation buffer.
template <typename Scalar>
class Tensor {
 public:
  using VectorType = Vector<Scalar>;
  using MatrixMap = Eigen::Map<Matrix<Scalar>>;
  using ConstMatrixMap = Eigen::Map<const Matrix<Scalar>>;

  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(std::move(shape)) {
    for (auto d : shape_) {
      if (d <= 0) throw ShapeError("tensor dimensions must be positive, got " + shape_string(shape_));
    }
    data_ = VectorType::Zero(element_count(shape_));
  }

  Tensor(Shape shape, VectorType data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
      throw ShapeError("tensor data of length " + std::to_string(data_.size()) + " does not fit shape " +
                       shape_string(shape_));
    }
  }

  [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
  [[nodiscard]] Index size() const noexcept { return data_.size(); }
  [[nodiscard]] Index dim(std::size_t i) const { return shape_.at(i); }

  VectorType& flat() noexcept { return data_; }
  const VectorType& flat() const noexcept { return data_; }

  // View as a rows x cols row-major matrix; rows * cols must equal size().
  MatrixMap matrix(Index rows, Index cols) {
    check_view(rows, cols);
    return MatrixMap(data_.data(), rows, cols);
  }
  ConstMatrixMap matrix(Index rows, Index cols) const {
    check_view(rows, cols);
    return ConstMatrixMap(data_.data(), rows, cols);
  }

  void set_zero() { data_.setZero(); }

  template <typename To>
  Tensor<To> cast() const {
    return Tensor<To>(shape_, data_.template cast<To>());
  }

  [[nodiscard]] bool all_finite() const { return data_.allFinite(); }

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && data_.size() == other.data_.size() && data_ == other.data_;
  }

 private:
  void check_view(Index rows, Index cols) const {
    if (rows * cols != data_.size()) {
      throw ShapeError("cannot view tensor " + shape_string(shape_) + " as " + std::to_string(rows) + "x" +
                       std::to_string(cols));
    }
  }

  Shape shape_;
  VectorType data_;
};

// Named reference into a parameter container, used by the optimizer, serializer and
// gradient checker. `regularized` marks tensors that receive the L2 penalty.
template <typename Scalar>
struct ParamRef {
  std::string name;
  Tensor<Scalar>* tensor;
  bool trainable;
  bool regularized;
};

}  // namespace ecgssl::nn
