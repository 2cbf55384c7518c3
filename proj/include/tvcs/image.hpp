#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tvcs {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using GridX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Square n x n image stored row-major as a flat n^2 vector. Pixel (r, c)
/// lives at index r * n + c.
template <typename Scalar>
class BasicImage {
 public:
  using Vector = VectorX<Scalar>;

  BasicImage() = default;

  explicit BasicImage(Index side) : side_(side), data_(Vector::Zero(side * side)) {
    if (side < 1) throw std::invalid_argument("image side must be positive");
  }

  BasicImage(Index side, Vector data) : side_(side), data_(std::move(data)) {
    if (side < 1) throw std::invalid_argument("image side must be positive");
    if (data_.size() != side * side) {
      throw std::invalid_argument("image data has " + std::to_string(data_.size()) +
                                  " values, expected " + std::to_string(side * side));
    }
    if (!data_.allFinite()) throw std::invalid_argument("image data contains non-finite values");
  }

  static BasicImage Constant(Index side, Scalar value) {
    return BasicImage(side, Vector::Constant(side * side, value));
  }

  Index side() const { return side_; }
  Index size() const { return data_.size(); }

  const Vector& vec() const { return data_; }
  Vector& vec() { return data_; }

  Scalar operator()(Index row, Index col) const { return data_[row * side_ + col]; }
  Scalar& operator()(Index row, Index col) { return data_[row * side_ + col]; }

  Eigen::Map<const GridX<Scalar>> grid() const { return {data_.data(), side_, side_}; }
  Eigen::Map<GridX<Scalar>> grid() { return {data_.data(), side_, side_}; }

 private:
  Index side_ = 0;
  Vector data_;
};

/// Per-pixel 2-vectors in stacked layout: entries [0, n^2) hold the
/// horizontal component of every pixel, [n^2, 2n^2) the vertical one.
template <typename Scalar>
class BasicGradientField {
 public:
  using Vector = VectorX<Scalar>;
  using Pair = Eigen::Matrix<Scalar, 2, 1>;

  BasicGradientField() = default;

  explicit BasicGradientField(Index side)
      : side_(side), data_(Vector::Zero(2 * side * side)) {
    if (side < 1) throw std::invalid_argument("field side must be positive");
  }

  BasicGradientField(Index side, Vector data) : side_(side), data_(std::move(data)) {
    if (side < 1) throw std::invalid_argument("field side must be positive");
    if (data_.size() != 2 * side * side) {
      throw std::invalid_argument("gradient field has " + std::to_string(data_.size()) +
                                  " values, expected " + std::to_string(2 * side * side));
    }
  }

  Index side() const { return side_; }
  Index pixels() const { return side_ * side_; }

  const Vector& vec() const { return data_; }
  Vector& vec() { return data_; }

  auto horizontal() const { return data_.head(pixels()); }
  auto horizontal() { return data_.head(pixels()); }
  auto vertical() const { return data_.tail(pixels()); }
  auto vertical() { return data_.tail(pixels()); }

  Pair pair(Index i) const { return Pair(data_[i], data_[i + pixels()]); }
  void set_pair(Index i, const Pair& p) {
    data_[i] = p[0];
    data_[i + pixels()] = p[1];
  }

 private:
  Index side_ = 0;
  Vector data_;
};

using Image = BasicImage<double>;
using GradientField = BasicGradientField<double>;

}  // namespace tvcs
