#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "coralign/errors.hpp"

namespace coralign {

/// Dense row-major matrix of doubles: the single carrier for feature batches,
/// layer activations, weights and covariance matrices. Immutable sharing is
/// safe; arithmetic is provided by free functions below.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  const std::vector<double>& values() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);

/// Sample covariance of the rows of `x`: (1/(n-1)) * Xc^T Xc with Xc the
/// column-mean-centered input. The 1/(n-1) normalization follows the standard
/// correlation-alignment formulation. Output is exactly symmetric.
Matrix covariance(const Matrix& x);

/// Squared Frobenius norm of (a - b).
double frob_sq_diff(const Matrix& a, const Matrix& b);

Matrix gather_rows(const Matrix& a, const std::vector<std::size_t>& rows);

/// Throws ParseError if any entry is NaN or infinite. Used at ingestion
/// boundaries; internal arithmetic is not checked.
void ensure_finite(const Matrix& m, const std::string& what);

}  // namespace coralign
