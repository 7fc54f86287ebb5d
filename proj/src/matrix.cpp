#include "coralign/matrix.hpp"

#include <cmath>
#include <string>

namespace coralign {

namespace {

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " does not match shape " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged row in matrix literal");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_str(a) + " * " + shape_str(b));
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double* out_row = out.data() + i * m;
    const double* a_row = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double a_ip = a_row[p];
      if (a_ip == 0.0) continue;
      const double* b_row = b.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) out_row[j] += a_ip * b_row[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("add: " + shape_str(a) + " vs " + shape_str(b));
  }
  Matrix out = a;
  for (std::size_t i = 0; i < out.values().size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("sub: " + shape_str(a) + " vs " + shape_str(b));
  }
  Matrix out = a;
  for (std::size_t i = 0; i < out.values().size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix scale(const Matrix& a, double c) {
  Matrix out = a;
  for (std::size_t i = 0; i < out.values().size(); ++i) out.data()[i] *= c;
  return out;
}

Matrix covariance(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n < 2) {
    throw DegenerateBatch("covariance needs at least 2 rows, got " + std::to_string(n));
  }
  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = x.data() + r * d;
    for (std::size_t c = 0; c < d; ++c) mean[c] += row[c];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  // Accumulate the upper triangle of Xc^T Xc row by row, then mirror.
  Matrix cov(d, d);
  std::vector<double> centered(d);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = x.data() + r * d;
    for (std::size_t c = 0; c < d; ++c) centered[c] = row[c] - mean[c];
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = centered[i];
      if (ci == 0.0) continue;
      double* cov_row = cov.data() + i * d;
      for (std::size_t j = i; j < d; ++j) cov_row[j] += ci * centered[j];
    }
  }
  const double norm = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const double v = cov(i, j) * norm;
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return cov;
}

double frob_sq_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("frob_sq_diff: " + shape_str(a) + " vs " + shape_str(b));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    const double diff = a.data()[i] - b.data()[i];
    sum += diff * diff;
  }
  return sum;
}

Matrix gather_rows(const Matrix& a, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double* src = a.data() + rows[i] * a.cols();
    double* dst = out.data() + i * a.cols();
    for (std::size_t j = 0; j < a.cols(); ++j) dst[j] = src[j];
  }
  return out;
}

void ensure_finite(const Matrix& m, const std::string& what) {
  for (double v : m.values()) {
    if (!std::isfinite(v)) throw ParseError(what + ": non-finite value");
  }
}

}  // namespace coralign
