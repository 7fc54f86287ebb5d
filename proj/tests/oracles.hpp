#pragma once

// Test-only reference implementations, kept deliberately naive and separate
// from the library code paths they check.

#include <cmath>
#include <functional>
#include <vector>

#include "coralign/matrix.hpp"

namespace oracles {

// Two-pass column-mean-then-outer-product covariance, O(n d^2).
inline coralign::Matrix naive_covariance(const coralign::Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < n; ++r) mean[c] += x(r, c);
    mean[c] /= static_cast<double>(n);
  }
  coralign::Matrix cov(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double sum = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        sum += (x(r, i) - mean[i]) * (x(r, j) - mean[j]);
      }
      cov(i, j) = sum / static_cast<double>(n - 1);
    }
  }
  return cov;
}

// Central finite difference of a scalar function of one matrix entry.
inline double central_difference(const std::function<double(const coralign::Matrix&)>& f,
                                 coralign::Matrix x, std::size_t r, std::size_t c,
                                 double eps) {
  const double original = x(r, c);
  x(r, c) = original + eps;
  const double plus = f(x);
  x(r, c) = original - eps;
  const double minus = f(x);
  return (plus - minus) / (2.0 * eps);
}

// Relative error with an absolute floor for near-zero pairs.
inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Direct transliteration of the AP formula over a relevance sequence:
// (1/R) * sum_k (R_k / k) * rel_k with R counted over the whole list.
inline double naive_average_precision(const std::vector<bool>& relevance) {
  double total_relevant = 0.0;
  for (bool r : relevance) total_relevant += r ? 1.0 : 0.0;
  double sum = 0.0;
  double running = 0.0;
  for (std::size_t k = 0; k < relevance.size(); ++k) {
    if (relevance[k]) {
      running += 1.0;
      sum += running / static_cast<double>(k + 1);
    }
  }
  return sum / total_relevant;
}

}  // namespace oracles
