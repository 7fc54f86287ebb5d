#pragma once

#include "coralign/matrix.hpp"

namespace coralign {

enum class AlignmentKind { None, Coral, Mmd, Triplet };

struct AlignmentConfig {
  AlignmentKind kind = AlignmentKind::Coral;
  double mmd_offset = 1.0;  // polynomial kernel k(x,y) = (scale * x.y + offset)^degree
  int mmd_degree = 2;
  // Kernel slope; 0 means auto (1 / attachment dimension), which keeps the
  // kernel conditioned on wide layers. The standalone mmd_loss default is 1.
  double mmd_scale = 0.0;
  double triplet_margin = 1.0;

  void validate() const;
};

const char* alignment_name(AlignmentKind kind);
AlignmentKind parse_alignment(const std::string& name);

/// Gradients of a pairwise loss with respect to its two input batches.
struct PairGrads {
  Matrix first;
  Matrix second;
};

/// Correlation alignment loss between two activation batches sharing the
/// same column count d: (1 / 4d^2) * ||cov(first) - cov(second)||_F^2.
/// Row counts may differ; both must be >= 2.
double coral_loss(const Matrix& first, const Matrix& second);

/// Analytic gradient of coral_loss. The first-batch gradient is
/// (1 / (d^2 (n1-1))) * Xc (C1 - C2); the second-batch gradient carries the
/// opposite sign on the (C1 - C2) factor so that it is the true gradient of
/// the loss (checked against central finite differences), with descent
/// shrinking the covariance gap from both sides.
PairGrads coral_grad(const Matrix& first, const Matrix& second);

/// Squared maximum mean discrepancy under the polynomial kernel: mean of
/// within-first kernel values + mean of within-second values - 2 * mean over
/// cross pairs. Clamped at zero against floating-point cancellation.
double mmd_loss(const Matrix& first, const Matrix& second, double offset = 1.0,
                int degree = 2, double scale = 1.0);

/// Gradient of the (unclamped) squared MMD; zero whenever the clamp in
/// mmd_loss is active.
PairGrads mmd_grad(const Matrix& first, const Matrix& second, double offset = 1.0,
                   int degree = 2, double scale = 1.0);

/// Mean over rows of max(0, margin + ||a-p|| - ||a-n||) with Euclidean
/// distances. Empty inputs give 0.
double triplet_loss(const Matrix& anchors, const Matrix& positives,
                    const Matrix& negatives, double margin);

struct TripletGrads {
  Matrix anchors;
  Matrix positives;
  Matrix negatives;
};

TripletGrads triplet_grad(const Matrix& anchors, const Matrix& positives,
                          const Matrix& negatives, double margin);

}  // namespace coralign
