#include "coralign/alignment.hpp"

#include <cmath>
#include <string>

namespace coralign {

namespace {

void check_pair(const Matrix& first, const Matrix& second) {
  if (first.cols() != second.cols()) {
    throw ShapeError("alignment inputs have " + std::to_string(first.cols()) +
                     " vs " + std::to_string(second.cols()) + " columns");
  }
  if (first.rows() < 2 || second.rows() < 2) {
    throw DegenerateBatch("correlation alignment needs batches of at least 2 rows");
  }
}

Matrix center_columns(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) mean[c] += x(r, c);
  for (double& m : mean) m /= static_cast<double>(n);
  Matrix out = x;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) out(r, c) -= mean[c];
  return out;
}

double poly_kernel(std::span<const double> a, std::span<const double> b,
                   double offset, int degree, double scale) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::pow(scale * dot + offset, degree);
}

}  // namespace

void AlignmentConfig::validate() const {
  if (kind == AlignmentKind::Mmd && mmd_degree < 1) {
    throw ConfigError("mmd kernel degree must be >= 1");
  }
  if (mmd_scale < 0.0) throw ConfigError("mmd kernel scale must be non-negative");
  if (kind == AlignmentKind::Triplet && triplet_margin <= 0.0) {
    throw ConfigError("triplet margin must be positive");
  }
}

const char* alignment_name(AlignmentKind kind) {
  switch (kind) {
    case AlignmentKind::None: return "none";
    case AlignmentKind::Coral: return "coral";
    case AlignmentKind::Mmd: return "mmd";
    case AlignmentKind::Triplet: return "triplet";
  }
  return "?";
}

AlignmentKind parse_alignment(const std::string& name) {
  if (name == "none") return AlignmentKind::None;
  if (name == "coral") return AlignmentKind::Coral;
  if (name == "mmd") return AlignmentKind::Mmd;
  if (name == "triplet") return AlignmentKind::Triplet;
  throw ConfigError("unknown alignment kind '" + name + "'");
}

double coral_loss(const Matrix& first, const Matrix& second) {
  check_pair(first, second);
  const double d = static_cast<double>(first.cols());
  return frob_sq_diff(covariance(first), covariance(second)) / (4.0 * d * d);
}

PairGrads coral_grad(const Matrix& first, const Matrix& second) {
  check_pair(first, second);
  const std::size_t d = first.cols();
  const double n1 = static_cast<double>(first.rows());
  const double n2 = static_cast<double>(second.rows());

  const Matrix gap = sub(covariance(first), covariance(second));
  const Matrix first_centered = center_columns(first);
  const Matrix second_centered = center_columns(second);

  const double dd = static_cast<double>(d) * static_cast<double>(d);
  PairGrads grads;
  grads.first = scale(matmul(first_centered, gap), 1.0 / (dd * (n1 - 1.0)));
  grads.second = scale(matmul(second_centered, gap), -1.0 / (dd * (n2 - 1.0)));
  return grads;
}

double mmd_loss(const Matrix& first, const Matrix& second, double offset, int degree,
                double scale) {
  if (first.cols() != second.cols()) {
    throw ShapeError("mmd inputs have " + std::to_string(first.cols()) + " vs " +
                     std::to_string(second.cols()) + " columns");
  }
  if (first.rows() == 0 || second.rows() == 0) {
    throw DegenerateBatch("mmd needs non-empty batches");
  }
  const std::size_t n = first.rows(), m = second.rows();
  double within_first = 0.0, within_second = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      within_first += poly_kernel(first.row(i), first.row(j), offset, degree, scale);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      within_second += poly_kernel(second.row(i), second.row(j), offset, degree, scale);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      cross += poly_kernel(first.row(i), second.row(j), offset, degree, scale);

  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  const double value = within_first / (nn * nn) + within_second / (mm * mm) -
                       2.0 * cross / (nn * mm);
  return value < 0.0 ? 0.0 : value;
}

PairGrads mmd_grad(const Matrix& first, const Matrix& second, double offset,
                   int degree, double scale) {
  if (first.cols() != second.cols()) {
    throw ShapeError("mmd inputs have " + std::to_string(first.cols()) + " vs " +
                     std::to_string(second.cols()) + " columns");
  }
  if (first.rows() == 0 || second.rows() == 0) {
    throw DegenerateBatch("mmd needs non-empty batches");
  }
  const double raw = [&] {
    // Re-evaluate without the clamp to know whether the clamp is active.
    const std::size_t n = first.rows(), m = second.rows();
    double wf = 0.0, ws = 0.0, cr = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        wf += poly_kernel(first.row(i), first.row(j), offset, degree, scale);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        ws += poly_kernel(second.row(i), second.row(j), offset, degree, scale);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        cr += poly_kernel(first.row(i), second.row(j), offset, degree, scale);
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return wf / (nn * nn) + ws / (mm * mm) - 2.0 * cr / (nn * mm);
  }();

  PairGrads grads;
  grads.first = Matrix(first.rows(), first.cols());
  grads.second = Matrix(second.rows(), second.cols());
  if (raw <= 0.0) return grads;

  const std::size_t n = first.rows(), m = second.rows(), d = first.cols();
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  const double p = static_cast<double>(degree);

  // d k / d a = degree * scale * (scale a.b + offset)^(degree-1) * b
  auto kernel_slope = [&](std::span<const double> a, std::span<const double> b) {
    double dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) dot += a[i] * b[i];
    return p * scale * std::pow(scale * dot + offset, degree - 1);
  };

  for (std::size_t i = 0; i < n; ++i) {
    auto gi = grads.first.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double w = 2.0 / (nn * nn) * kernel_slope(first.row(i), first.row(j));
      auto xj = first.row(j);
      for (std::size_t c = 0; c < d; ++c) gi[c] += w * xj[c];
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double w = -2.0 / (nn * mm) * kernel_slope(first.row(i), second.row(j));
      auto yj = second.row(j);
      for (std::size_t c = 0; c < d; ++c) gi[c] += w * yj[c];
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    auto gj = grads.second.row(j);
    for (std::size_t i = 0; i < m; ++i) {
      const double w = 2.0 / (mm * mm) * kernel_slope(second.row(j), second.row(i));
      auto yi = second.row(i);
      for (std::size_t c = 0; c < d; ++c) gj[c] += w * yi[c];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double w = -2.0 / (nn * mm) * kernel_slope(first.row(i), second.row(j));
      auto xi = first.row(i);
      for (std::size_t c = 0; c < d; ++c) gj[c] += w * xi[c];
    }
  }
  return grads;
}

namespace {

void check_triplet(const Matrix& a, const Matrix& p, const Matrix& n) {
  if (!a.same_shape(p) || !a.same_shape(n)) {
    throw ShapeError("triplet inputs must share one shape");
  }
}

double row_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

}  // namespace

double triplet_loss(const Matrix& anchors, const Matrix& positives,
                    const Matrix& negatives, double margin) {
  check_triplet(anchors, positives, negatives);
  if (anchors.rows() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t r = 0; r < anchors.rows(); ++r) {
    const double hinge = margin + row_distance(anchors.row(r), positives.row(r)) -
                         row_distance(anchors.row(r), negatives.row(r));
    if (hinge > 0.0) sum += hinge;
  }
  return sum / static_cast<double>(anchors.rows());
}

TripletGrads triplet_grad(const Matrix& anchors, const Matrix& positives,
                          const Matrix& negatives, double margin) {
  check_triplet(anchors, positives, negatives);
  TripletGrads grads;
  grads.anchors = Matrix(anchors.rows(), anchors.cols());
  grads.positives = Matrix(anchors.rows(), anchors.cols());
  grads.negatives = Matrix(anchors.rows(), anchors.cols());
  if (anchors.rows() == 0) return grads;

  const double inv_n = 1.0 / static_cast<double>(anchors.rows());
  const std::size_t d = anchors.cols();
  for (std::size_t r = 0; r < anchors.rows(); ++r) {
    const double dist_ap = row_distance(anchors.row(r), positives.row(r));
    const double dist_an = row_distance(anchors.row(r), negatives.row(r));
    if (margin + dist_ap - dist_an <= 0.0) continue;
    const double inv_ap = 1.0 / std::max(dist_ap, 1e-12);
    const double inv_an = 1.0 / std::max(dist_an, 1e-12);
    auto a = anchors.row(r);
    auto p = positives.row(r);
    auto n = negatives.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      const double unit_ap = (a[c] - p[c]) * inv_ap;
      const double unit_an = (a[c] - n[c]) * inv_an;
      grads.anchors(r, c) = (unit_ap - unit_an) * inv_n;
      grads.positives(r, c) = -unit_ap * inv_n;
      grads.negatives(r, c) = unit_an * inv_n;
    }
  }
  return grads;
}

}  // namespace coralign
