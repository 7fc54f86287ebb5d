#include "coralign/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>

namespace coralign {

namespace {

// x (n x d_in) through W (d_out x d_in) + b: rows of x against rows of W.
Matrix affine(const Matrix& x, const DenseLayer& layer) {
  if (x.cols() != layer.input_dim()) {
    throw ShapeError("layer expects " + std::to_string(layer.input_dim()) +
                     " inputs, got " + std::to_string(x.cols()));
  }
  const std::size_t n = x.rows(), d_in = layer.input_dim(), d_out = layer.output_dim();
  Matrix out(n, d_out);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.data() + i * d_in;
    double* oi = out.data() + i * d_out;
    for (std::size_t j = 0; j < d_out; ++j) {
      const double* wj = layer.W.data() + j * d_in;
      double acc = layer.b[j];
      for (std::size_t k = 0; k < d_in; ++k) acc += xi[k] * wj[k];
      oi[j] = acc;
    }
  }
  return out;
}

std::vector<double> column_sums(const Matrix& m) {
  std::vector<double> sums(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) sums[c] += m(r, c);
  return sums;
}

void check_labels(const Matrix& probs, const std::vector<int>& labels) {
  if (labels.size() != probs.rows()) {
    throw ShapeError("got " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(probs.rows()) + " rows");
  }
  const int k = static_cast<int>(probs.cols());
  for (int y : labels) {
    if (y < 0 || y >= k) {
      throw LabelError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(k) + ")");
    }
  }
}

}  // namespace

Matrix relu(const Matrix& x) {
  Matrix out = x;
  for (std::size_t i = 0; i < out.values().size(); ++i)
    if (out.data()[i] < 0.0) out.data()[i] = 0.0;
  return out;
}

Matrix softmax(const Matrix& logits) {
  if (logits.cols() < 2) throw ShapeError("softmax needs at least 2 columns");
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    const double max = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      const double e = std::exp(row[c] - max);
      out(r, c) = e;
      sum += e;
    }
    const double min_prob = std::numeric_limits<double>::min();
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      out(r, c) = std::max(out(r, c) / sum, min_prob);
    }
  }
  return out;
}

double cross_entropy(const Matrix& probs, const std::vector<int>& labels) {
  check_labels(probs, labels);
  double sum = 0.0;
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    sum -= std::log(std::max(probs(r, static_cast<std::size_t>(labels[r])), 1e-12));
  }
  return sum / static_cast<double>(probs.rows());
}

ForwardCache forward(const BranchNet& branch, const Matrix& x) {
  ForwardCache cache;
  cache.input = x;
  cache.pre_hidden = affine(x, branch.fc1);
  cache.hidden = relu(cache.pre_hidden);
  cache.logits = affine(cache.hidden, branch.fc2);
  cache.probs = softmax(cache.logits);
  return cache;
}

ParamGrads backward(const BranchNet& branch, const ForwardCache& cache,
                    const std::vector<int>& labels, const Matrix& extra_grad_hidden,
                    const Matrix& extra_grad_logits) {
  check_labels(cache.probs, labels);
  const std::size_t n = cache.probs.rows();

  // Mean cross-entropy through softmax: (S - onehot) / n.
  Matrix dlogits = cache.probs;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    dlogits(r, static_cast<std::size_t>(labels[r])) -= 1.0;
    for (std::size_t c = 0; c < dlogits.cols(); ++c) dlogits(r, c) *= inv_n;
  }
  if (!extra_grad_logits.empty()) {
    if (!extra_grad_logits.same_shape(dlogits)) {
      throw ShapeError("injected logit gradient shape mismatch");
    }
    dlogits = add(dlogits, extra_grad_logits);
  }

  ParamGrads grads;
  grads.fc2.dW = matmul(transpose(dlogits), cache.hidden);
  grads.fc2.db = column_sums(dlogits);

  Matrix dhidden = matmul(dlogits, branch.fc2.W);
  if (!extra_grad_hidden.empty()) {
    if (!extra_grad_hidden.same_shape(dhidden)) {
      throw ShapeError("injected hidden gradient shape mismatch");
    }
    dhidden = add(dhidden, extra_grad_hidden);
  }
  // ReLU gate from the cached pre-activations.
  for (std::size_t i = 0; i < dhidden.values().size(); ++i) {
    if (cache.pre_hidden.data()[i] <= 0.0) dhidden.data()[i] = 0.0;
  }

  grads.fc1.dW = matmul(transpose(dhidden), cache.input);
  grads.fc1.db = column_sums(dhidden);
  return grads;
}

BranchNet init_branch(std::size_t input_dim, std::size_t hidden_dim,
                      std::size_t num_classes, Rng& rng) {
  auto init_layer = [&rng](std::size_t d_out, std::size_t d_in) {
    DenseLayer layer;
    layer.W = Matrix(d_out, d_in);
    layer.b.assign(d_out, 0.0);
    const double bound = std::sqrt(6.0 / static_cast<double>(d_in + d_out));
    for (std::size_t i = 0; i < d_out * d_in; ++i) {
      layer.W.data()[i] = rng.uniform(-bound, bound);
    }
    return layer;
  };
  BranchNet branch;
  branch.fc1 = init_layer(hidden_dim, input_dim);
  branch.fc2 = init_layer(num_classes, hidden_dim);
  return branch;
}

ParamGrads zero_grads(const BranchNet& branch) {
  ParamGrads grads;
  grads.fc1.dW = Matrix(branch.fc1.output_dim(), branch.fc1.input_dim());
  grads.fc1.db.assign(branch.fc1.output_dim(), 0.0);
  grads.fc2.dW = Matrix(branch.fc2.output_dim(), branch.fc2.input_dim());
  grads.fc2.db.assign(branch.fc2.output_dim(), 0.0);
  return grads;
}

namespace {

constexpr const char* kModelMagic = "coralign-model";
constexpr int kModelVersion = 1;

void write_values(std::ostream& out, const double* values, std::size_t count) {
  char buf[48];
  for (std::size_t i = 0; i < count; ++i) {
    std::snprintf(buf, sizeof(buf), "%a", values[i]);
    out << buf << (i + 1 == count ? "" : " ");
  }
  out << "\n";
}

void write_layer(std::ostream& out, const char* name, const DenseLayer& layer) {
  out << name << " " << layer.output_dim() << " " << layer.input_dim() << "\n";
  for (std::size_t r = 0; r < layer.output_dim(); ++r) {
    write_values(out, layer.W.data() + r * layer.input_dim(), layer.input_dim());
  }
  write_values(out, layer.b.data(), layer.b.size());
}

double read_value(std::istream& in, const std::string& path) {
  std::string token;
  if (!(in >> token)) throw ParseError(path + ": truncated model file");
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size()) {
    throw ParseError(path + ": bad numeric token '" + token + "'");
  }
  if (!std::isfinite(v)) throw ParseError(path + ": non-finite parameter");
  return v;
}

DenseLayer read_layer(std::istream& in, const char* name, const std::string& path) {
  std::string tag;
  std::size_t d_out = 0, d_in = 0;
  if (!(in >> tag >> d_out >> d_in) || tag != name) {
    throw ParseError(path + ": expected layer '" + name + "'");
  }
  DenseLayer layer;
  layer.W = Matrix(d_out, d_in);
  for (std::size_t i = 0; i < d_out * d_in; ++i) layer.W.data()[i] = read_value(in, path);
  layer.b.resize(d_out);
  for (std::size_t i = 0; i < d_out; ++i) layer.b[i] = read_value(in, path);
  return layer;
}

void write_branch(std::ostream& out, const char* name, const BranchNet& branch) {
  out << "branch " << name << "\n";
  write_layer(out, "fc1", branch.fc1);
  write_layer(out, "fc2", branch.fc2);
}

BranchNet read_branch(std::istream& in, const char* name, const std::string& path) {
  std::string tag, got;
  if (!(in >> tag >> got) || tag != "branch" || got != name) {
    throw ParseError(path + ": expected branch '" + std::string(name) + "'");
  }
  BranchNet branch;
  branch.fc1 = read_layer(in, "fc1", path);
  branch.fc2 = read_layer(in, "fc2", path);
  if (branch.fc2.input_dim() != branch.fc1.output_dim()) {
    throw ParseError(path + ": fc1/fc2 widths disagree");
  }
  return branch;
}

}  // namespace

void save_model(const ModelParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << kModelMagic << " " << kModelVersion << "\n";
  out << "labels " << params.num_labels << "\n";
  write_branch(out, "image", params.image);
  write_branch(out, "text", params.text);
  if (!out) throw ParseError(path + ": write failed");
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::string magic, labels_tag;
  int version = 0;
  if (!(in >> magic >> version) || magic != kModelMagic) {
    throw ParseError(path + ": not a model file");
  }
  if (version != kModelVersion) {
    throw ParseError(path + ": unsupported format version " + std::to_string(version));
  }
  ModelParams params;
  if (!(in >> labels_tag >> params.num_labels) || labels_tag != "labels") {
    throw ParseError(path + ": missing label count");
  }
  params.image = read_branch(in, "image", path);
  params.text = read_branch(in, "text", path);
  if (params.image.num_classes() != params.num_labels ||
      params.text.num_classes() != params.num_labels) {
    throw ParseError(path + ": branch output widths disagree with label count");
  }
  return params;
}

}  // namespace coralign
