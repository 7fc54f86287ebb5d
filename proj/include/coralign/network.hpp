#pragma once

#include <string>
#include <vector>

#include "coralign/matrix.hpp"
#include "coralign/rng.hpp"

namespace coralign {

/// One fully-connected layer. W maps d_in inputs to d_out outputs and is
/// stored d_out x d_in; b has d_out entries.
struct DenseLayer {
  Matrix W;
  std::vector<double> b;

  std::size_t input_dim() const { return W.cols(); }
  std::size_t output_dim() const { return W.rows(); }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// A modality branch: fc1 with ReLU into fc2 producing K logits.
struct BranchNet {
  DenseLayer fc1;
  DenseLayer fc2;

  std::size_t input_dim() const { return fc1.input_dim(); }
  std::size_t hidden_dim() const { return fc1.output_dim(); }
  std::size_t num_classes() const { return fc2.output_dim(); }

  friend bool operator==(const BranchNet&, const BranchNet&) = default;
};

/// Both branch networks plus the shared label count.
struct ModelParams {
  BranchNet image;
  BranchNet text;
  std::size_t num_labels = 0;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Everything the backward pass needs from a forward pass. `hidden` (post
/// ReLU) and `logits` are the two activation batches the alignment losses
/// attach to; `probs` is the softmax semantic embedding.
struct ForwardCache {
  Matrix input;
  Matrix pre_hidden;
  Matrix hidden;
  Matrix logits;
  Matrix probs;
};

struct LayerGrads {
  Matrix dW;
  std::vector<double> db;
};

struct ParamGrads {
  LayerGrads fc1;
  LayerGrads fc2;
};

Matrix relu(const Matrix& x);

/// Row-wise softmax with max subtraction; safe for logit magnitudes far
/// beyond 1e3. Outputs are clamped away from exact zero so rows stay
/// strictly positive for downstream logs.
Matrix softmax(const Matrix& logits);

/// Mean over rows of -log(probs[i, labels[i]]), probabilities floored at
/// 1e-12 before the log.
double cross_entropy(const Matrix& probs, const std::vector<int>& labels);

ForwardCache forward(const BranchNet& branch, const Matrix& x);

/// Manual backward pass for cross-entropy plus injected alignment gradients.
/// `extra_grad_hidden` adds to dLoss/d(hidden) before the ReLU mask and
/// `extra_grad_logits` adds to dLoss/d(logits) before propagation; pass empty
/// matrices when alignment is disabled.
ParamGrads backward(const BranchNet& branch, const ForwardCache& cache,
                    const std::vector<int>& labels, const Matrix& extra_grad_hidden,
                    const Matrix& extra_grad_logits);

/// Zero biases, weights uniform in +-sqrt(6 / (d_in + d_out)).
BranchNet init_branch(std::size_t input_dim, std::size_t hidden_dim,
                      std::size_t num_classes, Rng& rng);

ParamGrads zero_grads(const BranchNet& branch);

/// Text model file, format version 1. Parameter values are written as C hex
/// floats so save/load round-trips bitwise.
void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

}  // namespace coralign
