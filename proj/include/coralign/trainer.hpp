#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coralign/alignment.hpp"
#include "coralign/dataset.hpp"
#include "coralign/network.hpp"
#include "coralign/rng.hpp"

namespace coralign {

struct TrainConfig {
  std::size_t batch_size = 64;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t epochs = 50;
  AlignmentConfig alignment;
  double alignment_weight = 1.0;
  std::uint64_t seed = 42;
  std::size_t hidden_units = 1000;

  void validate() const;
};

/// Per-epoch means over the epoch's steps. `align_*` are the active
/// alignment's unweighted loss values at each attachment point; `coral_*` are
/// the CORAL distances at the same points, computed as a diagnostic under
/// every alignment kind (this is what the exported curves plot).
struct EpochStats {
  double total_loss = 0.0;
  double image_loss = 0.0;
  double text_loss = 0.0;
  double align_hidden = 0.0;
  double align_logits = 0.0;
  double coral_hidden = 0.0;
  double coral_logits = 0.0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainLog {
  std::vector<EpochStats> epochs;

  friend bool operator==(const TrainLog&, const TrainLog&) = default;
};

/// CSV: `epoch,total_loss,loss_img,loss_txt,coral_fc1,coral_fc2`, one row per
/// epoch, 12 significant digits.
void write_train_log(const TrainLog& log, const std::string& path);

/// Uniform without-replacement draws within a pass over one modality's
/// training indices; a pass that runs out mid-batch reshuffles and continues,
/// so the smaller modality recycles.
class BatchSampler {
 public:
  BatchSampler(std::vector<std::size_t> indices, std::uint64_t seed);
  std::vector<std::size_t> next(std::size_t count);
  std::size_t pool_size() const { return pool_.size(); }

 private:
  std::vector<std::size_t> pool_;
  std::size_t cursor_ = 0;
  Rng rng_;
};

/// Row-index triples for the triplet regularizer: anchors index the image
/// batch, positives/negatives index the text batch, matched/mismatched by
/// label via seeded in-batch sampling.
struct TripletSelection {
  std::vector<std::size_t> anchors;
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;

  bool empty() const { return anchors.empty(); }
};

TripletSelection sample_triplets(const std::vector<int>& image_labels,
                                 const std::vector<int>& text_labels, Rng& rng);

struct LossBreakdown {
  double total = 0.0;
  double image_ce = 0.0;
  double text_ce = 0.0;
  double align_hidden = 0.0;  // unweighted
  double align_logits = 0.0;  // unweighted
};

/// Joint objective: image cross-entropy + text cross-entropy + weight times
/// the alignment term at the hidden activations and at the logits.
LossBreakdown total_loss(const ForwardCache& image_cache, const ForwardCache& text_cache,
                         const std::vector<int>& image_labels,
                         const std::vector<int>& text_labels,
                         const AlignmentConfig& alignment, double weight,
                         const TripletSelection& triplets = {});

/// Classical momentum: v <- momentum * v + g; theta <- theta - lr * v.
/// With momentum = 0 this is plain SGD, theta <- theta - lr * g.
void sgd_step(BranchNet& branch, const ParamGrads& grads, ParamGrads& velocity,
              double learning_rate, double momentum);

struct TrainResult {
  ModelParams params;
  TrainLog log;
};

/// Runs the joint training loop over the partition's training indices. One
/// epoch is ceil(max(train sizes) / batch_size) steps, so the larger modality
/// makes a full pass per epoch. Throws DivergenceError naming the epoch and
/// step if the loss goes non-finite.
TrainResult train(const Dataset& data, const Partition& partition,
                  const TrainConfig& config);

}  // namespace coralign
