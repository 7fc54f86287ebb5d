#include "coralign/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace coralign {

void TrainConfig::validate() const {
  if (batch_size < 2) {
    throw ConfigError("batch_size must be at least 2 (covariances need 2 rows)");
  }
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
  if (hidden_units < 1) throw ConfigError("hidden_units must be at least 1");
  alignment.validate();
}

void write_train_log(const TrainLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "epoch,total_loss,loss_img,loss_txt,coral_fc1,coral_fc2\n";
  char buf[160];
  for (std::size_t i = 0; i < log.epochs.size(); ++i) {
    const EpochStats& e = log.epochs[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g,%.12g,%.12g\n", i + 1,
                  e.total_loss, e.image_loss, e.text_loss, e.coral_hidden,
                  e.coral_logits);
    out << buf;
  }
  if (!out) throw ParseError(path + ": write failed");
}

BatchSampler::BatchSampler(std::vector<std::size_t> indices, std::uint64_t seed)
    : pool_(std::move(indices)), rng_(seed) {
  if (pool_.empty()) throw EmptyPartition("cannot sample from an empty partition");
  rng_.shuffle(pool_);
}

std::vector<std::size_t> BatchSampler::next(std::size_t count) {
  std::vector<std::size_t> out;
  out.reserve(count);
  while (out.size() < count) {
    if (cursor_ == pool_.size()) {
      rng_.shuffle(pool_);
      cursor_ = 0;
    }
    out.push_back(pool_[cursor_++]);
  }
  return out;
}

TripletSelection sample_triplets(const std::vector<int>& image_labels,
                                 const std::vector<int>& text_labels, Rng& rng) {
  std::map<int, std::vector<std::size_t>> text_by_label;
  for (std::size_t i = 0; i < text_labels.size(); ++i) {
    text_by_label[text_labels[i]].push_back(i);
  }
  TripletSelection sel;
  for (std::size_t a = 0; a < image_labels.size(); ++a) {
    const int label = image_labels[a];
    auto it = text_by_label.find(label);
    if (it == text_by_label.end()) continue;
    if (it->second.size() == text_labels.size()) continue;  // no negatives exist
    const std::size_t pos = it->second[rng.below(it->second.size())];
    // Rejection-sample a text row with a different label.
    std::size_t neg;
    do {
      neg = static_cast<std::size_t>(rng.below(text_labels.size()));
    } while (text_labels[neg] == label);
    sel.anchors.push_back(a);
    sel.positives.push_back(pos);
    sel.negatives.push_back(neg);
  }
  return sel;
}

namespace {

// mmd_scale 0 means 1/d at the attachment point, which keeps the polynomial
// kernel conditioned regardless of layer width.
double effective_mmd_scale(const AlignmentConfig& alignment, const Matrix& act) {
  return alignment.mmd_scale > 0.0 ? alignment.mmd_scale
                                   : 1.0 / static_cast<double>(act.cols());
}

double alignment_term(const AlignmentConfig& alignment, const Matrix& image_act,
                      const Matrix& text_act, const TripletSelection& triplets) {
  switch (alignment.kind) {
    case AlignmentKind::None:
      return 0.0;
    case AlignmentKind::Coral:
      return coral_loss(image_act, text_act);
    case AlignmentKind::Mmd:
      return mmd_loss(image_act, text_act, alignment.mmd_offset, alignment.mmd_degree,
                      effective_mmd_scale(alignment, image_act));
    case AlignmentKind::Triplet:
      if (triplets.empty()) return 0.0;
      return triplet_loss(gather_rows(image_act, triplets.anchors),
                          gather_rows(text_act, triplets.positives),
                          gather_rows(text_act, triplets.negatives),
                          alignment.triplet_margin);
  }
  return 0.0;
}

// Gradients of the alignment term at one attachment point, for both batches.
PairGrads alignment_term_grad(const AlignmentConfig& alignment, const Matrix& image_act,
                              const Matrix& text_act, const TripletSelection& triplets) {
  switch (alignment.kind) {
    case AlignmentKind::None:
      break;
    case AlignmentKind::Coral:
      return coral_grad(image_act, text_act);
    case AlignmentKind::Mmd:
      return mmd_grad(image_act, text_act, alignment.mmd_offset, alignment.mmd_degree,
                      effective_mmd_scale(alignment, image_act));
    case AlignmentKind::Triplet: {
      PairGrads grads{Matrix(image_act.rows(), image_act.cols()),
                      Matrix(text_act.rows(), text_act.cols())};
      if (triplets.empty()) return grads;
      const TripletGrads tg = triplet_grad(
          gather_rows(image_act, triplets.anchors),
          gather_rows(text_act, triplets.positives),
          gather_rows(text_act, triplets.negatives), alignment.triplet_margin);
      // Scatter the gathered-row gradients back onto the batch rows.
      for (std::size_t r = 0; r < triplets.anchors.size(); ++r) {
        for (std::size_t c = 0; c < image_act.cols(); ++c) {
          grads.first(triplets.anchors[r], c) += tg.anchors(r, c);
        }
        for (std::size_t c = 0; c < text_act.cols(); ++c) {
          grads.second(triplets.positives[r], c) += tg.positives(r, c);
          grads.second(triplets.negatives[r], c) += tg.negatives(r, c);
        }
      }
      return grads;
    }
  }
  return {Matrix(image_act.rows(), image_act.cols()),
          Matrix(text_act.rows(), text_act.cols())};
}

void sgd_layer(DenseLayer& layer, const LayerGrads& grads, LayerGrads& velocity,
               double learning_rate, double momentum) {
  if (!layer.W.same_shape(grads.dW) || layer.b.size() != grads.db.size()) {
    throw ShapeError("sgd_step: gradient shape does not match parameters");
  }
  for (std::size_t i = 0; i < layer.W.values().size(); ++i) {
    double& v = velocity.dW.data()[i];
    v = momentum * v + grads.dW.data()[i];
    layer.W.data()[i] -= learning_rate * v;
  }
  for (std::size_t i = 0; i < layer.b.size(); ++i) {
    double& v = velocity.db[i];
    v = momentum * v + grads.db[i];
    layer.b[i] -= learning_rate * v;
  }
}

}  // namespace

LossBreakdown total_loss(const ForwardCache& image_cache, const ForwardCache& text_cache,
                         const std::vector<int>& image_labels,
                         const std::vector<int>& text_labels,
                         const AlignmentConfig& alignment, double weight,
                         const TripletSelection& triplets) {
  LossBreakdown loss;
  loss.image_ce = cross_entropy(image_cache.probs, image_labels);
  loss.text_ce = cross_entropy(text_cache.probs, text_labels);
  loss.align_hidden =
      alignment_term(alignment, image_cache.hidden, text_cache.hidden, triplets);
  loss.align_logits =
      alignment_term(alignment, image_cache.logits, text_cache.logits, triplets);
  loss.total =
      loss.image_ce + loss.text_ce + weight * (loss.align_hidden + loss.align_logits);
  return loss;
}

void sgd_step(BranchNet& branch, const ParamGrads& grads, ParamGrads& velocity,
              double learning_rate, double momentum) {
  sgd_layer(branch.fc1, grads.fc1, velocity.fc1, learning_rate, momentum);
  sgd_layer(branch.fc2, grads.fc2, velocity.fc2, learning_rate, momentum);
}

namespace {

enum Stream : std::uint64_t {
  kImageInit = 11,
  kTextInit = 12,
  kImageSampler = 13,
  kTextSampler = 14,
  kTripletSampler = 15,
};

}  // namespace

TrainResult train(const Dataset& data, const Partition& partition,
                  const TrainConfig& config) {
  config.validate();
  if (partition.image.train.empty() || partition.text.train.empty()) {
    throw EmptyPartition("both modalities need non-empty training partitions");
  }
  if (data.num_labels < 2) throw ConfigError("training needs at least 2 labels");

  TrainResult result;
  Rng image_init(Rng::derive(config.seed, kImageInit));
  Rng text_init(Rng::derive(config.seed, kTextInit));
  result.params.num_labels = data.num_labels;
  result.params.image =
      init_branch(data.image_dim, config.hidden_units, data.num_labels, image_init);
  result.params.text =
      init_branch(data.text_dim, config.hidden_units, data.num_labels, text_init);

  if (config.epochs == 0) return result;

  BatchSampler image_sampler(partition.image.train,
                             Rng::derive(config.seed, kImageSampler));
  BatchSampler text_sampler(partition.text.train,
                            Rng::derive(config.seed, kTextSampler));
  Rng triplet_rng(Rng::derive(config.seed, kTripletSampler));

  ParamGrads image_velocity = zero_grads(result.params.image);
  ParamGrads text_velocity = zero_grads(result.params.text);

  const std::size_t larger =
      std::max(partition.image.train.size(), partition.text.train.size());
  const std::size_t steps_per_epoch =
      (larger + config.batch_size - 1) / config.batch_size;
  const bool has_alignment = config.alignment.kind != AlignmentKind::None;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochStats stats;
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      const auto image_batch =
          gather(data, Modality::Image, image_sampler.next(config.batch_size));
      const auto text_batch =
          gather(data, Modality::Text, text_sampler.next(config.batch_size));

      const ForwardCache image_cache = forward(result.params.image, image_batch.features);
      const ForwardCache text_cache = forward(result.params.text, text_batch.features);

      TripletSelection triplets;
      if (config.alignment.kind == AlignmentKind::Triplet) {
        triplets = sample_triplets(image_batch.labels, text_batch.labels, triplet_rng);
      }

      const LossBreakdown loss =
          total_loss(image_cache, text_cache, image_batch.labels, text_batch.labels,
                     config.alignment, config.alignment_weight, triplets);
      if (!std::isfinite(loss.total)) {
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch + 1) +
                              ", step " + std::to_string(step + 1));
      }

      // CORAL distance at the attachment points is logged under every
      // alignment kind; reuse the alignment value when it already is CORAL.
      const double coral_hidden =
          config.alignment.kind == AlignmentKind::Coral
              ? loss.align_hidden
              : coral_loss(image_cache.hidden, text_cache.hidden);
      const double coral_logits =
          config.alignment.kind == AlignmentKind::Coral
              ? loss.align_logits
              : coral_loss(image_cache.logits, text_cache.logits);

      Matrix image_grad_hidden, image_grad_logits, text_grad_hidden, text_grad_logits;
      if (has_alignment) {
        PairGrads hidden_grads = alignment_term_grad(
            config.alignment, image_cache.hidden, text_cache.hidden, triplets);
        PairGrads logit_grads = alignment_term_grad(
            config.alignment, image_cache.logits, text_cache.logits, triplets);
        image_grad_hidden = scale(hidden_grads.first, config.alignment_weight);
        text_grad_hidden = scale(hidden_grads.second, config.alignment_weight);
        image_grad_logits = scale(logit_grads.first, config.alignment_weight);
        text_grad_logits = scale(logit_grads.second, config.alignment_weight);
      }

      const ParamGrads image_grads = backward(result.params.image, image_cache,
                                              image_batch.labels, image_grad_hidden,
                                              image_grad_logits);
      const ParamGrads text_grads = backward(result.params.text, text_cache,
                                             text_batch.labels, text_grad_hidden,
                                             text_grad_logits);
      sgd_step(result.params.image, image_grads, image_velocity, config.learning_rate,
               config.momentum);
      sgd_step(result.params.text, text_grads, text_velocity, config.learning_rate,
               config.momentum);

      stats.total_loss += loss.total;
      stats.image_loss += loss.image_ce;
      stats.text_loss += loss.text_ce;
      stats.align_hidden += loss.align_hidden;
      stats.align_logits += loss.align_logits;
      stats.coral_hidden += coral_hidden;
      stats.coral_logits += coral_logits;
    }
    const double inv_steps = 1.0 / static_cast<double>(steps_per_epoch);
    stats.total_loss *= inv_steps;
    stats.image_loss *= inv_steps;
    stats.text_loss *= inv_steps;
    stats.align_hidden *= inv_steps;
    stats.align_logits *= inv_steps;
    stats.coral_hidden *= inv_steps;
    stats.coral_logits *= inv_steps;
    result.log.epochs.push_back(stats);
  }
  return result;
}

}  // namespace coralign
