#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coralign/retrieval.hpp"
#include "coralign/trainer.hpp"

namespace coralign {

/// Flat configuration shared by every command: training knobs, synthetic
/// generator knobs, paths and retrieval options. Loadable from a `key = value`
/// file; unknown keys are rejected. Command-line flags override file values.
struct RunConfig {
  // training
  std::size_t batch_size = 64;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t epochs = 50;
  std::string alignment = "coral";
  double alignment_weight = 1.0;
  std::uint64_t seed = 42;
  std::size_t hidden_units = 1000;
  double mmd_offset = 1.0;
  int mmd_degree = 2;
  double mmd_scale = 0.0;  // 0 = 1/dim at each attachment point
  double triplet_margin = 1.0;
  std::array<double, 3> fractions{0.6, 0.15, 0.25};

  // paths
  std::string manifest;
  std::string model;
  std::string out = ".";
  std::string corpus;

  // synthetic generator
  std::size_t synth_labels = 5;
  std::size_t synth_images = 200;
  std::size_t synth_texts = 200;
  std::size_t synth_image_dim = 64;
  std::size_t synth_text_dim = 100;
  double synth_sigma = 0.1;

  // retrieval / evaluation
  std::string metric = "cosine";  // or kl | euclidean | nc | all
  std::string embedding = "probability";
  std::size_t depth = 0;  // 0 = full ranking
  std::vector<int> held_labels;
  std::string query_id;
  std::size_t top_k = 10;
  std::string per_query_path;
  std::size_t vocab_top_k = 0;

  TrainConfig train_config() const;
};

/// Parses a flat config file: one `key = value` per line, `#` comments,
/// unknown keys rejected.
void apply_config_file(RunConfig& config, const std::string& path);

std::vector<int> parse_label_list(const std::string& csv);
std::array<double, 3> parse_fractions(const std::string& csv);

int cmd_featurize_text(const RunConfig& config);
int cmd_gen_synth(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_retrieve(const RunConfig& config);
int cmd_holdout_eval(const RunConfig& config);

}  // namespace coralign
