#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "coralign/commands.hpp"
#include "coralign/errors.hpp"

namespace {

using coralign::RunConfig;

// String staging for list-valued flags; applied after parsing.
struct FlagStrings {
  std::string fractions;
  std::string held_labels;
};

void add_train_options(CLI::App* cmd, RunConfig& config, FlagStrings& strings) {
  cmd->add_option("--batch-size", config.batch_size, "minibatch size per modality");
  cmd->add_option("--learning-rate", config.learning_rate, "SGD learning rate");
  cmd->add_option("--momentum", config.momentum, "SGD momentum in [0, 1)");
  cmd->add_option("--epochs", config.epochs, "number of training epochs");
  cmd->add_option("--alignment", config.alignment,
                  "alignment term: none|coral|mmd|triplet");
  cmd->add_option("--alignment-weight", config.alignment_weight,
                  "weight on the alignment terms");
  cmd->add_option("--hidden", config.hidden_units, "hidden layer width");
  cmd->add_option("--mmd-offset", config.mmd_offset, "polynomial kernel offset");
  cmd->add_option("--mmd-degree", config.mmd_degree, "polynomial kernel degree");
  cmd->add_option("--mmd-scale", config.mmd_scale,
                  "polynomial kernel slope (0 = 1/dim per attachment)");
  cmd->add_option("--triplet-margin", config.triplet_margin, "triplet hinge margin");
  cmd->add_option("--fractions", strings.fractions,
                  "train,validation,test fractions (default 0.6,0.15,0.25)");
}

void add_eval_options(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--metric", config.metric, "kl|euclidean|cosine|nc|all");
  cmd->add_option("--embedding", config.embedding, "probability|logit");
  cmd->add_option("--depth", config.depth, "ranking depth for MAP (0 = full)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-modal retrieval with correlation-aligned branch networks"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig config;
  FlagStrings strings;

  // --config is applied before the other flags so flags win.
  std::string config_path;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  }
  if (!config_path.empty()) {
    try {
      coralign::apply_config_file(config, config_path);
    } catch (const coralign::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  app.add_option("--config", config_path, "flat key = value configuration file");
  app.add_option("--seed", config.seed, "master seed for all randomness");
  app.add_option("--out", config.out, "output directory");

  auto* featurize = app.add_subcommand(
      "featurize-text", "TF-IDF featurize a corpus of id<TAB>label<TAB>text lines");
  featurize->add_option("--corpus", config.corpus, "corpus file");
  featurize->add_option("--top-k", config.vocab_top_k,
                        "keep only the top-k tokens by document frequency");

  auto* gen = app.add_subcommand("gen-synth", "generate a synthetic two-modality dataset");
  gen->add_option("--labels", config.synth_labels, "number of event labels");
  gen->add_option("--images", config.synth_images, "image sample count");
  gen->add_option("--texts", config.synth_texts, "text sample count");
  gen->add_option("--image-dim", config.synth_image_dim, "image feature width");
  gen->add_option("--text-dim", config.synth_text_dim, "text feature width");
  gen->add_option("--sigma", config.synth_sigma, "cluster noise");

  auto* train = app.add_subcommand("train", "train both branches jointly");
  train->add_option("--manifest", config.manifest, "dataset manifest");
  add_train_options(train, config, strings);

  auto* eval = app.add_subcommand("eval", "MAP over the test partition, both directions");
  eval->add_option("--model", config.model, "trained model file");
  eval->add_option("--manifest", config.manifest, "dataset manifest");
  eval->add_option("--fractions", strings.fractions, "partition fractions");
  eval->add_option("--per-query", config.per_query_path, "per-query AP dump file");
  add_eval_options(eval, config);

  auto* retrieve = app.add_subcommand("retrieve", "top-k cross-modal neighbors of a query");
  retrieve->add_option("--model", config.model, "trained model file");
  retrieve->add_option("--manifest", config.manifest, "dataset manifest");
  retrieve->add_option("--query-id", config.query_id, "test-partition sample id");
  retrieve->add_option("--k", config.top_k, "number of results");
  retrieve->add_option("--fractions", strings.fractions, "partition fractions");
  add_eval_options(retrieve, config);

  auto* holdout = app.add_subcommand(
      "holdout-eval", "train without some labels, compare held vs seen query MAP");
  holdout->add_option("--manifest", config.manifest, "dataset manifest");
  holdout->add_option("--held-labels", strings.held_labels,
                      "comma-separated labels to hold out of train/validation");
  add_train_options(holdout, config, strings);
  add_eval_options(holdout, config);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!strings.fractions.empty()) {
      config.fractions = coralign::parse_fractions(strings.fractions);
    }
    if (!strings.held_labels.empty()) {
      config.held_labels = coralign::parse_label_list(strings.held_labels);
    }
    if (featurize->parsed()) return coralign::cmd_featurize_text(config);
    if (gen->parsed()) return coralign::cmd_gen_synth(config);
    if (train->parsed()) return coralign::cmd_train(config);
    if (eval->parsed()) return coralign::cmd_eval(config);
    if (retrieve->parsed()) return coralign::cmd_retrieve(config);
    if (holdout->parsed()) return coralign::cmd_holdout_eval(config);
  } catch (const coralign::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
