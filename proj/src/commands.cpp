#include "coralign/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "coralign/datagen.hpp"
#include "coralign/network.hpp"

namespace coralign {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& value, const std::string& key) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v)) {
    throw ConfigError("bad numeric value '" + value + "' for " + key);
  }
  return v;
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size()) {
    throw ConfigError("bad integer value '" + value + "' for " + key);
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= csv.size()) {
    auto comma = csv.find(',', start);
    if (comma == std::string::npos) comma = csv.size();
    parts.push_back(trim(csv.substr(start, comma - start)));
    start = comma + 1;
  }
  return parts;
}

}  // namespace

std::vector<int> parse_label_list(const std::string& csv) {
  std::vector<int> labels;
  if (trim(csv).empty()) return labels;
  for (const auto& part : split_csv(csv)) {
    labels.push_back(static_cast<int>(parse_u64(part, "held_labels")));
  }
  return labels;
}

std::array<double, 3> parse_fractions(const std::string& csv) {
  const auto parts = split_csv(csv);
  if (parts.size() != 3) {
    throw ConfigError("fractions need exactly 3 comma-separated values");
  }
  return {parse_double(parts[0], "fractions"), parse_double(parts[1], "fractions"),
          parse_double(parts[2], "fractions")};
}

TrainConfig RunConfig::train_config() const {
  TrainConfig tc;
  tc.batch_size = batch_size;
  tc.learning_rate = learning_rate;
  tc.momentum = momentum;
  tc.epochs = epochs;
  tc.alignment.kind = parse_alignment(alignment);
  tc.alignment.mmd_offset = mmd_offset;
  tc.alignment.mmd_degree = mmd_degree;
  tc.alignment.mmd_scale = mmd_scale;
  tc.alignment.triplet_margin = triplet_margin;
  tc.alignment_weight = alignment_weight;
  tc.seed = seed;
  tc.hidden_units = hidden_units;
  return tc;
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ": line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "batch_size") config.batch_size = parse_u64(value, key);
    else if (key == "learning_rate") config.learning_rate = parse_double(value, key);
    else if (key == "momentum") config.momentum = parse_double(value, key);
    else if (key == "epochs") config.epochs = parse_u64(value, key);
    else if (key == "alignment") config.alignment = value;
    else if (key == "alignment_weight") config.alignment_weight = parse_double(value, key);
    else if (key == "seed") config.seed = parse_u64(value, key);
    else if (key == "hidden_units") config.hidden_units = parse_u64(value, key);
    else if (key == "mmd_offset") config.mmd_offset = parse_double(value, key);
    else if (key == "mmd_degree") config.mmd_degree = static_cast<int>(parse_u64(value, key));
    else if (key == "mmd_scale") config.mmd_scale = parse_double(value, key);
    else if (key == "triplet_margin") config.triplet_margin = parse_double(value, key);
    else if (key == "fractions") config.fractions = parse_fractions(value);
    else if (key == "manifest") config.manifest = value;
    else if (key == "model") config.model = value;
    else if (key == "out") config.out = value;
    else if (key == "corpus") config.corpus = value;
    else if (key == "synth_labels") config.synth_labels = parse_u64(value, key);
    else if (key == "synth_images") config.synth_images = parse_u64(value, key);
    else if (key == "synth_texts") config.synth_texts = parse_u64(value, key);
    else if (key == "synth_image_dim") config.synth_image_dim = parse_u64(value, key);
    else if (key == "synth_text_dim") config.synth_text_dim = parse_u64(value, key);
    else if (key == "synth_sigma") config.synth_sigma = parse_double(value, key);
    else if (key == "metric") config.metric = value;
    else if (key == "embedding") config.embedding = value;
    else if (key == "depth") config.depth = parse_u64(value, key);
    else if (key == "held_labels") config.held_labels = parse_label_list(value);
    else if (key == "query_id") config.query_id = value;
    else if (key == "top_k") config.top_k = parse_u64(value, key);
    else if (key == "per_query") config.per_query_path = value;
    else if (key == "vocab_top_k") config.vocab_top_k = parse_u64(value, key);
    else throw ConfigError(path + ": unknown config key '" + key + "'");
  }
}

namespace {

void ensure_out_dir(const std::string& out) {
  if (!out.empty()) std::filesystem::create_directories(out);
}

std::string out_path(const RunConfig& config, const std::string& name) {
  return (std::filesystem::path(config.out) / name).string();
}

Dataset load_dataset(const RunConfig& config) {
  if (config.manifest.empty()) throw ConfigError("manifest path is required");
  Dataset data = load_manifest(config.manifest);
  for (const auto& warning : data.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  return data;
}

void report_partition_warnings(const Partition& partition) {
  for (const auto& warning : partition.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
}

EmbeddingIndex embed(const BranchNet& branch, const Dataset& data, Modality modality,
                     const std::vector<std::size_t>& indices, EmbeddingKind kind) {
  const LabeledBatch batch = gather(data, modality, indices);
  if (batch.features.cols() != branch.input_dim()) {
    throw DimensionMismatch(std::string(modality_name(modality)) + " features are " +
                            std::to_string(batch.features.cols()) +
                            "-dimensional but the model expects " +
                            std::to_string(branch.input_dim()));
  }
  const ForwardCache cache = forward(branch, batch.features);
  Matrix embeddings = kind == EmbeddingKind::Probability ? cache.probs : cache.logits;
  return make_index(modality, kind, std::move(embeddings), batch.ids, batch.labels);
}

std::vector<Metric> metric_list(const std::string& name) {
  if (name == "all") {
    return {Metric::KlDivergence, Metric::Euclidean, Metric::Cosine,
            Metric::NormalizedCorrelation};
  }
  return {parse_metric(name)};
}

std::string map_row(const std::string& direction, Metric metric, const MapResult& result) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s,%s,%.12g,%zu,%zu", direction.c_str(),
                metric_name(metric), result.map, result.num_queries,
                result.num_skipped);
  return buf;
}

ModelParams load_model_checked(const RunConfig& config) {
  if (config.model.empty()) throw ConfigError("model path is required");
  return load_model(config.model);
}

}  // namespace

int cmd_featurize_text(const RunConfig& config) {
  if (config.corpus.empty()) throw ConfigError("corpus path is required");
  std::ifstream in(config.corpus);
  if (!in) throw ParseError(config.corpus + ": cannot open");

  std::vector<FeatureRecord> records;
  std::vector<std::string> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = line.find('\t', tab1 == std::string::npos ? tab1 : tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos) {
      throw ParseError(config.corpus + ": line " + std::to_string(line_no) +
                       ": expected id<TAB>label<TAB>text");
    }
    FeatureRecord record;
    record.id = line.substr(0, tab1);
    record.label =
        static_cast<int>(parse_u64(line.substr(tab1 + 1, tab2 - tab1 - 1), "label"));
    records.push_back(std::move(record));
    docs.push_back(line.substr(tab2 + 1));
  }
  if (docs.empty()) throw EmptyCorpus(config.corpus + ": no documents");

  const Vocabulary vocab = tfidf_fit(docs, config.vocab_top_k);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    records[i].values = tfidf_transform(vocab, docs[i]);
  }

  ensure_out_dir(config.out);
  save_vocabulary(vocab, out_path(config, "vocabulary.tsv"));
  write_feature_file(records, out_path(config, "text.features"));
  std::cout << "vocabulary size " << vocab.size() << " over " << vocab.corpus_size
            << " documents\n";
  return 0;
}

int cmd_gen_synth(const RunConfig& config) {
  SynthSpec spec;
  spec.num_labels = config.synth_labels;
  spec.n_images = config.synth_images;
  spec.n_texts = config.synth_texts;
  spec.image_dim = config.synth_image_dim;
  spec.text_dim = config.synth_text_dim;
  spec.sigma = config.synth_sigma;
  spec.seed = config.seed;
  const Dataset data = generate(spec);

  auto to_records = [](const std::vector<SampleRecord>& samples) {
    std::vector<FeatureRecord> records;
    records.reserve(samples.size());
    for (const auto& s : samples) records.push_back({s.id, s.label, s.features});
    return records;
  };
  ensure_out_dir(config.out);
  write_feature_file(to_records(data.images), out_path(config, "images.features"));
  write_feature_file(to_records(data.texts), out_path(config, "texts.features"));
  write_manifest(out_path(config, "manifest.tsv"),
                 {{Modality::Image, "images.features"},
                  {Modality::Text, "texts.features"}});
  std::cout << "wrote " << data.images.size() << " image and " << data.texts.size()
            << " text samples over " << data.num_labels << " labels to " << config.out
            << "\n";
  return 0;
}

int cmd_train(const RunConfig& config) {
  const Dataset data = load_dataset(config);
  const Partition partition = split(data, config.fractions, config.seed);
  report_partition_warnings(partition);

  const TrainResult result = train(data, partition, config.train_config());

  ensure_out_dir(config.out);
  save_model(result.params, out_path(config, "model.txt"));
  write_train_log(result.log, out_path(config, "trainlog.csv"));
  if (!result.log.epochs.empty()) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "trained %zu epochs; loss %.6g -> %.6g\n",
                  result.log.epochs.size(), result.log.epochs.front().total_loss,
                  result.log.epochs.back().total_loss);
    std::cout << buf;
  } else {
    std::cout << "trained 0 epochs; wrote initialized model\n";
  }
  return 0;
}

int cmd_eval(const RunConfig& config) {
  const ModelParams model = load_model_checked(config);
  const Dataset data = load_dataset(config);
  const Partition partition = split(data, config.fractions, config.seed);
  report_partition_warnings(partition);

  const EmbeddingKind kind = parse_embedding_kind(config.embedding);
  const EmbeddingIndex image_index =
      embed(model.image, data, Modality::Image, partition.image.test, kind);
  const EmbeddingIndex text_index =
      embed(model.text, data, Modality::Text, partition.text.test, kind);

  const auto metrics = metric_list(config.metric);
  if (!config.per_query_path.empty() && metrics.size() > 1) {
    throw ConfigError("per-query dump needs a single metric, not 'all'");
  }

  ensure_out_dir(config.out);
  std::ofstream report(out_path(config, "map_report.csv"));
  if (!report) throw ParseError(out_path(config, "map_report.csv") + ": cannot open");
  report << "direction,metric,map,num_queries,num_skipped\n";
  std::cout << "direction,metric,map,num_queries,num_skipped\n";

  std::ofstream per_query;
  if (!config.per_query_path.empty()) {
    per_query.open(config.per_query_path);
    if (!per_query) throw ParseError(config.per_query_path + ": cannot open");
    per_query << "query_id,ap,first_relevant_rank\n";
  }

  for (const Metric metric : metrics) {
    const MapResult image_to_text = mean_ap(image_index, text_index, metric, config.depth);
    const MapResult text_to_image = mean_ap(text_index, image_index, metric, config.depth);
    for (const auto& [direction, result] :
         {std::pair<std::string, const MapResult&>{"ImageToText", image_to_text},
          {"TextToImage", text_to_image}}) {
      const std::string row = map_row(direction, metric, result);
      report << row << "\n";
      std::cout << row << "\n";
      if (per_query.is_open()) {
        for (const auto& q : result.per_query) {
          char buf[128];
          std::snprintf(buf, sizeof(buf), "%s,%.12g,%zu\n", q.id.c_str(), q.ap,
                        q.first_relevant_rank);
          per_query << buf;
        }
      }
    }
  }
  return 0;
}

int cmd_retrieve(const RunConfig& config) {
  const ModelParams model = load_model_checked(config);
  const Dataset data = load_dataset(config);
  const Partition partition = split(data, config.fractions, config.seed);
  if (config.query_id.empty()) throw ConfigError("query_id is required");

  const EmbeddingKind kind = parse_embedding_kind(config.embedding);
  const Metric metric = parse_metric(config.metric == "all" ? "cosine" : config.metric);

  // Locate the query in either modality's test partition; candidates come
  // from the other modality.
  for (const Modality query_modality : {Modality::Image, Modality::Text}) {
    const auto& samples = data.samples(query_modality);
    for (std::size_t index : partition.modality(query_modality).test) {
      if (samples[index].id != config.query_id) continue;

      const Modality other =
          query_modality == Modality::Image ? Modality::Text : Modality::Image;
      const BranchNet& query_branch =
          query_modality == Modality::Image ? model.image : model.text;
      const EmbeddingIndex candidates =
          embed(other == Modality::Image ? model.image : model.text, data, other,
                partition.modality(other).test, kind);
      const EmbeddingIndex query_embedding =
          embed(query_branch, data, query_modality, {index}, kind);

      RankingList list = rank(query_embedding.embeddings.row(0), samples[index].label,
                              config.query_id, candidates, metric);
      const std::size_t k = std::min(config.top_k, list.entries.size());
      std::cout << "query " << config.query_id << " (label " << samples[index].label
                << ", " << modality_name(query_modality) << ") -> top " << k << " "
                << modality_name(other) << " results by " << metric_name(metric)
                << "\n";
      std::cout << "rank\tid\tlabel\tscore\trelevant\n";
      for (std::size_t i = 0; i < k; ++i) {
        const RankedEntry& e = list.entries[i];
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%zu\t%s\t%d\t%.6g\t%s\n", i + 1, e.id.c_str(),
                      e.label, e.score, e.relevant ? "yes" : "no");
        std::cout << buf;
      }
      return 0;
    }
  }
  throw UnknownQueryId("query id '" + config.query_id + "' not in the test partition");
}

namespace {

struct GroupedQueries {
  EmbeddingIndex held;
  EmbeddingIndex seen;
};

GroupedQueries split_queries(const EmbeddingIndex& queries,
                             const std::vector<int>& held_labels) {
  const std::unordered_set<int> held(held_labels.begin(), held_labels.end());
  GroupedQueries out;
  std::vector<std::size_t> held_rows, seen_rows;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    (held.contains(queries.labels[i]) ? held_rows : seen_rows).push_back(i);
  }
  auto subset = [&](const std::vector<std::size_t>& rows) {
    EmbeddingIndex index;
    index.modality = queries.modality;
    index.kind = queries.kind;
    index.embeddings = gather_rows(queries.embeddings, rows);
    for (std::size_t r : rows) {
      index.ids.push_back(queries.ids[r]);
      index.labels.push_back(queries.labels[r]);
    }
    return index;
  };
  out.held = subset(held_rows);
  out.seen = subset(seen_rows);
  return out;
}

}  // namespace

int cmd_holdout_eval(const RunConfig& config) {
  const Dataset data = load_dataset(config);
  const Partition base = split(data, config.fractions, config.seed);
  const Partition holdout = new_event_holdout(data, config.held_labels, base);
  report_partition_warnings(base);

  const TrainResult result = train(data, holdout, config.train_config());
  ensure_out_dir(config.out);
  save_model(result.params, out_path(config, "model.txt"));
  write_train_log(result.log, out_path(config, "trainlog.csv"));

  const EmbeddingKind kind = parse_embedding_kind(config.embedding);
  const Metric metric = parse_metric(config.metric == "all" ? "cosine" : config.metric);
  const EmbeddingIndex image_index =
      embed(result.params.image, data, Modality::Image, base.image.test, kind);
  const EmbeddingIndex text_index =
      embed(result.params.text, data, Modality::Text, base.text.test, kind);

  const GroupedQueries image_groups = split_queries(image_index, config.held_labels);
  const GroupedQueries text_groups = split_queries(text_index, config.held_labels);

  std::ofstream report(out_path(config, "holdout_report.csv"));
  if (!report) {
    throw ParseError(out_path(config, "holdout_report.csv") + ": cannot open");
  }
  report << "group,direction,metric,map,num_queries,num_skipped\n";
  std::cout << "group,direction,metric,map,num_queries,num_skipped\n";

  struct Pooled {
    double ap_sum = 0.0;
    std::size_t queries = 0;
  };
  Pooled pooled_held, pooled_seen;

  auto emit = [&](const std::string& group, const std::string& direction,
                  const EmbeddingIndex& queries, const EmbeddingIndex& index,
                  Pooled& pooled) {
    if (queries.size() == 0) return;
    const MapResult result = mean_ap(queries, index, metric, config.depth);
    const std::string row = group + "," + map_row(direction, metric, result);
    report << row << "\n";
    std::cout << row << "\n";
    pooled.ap_sum += result.map * static_cast<double>(result.num_queries);
    pooled.queries += result.num_queries;
  };
  emit("held", "ImageToText", image_groups.held, text_index, pooled_held);
  emit("held", "TextToImage", text_groups.held, image_index, pooled_held);
  emit("seen", "ImageToText", image_groups.seen, text_index, pooled_seen);
  emit("seen", "TextToImage", text_groups.seen, image_index, pooled_seen);

  auto emit_pooled = [&](const std::string& group, const Pooled& pooled) {
    if (pooled.queries == 0) return;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,Pooled,%s,%.12g,%zu,0", group.c_str(),
                  metric_name(metric), pooled.ap_sum / static_cast<double>(pooled.queries),
                  pooled.queries);
    report << buf << "\n";
    std::cout << buf << "\n";
  };
  emit_pooled("held", pooled_held);
  emit_pooled("seen", pooled_seen);
  return 0;
}

}  // namespace coralign
