#include "coralign/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include "coralign/rng.hpp"

namespace coralign {

const char* modality_name(Modality m) {
  return m == Modality::Image ? "image" : "text";
}

namespace {

std::vector<SampleRecord> to_samples(std::vector<FeatureRecord> records,
                                     Modality modality, std::size_t& dim) {
  std::vector<SampleRecord> samples;
  samples.reserve(records.size());
  std::unordered_set<std::string> seen;
  for (auto& record : records) {
    if (!seen.insert(record.id).second) {
      throw ParseError("duplicate " + std::string(modality_name(modality)) +
                       " id '" + record.id + "'");
    }
    if (dim == 0) dim = record.values.size();
    if (record.values.size() != dim) {
      throw DimensionMismatch("record '" + record.id + "' has " +
                              std::to_string(record.values.size()) +
                              " values, expected " + std::to_string(dim));
    }
    for (double v : record.values) {
      if (!std::isfinite(v)) {
        throw ParseError("record '" + record.id + "': non-finite feature");
      }
    }
    samples.push_back({std::move(record.id), modality, record.label,
                       std::move(record.values)});
  }
  return samples;
}

int max_label(const std::vector<SampleRecord>& samples) {
  int max = -1;
  for (const auto& s : samples) max = std::max(max, s.label);
  return max;
}

}  // namespace

Dataset make_dataset(std::vector<FeatureRecord> images,
                     std::vector<FeatureRecord> texts) {
  Dataset data;
  data.images = to_samples(std::move(images), Modality::Image, data.image_dim);
  data.texts = to_samples(std::move(texts), Modality::Text, data.text_dim);

  const int max_image = max_label(data.images);
  const int max_text = max_label(data.texts);
  const int max = std::max(max_image, max_text);
  data.num_labels = max < 0 ? 0 : static_cast<std::size_t>(max) + 1;
  if (max_image != max_text && max_image >= 0 && max_text >= 0) {
    data.warnings.push_back("modalities disagree on label count (image max " +
                            std::to_string(max_image) + ", text max " +
                            std::to_string(max_text) + "); using " +
                            std::to_string(data.num_labels));
  }

  std::set<int> present;
  for (const auto& s : data.images) present.insert(s.label);
  for (const auto& s : data.texts) present.insert(s.label);
  for (int label = 0; label < max; ++label) {
    if (!present.contains(label)) {
      data.warnings.push_back("label gap: label " + std::to_string(label) +
                              " has no samples");
    }
  }
  return data;
}

Dataset load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  const auto base_dir = std::filesystem::path(path).parent_path();

  std::vector<FeatureRecord> images, texts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": expected modality<TAB>path");
    }
    const std::string modality = line.substr(0, tab);
    std::filesystem::path file = line.substr(tab + 1);
    if (file.is_relative()) file = base_dir / file;
    if (!std::filesystem::exists(file)) {
      throw DanglingReference(path + ": line " + std::to_string(line_no) +
                              ": missing feature file '" + file.string() + "'");
    }
    auto records = load_feature_file(file.string());
    if (modality == "image") {
      std::move(records.begin(), records.end(), std::back_inserter(images));
    } else if (modality == "text") {
      std::move(records.begin(), records.end(), std::back_inserter(texts));
    } else {
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": unknown modality '" + modality + "'");
    }
  }
  return make_dataset(std::move(images), std::move(texts));
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<Modality, std::string>>& entries) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (const auto& [modality, file] : entries) {
    out << modality_name(modality) << "\t" << file << "\n";
  }
  if (!out) throw ParseError(path + ": write failed");
}

namespace {

ModalitySplit split_modality(const std::vector<SampleRecord>& samples,
                             const std::array<double, 3>& fractions, Rng& rng,
                             Modality modality, std::vector<std::string>& warnings) {
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    by_label[samples[i].label].push_back(i);
  }
  const std::size_t active_parts =
      static_cast<std::size_t>(fractions[0] > 0.0) +
      static_cast<std::size_t>(fractions[1] > 0.0) +
      static_cast<std::size_t>(fractions[2] > 0.0);

  ModalitySplit out;
  for (auto& [label, indices] : by_label) {
    rng.shuffle(indices);
    const std::size_t n = indices.size();
    if (n < active_parts) {
      warnings.push_back(std::string(modality_name(modality)) + " label " +
                         std::to_string(label) + " has only " + std::to_string(n) +
                         " samples; all assigned to train");
      out.train.insert(out.train.end(), indices.begin(), indices.end());
      continue;
    }
    std::size_t n_val = static_cast<std::size_t>(
        std::llround(fractions[1] * static_cast<double>(n)));
    std::size_t n_test = static_cast<std::size_t>(
        std::llround(fractions[2] * static_cast<double>(n)));
    if (n_val + n_test > n) n_test = n - n_val;
    const std::size_t n_train = n - n_val - n_test;
    out.train.insert(out.train.end(), indices.begin(), indices.begin() + n_train);
    out.validation.insert(out.validation.end(), indices.begin() + n_train,
                          indices.begin() + n_train + n_val);
    out.test.insert(out.test.end(), indices.begin() + n_train + n_val, indices.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace

Partition split(const Dataset& data, const std::array<double, 3>& fractions,
                std::uint64_t seed) {
  for (double f : fractions) {
    if (f < 0.0) throw ConfigError("split fractions must be non-negative");
  }
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1, got " + std::to_string(sum));
  }
  Partition partition;
  Rng rng(Rng::derive(seed, 0x7d17));  // dedicated split stream
  partition.image = split_modality(data.images, fractions, rng, Modality::Image,
                                   partition.warnings);
  partition.text = split_modality(data.texts, fractions, rng, Modality::Text,
                                  partition.warnings);
  return partition;
}

Partition new_event_holdout(const Dataset& data, const std::vector<int>& held_labels,
                            const Partition& base) {
  for (int label : held_labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= data.num_labels) {
      throw ConfigError("held label " + std::to_string(label) +
                        " outside label space [0, " +
                        std::to_string(data.num_labels) + ")");
    }
  }
  const std::unordered_set<int> held(held_labels.begin(), held_labels.end());
  auto strip = [&](const std::vector<SampleRecord>& samples,
                   std::vector<std::size_t> indices) {
    std::erase_if(indices,
                  [&](std::size_t i) { return held.contains(samples[i].label); });
    return indices;
  };
  Partition out = base;
  out.image.train = strip(data.images, std::move(out.image.train));
  out.image.validation = strip(data.images, std::move(out.image.validation));
  out.text.train = strip(data.texts, std::move(out.text.train));
  out.text.validation = strip(data.texts, std::move(out.text.validation));
  if (!held.empty() && (out.image.train.empty() || out.text.train.empty())) {
    throw EmptyTraining("holding out " + std::to_string(held.size()) +
                        " labels empties the training set");
  }
  return out;
}

LabeledBatch gather(const Dataset& data, Modality modality,
                    const std::vector<std::size_t>& indices) {
  const auto& samples = data.samples(modality);
  const std::size_t dim = modality == Modality::Image ? data.image_dim : data.text_dim;
  LabeledBatch batch;
  batch.features = Matrix(indices.size(), dim);
  batch.labels.reserve(indices.size());
  batch.ids.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto& sample = samples[indices[r]];
    std::copy(sample.features.begin(), sample.features.end(),
              batch.features.data() + r * dim);
    batch.labels.push_back(sample.label);
    batch.ids.push_back(sample.id);
  }
  return batch;
}

}  // namespace coralign
