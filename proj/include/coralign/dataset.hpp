#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coralign/features.hpp"
#include "coralign/matrix.hpp"

namespace coralign {

enum class Modality { Image, Text };

const char* modality_name(Modality m);

struct SampleRecord {
  std::string id;
  Modality modality = Modality::Image;
  int label = 0;
  std::vector<double> features;
};

/// An in-memory two-modality dataset. `num_labels` is inferred as
/// max label + 1 across both modalities; irregularities (label gaps,
/// modality-skewed label coverage) are reported as warnings, not errors.
struct Dataset {
  std::vector<SampleRecord> images;
  std::vector<SampleRecord> texts;
  std::size_t num_labels = 0;
  std::size_t image_dim = 0;
  std::size_t text_dim = 0;
  std::vector<std::string> warnings;

  const std::vector<SampleRecord>& samples(Modality m) const {
    return m == Modality::Image ? images : texts;
  }
};

/// Index sets into one modality's sample vector, sorted ascending.
struct ModalitySplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;

  friend bool operator==(const ModalitySplit&, const ModalitySplit&) = default;
};

struct Partition {
  ModalitySplit image;
  ModalitySplit text;
  std::vector<std::string> warnings;

  const ModalitySplit& modality(Modality m) const {
    return m == Modality::Image ? image : text;
  }
};

Dataset make_dataset(std::vector<FeatureRecord> images,
                     std::vector<FeatureRecord> texts);

/// Manifest format: UTF-8 lines `modality<TAB>feature_file_path`, where
/// modality is `image` or `text`. Relative paths resolve against the
/// manifest's directory.
Dataset load_manifest(const std::string& path);

void write_manifest(const std::string& path,
                    const std::vector<std::pair<Modality, std::string>>& entries);

/// Per-modality per-label random split with fractions (train, validation,
/// test). Validation and test counts are rounded to nearest; train takes the
/// remainder. Labels with fewer samples than active partitions go wholly to
/// train with a warning. Deterministic per seed.
Partition split(const Dataset& data, const std::array<double, 3>& fractions,
                std::uint64_t seed);

/// Removes every held-label sample from train and validation; the test set
/// is untouched so held-label samples remain as queries.
Partition new_event_holdout(const Dataset& data, const std::vector<int>& held_labels,
                            const Partition& base);

/// Gathers the feature matrix and labels for one modality's index set.
struct LabeledBatch {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> ids;
};

LabeledBatch gather(const Dataset& data, Modality modality,
                    const std::vector<std::size_t>& indices);

}  // namespace coralign
