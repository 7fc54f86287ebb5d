#pragma once

#include <cstdint>

#include "coralign/dataset.hpp"

namespace coralign {

/// Synthetic unpaired two-modality dataset: per label, one latent prototype
/// is projected into each modality's space by a fixed random linear map, and
/// samples are the projection plus Gaussian noise. Modalities share only the
/// label-level prototypes, never individual samples.
struct SynthSpec {
  std::size_t num_labels = 5;
  std::size_t n_images = 200;
  std::size_t n_texts = 200;
  std::size_t image_dim = 64;
  std::size_t text_dim = 100;
  double sigma = 0.1;
  std::uint64_t seed = 42;
  std::size_t latent_dim = 16;

  void validate() const;
};

Dataset generate(const SynthSpec& spec);

}  // namespace coralign
