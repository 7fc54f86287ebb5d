#include "coralign/datagen.hpp"

#include <cmath>
#include <cstdio>

#include "coralign/rng.hpp"

namespace coralign {

namespace {

enum Stream : std::uint64_t {
  kPrototypes = 1,
  kImageMap = 2,
  kTextMap = 3,
  kImageNoise = 4,
  kTextNoise = 5,
};

Matrix random_map(std::size_t out_dim, std::size_t latent_dim, Rng& rng) {
  Matrix map(out_dim, latent_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(latent_dim));
  for (std::size_t i = 0; i < out_dim * latent_dim; ++i) {
    map.data()[i] = rng.normal() * scale;
  }
  return map;
}

std::vector<FeatureRecord> make_modality(const char* prefix, std::size_t count,
                                         std::size_t dim, const Matrix& map,
                                         const Matrix& prototypes, double sigma,
                                         std::size_t num_labels, Rng& noise) {
  std::vector<FeatureRecord> records;
  records.reserve(count);
  char id[32];
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t label = i % num_labels;  // balanced up to +-1
    std::snprintf(id, sizeof(id), "%s_%05zu", prefix, i);
    FeatureRecord record;
    record.id = id;
    record.label = static_cast<int>(label);
    record.values.resize(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      double v = 0.0;
      for (std::size_t l = 0; l < map.cols(); ++l) {
        v += map(c, l) * prototypes(label, l);
      }
      record.values[c] = v + sigma * noise.normal();
    }
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace

void SynthSpec::validate() const {
  if (num_labels < 2) throw ConfigError("synthetic dataset needs at least 2 labels");
  if (sigma <= 0.0) throw ConfigError("synthetic sigma must be positive");
  if (image_dim < 2 || text_dim < 2) {
    throw ConfigError("synthetic feature dims must be at least 2");
  }
  if (latent_dim < 1) throw ConfigError("latent dim must be at least 1");
}

Dataset generate(const SynthSpec& spec) {
  spec.validate();

  Rng proto_rng(Rng::derive(spec.seed, kPrototypes));
  Matrix prototypes(spec.num_labels, spec.latent_dim);
  for (std::size_t i = 0; i < spec.num_labels * spec.latent_dim; ++i) {
    prototypes.data()[i] = proto_rng.normal();
  }

  Rng image_map_rng(Rng::derive(spec.seed, kImageMap));
  Rng text_map_rng(Rng::derive(spec.seed, kTextMap));
  const Matrix image_map = random_map(spec.image_dim, spec.latent_dim, image_map_rng);
  const Matrix text_map = random_map(spec.text_dim, spec.latent_dim, text_map_rng);

  Rng image_noise(Rng::derive(spec.seed, kImageNoise));
  Rng text_noise(Rng::derive(spec.seed, kTextNoise));
  auto images = make_modality("img", spec.n_images, spec.image_dim, image_map,
                              prototypes, spec.sigma, spec.num_labels, image_noise);
  auto texts = make_modality("txt", spec.n_texts, spec.text_dim, text_map,
                             prototypes, spec.sigma, spec.num_labels, text_noise);
  return make_dataset(std::move(images), std::move(texts));
}

}  // namespace coralign
