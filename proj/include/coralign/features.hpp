#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace coralign {

/// The bundled English stopword list used by tokenize().
const std::unordered_set<std::string>& english_stopwords();

/// Lowercases, splits on non-alphanumeric runs, drops stopwords and tokens
/// shorter than 2 characters.
std::vector<std::string> tokenize(std::string_view text);

/// Fitted TF-IDF vocabulary: tokens indexed lexicographically, document
/// frequencies, and the fitting corpus size.
struct Vocabulary {
  std::vector<std::string> tokens;                    // index -> token
  std::unordered_map<std::string, std::size_t> index; // token -> index
  std::vector<std::size_t> df;                        // index -> document frequency
  std::size_t corpus_size = 0;

  std::size_t size() const { return tokens.size(); }
};

/// Fits a vocabulary over the retained tokens of `corpus`. With top_k > 0 the
/// vocabulary keeps the top_k tokens by document frequency, ties broken
/// lexicographically.
Vocabulary tfidf_fit(const std::vector<std::string>& corpus, std::size_t top_k = 0);

/// Dense TF-IDF vector: raw in-document count times ln(N / df). Tokens
/// outside the vocabulary are ignored.
std::vector<double> tfidf_transform(const Vocabulary& vocab, std::string_view text);

void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

/// One line of a feature file: `id<TAB>label<TAB>v1,v2,...,vd`.
struct FeatureRecord {
  std::string id;
  int label = 0;
  std::vector<double> values;
};

/// Loads a feature file, validating numeric syntax, finiteness and (when
/// expected_dim > 0) the declared width of every record.
std::vector<FeatureRecord> load_feature_file(const std::string& path,
                                             std::size_t expected_dim = 0);

void write_feature_file(const std::vector<FeatureRecord>& records,
                        const std::string& path);

}  // namespace coralign
