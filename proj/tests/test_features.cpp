#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "coralign/features.hpp"
#include "coralign/errors.hpp"

using namespace coralign;

TEST_CASE("tokenize lowercases, splits and filters") {
  CHECK(tokenize("The cat, the CAT!") == std::vector<std::string>{"cat", "cat"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("a b").empty());  // stopword and too-short token
  CHECK(tokenize("Protest2014 in-city") ==
        std::vector<std::string>{"protest2014", "city"});
}

TEST_CASE("tokenize is idempotent on its own joined output") {
  const auto tokens = tokenize("Floods hit the coastal towns; thousands displaced!");
  std::string joined;
  for (const auto& t : tokens) {
    joined += t;
    joined += ' ';
  }
  CHECK(tokenize(joined) == tokens);
}

TEST_CASE("tfidf_fit counts document frequencies") {
  const Vocabulary vocab = tfidf_fit({"cat dog", "dog bird"});
  CHECK(vocab.corpus_size == 2);
  REQUIRE(vocab.size() == 3);
  CHECK(vocab.tokens == std::vector<std::string>{"bird", "cat", "dog"});
  CHECK(vocab.df[vocab.index.at("bird")] == 1);
  CHECK(vocab.df[vocab.index.at("cat")] == 1);
  CHECK(vocab.df[vocab.index.at("dog")] == 2);
}

TEST_CASE("tfidf_fit single document and empty corpus") {
  const Vocabulary vocab = tfidf_fit({"storm storm surge"});
  for (std::size_t df : vocab.df) CHECK(df == 1);
  CHECK_THROWS_AS(tfidf_fit({}), EmptyCorpus);
}

TEST_CASE("tfidf_fit top-k keeps highest document frequency") {
  const Vocabulary vocab = tfidf_fit({"cat dog", "dog bird"}, 1);
  REQUIRE(vocab.size() == 1);
  CHECK(vocab.tokens[0] == "dog");

  // Tie on df: lexicographically smaller token wins.
  const Vocabulary tied = tfidf_fit({"cat dog", "dog cat", "zebra cat dog"}, 2);
  CHECK(tied.tokens == std::vector<std::string>{"cat", "dog"});
}

TEST_CASE("tfidf_transform applies count times ln(N/df)") {
  const Vocabulary vocab = tfidf_fit({"cat dog", "dog bird"});
  const auto vec = tfidf_transform(vocab, "cat cat");
  CHECK(vec[vocab.index.at("cat")] == doctest::Approx(2.0 * std::log(2.0)));
  CHECK(vec[vocab.index.at("dog")] == 0.0);
  CHECK(vec[vocab.index.at("bird")] == 0.0);

  // A token present in every document has idf ln(1) = 0.
  const auto all_dog = tfidf_transform(vocab, "dog");
  for (double v : all_dog) CHECK(v == 0.0);

  // Empty documents and out-of-vocabulary tokens give the zero vector.
  for (double v : tfidf_transform(vocab, "")) CHECK(v == 0.0);
  for (double v : tfidf_transform(vocab, "unseen words only")) CHECK(v == 0.0);
}

TEST_CASE("tfidf_transform has no negatives or NaNs") {
  const std::vector<std::string> corpus{
      "floods in the valley", "drought and floods", "election results disputed",
      "valley sports update"};
  const Vocabulary vocab = tfidf_fit(corpus);
  for (const auto& doc : corpus) {
    for (double v : tfidf_transform(vocab, doc)) {
      CHECK(v >= 0.0);
      CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("df table is recoverable from transforming the fitting corpus") {
  const std::vector<std::string> corpus{"cat dog", "dog bird", "cat cat fish"};
  const Vocabulary vocab = tfidf_fit(corpus);
  std::vector<std::size_t> recomputed(vocab.size(), 0);
  for (const auto& doc : corpus) {
    auto tokens = tokenize(doc);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (const auto& t : tokens) ++recomputed[vocab.index.at(t)];
  }
  CHECK(recomputed == vocab.df);
}

TEST_CASE("vocabulary file round-trips") {
  const auto dir = std::filesystem::temp_directory_path() / "coralign_vocab";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "vocab.tsv").string();

  const Vocabulary vocab = tfidf_fit({"cat dog", "dog bird", "cat cat"});
  save_vocabulary(vocab, path);
  const Vocabulary loaded = load_vocabulary(path);
  CHECK(loaded.tokens == vocab.tokens);
  CHECK(loaded.df == vocab.df);
  CHECK(loaded.corpus_size == vocab.corpus_size);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "#N=3");
  std::filesystem::remove_all(dir);
}

TEST_CASE("feature file loading validates structure") {
  const auto dir = std::filesystem::temp_directory_path() / "coralign_features";
  std::filesystem::create_directories(dir);
  const std::string good = (dir / "good.tsv").string();
  {
    std::ofstream out(good);
    out << "a\t0\t1,2,3,4\n";
    out << "b\t1\t5,6,7,8\n";
    out << "c\t0\t-1.5,0,2.25,1e-3\n";
  }
  const auto records = load_feature_file(good, 4);
  REQUIRE(records.size() == 3);
  CHECK(records[0].id == "a");
  CHECK(records[2].values[0] == -1.5);

  const std::string wrong_dim = (dir / "dim.tsv").string();
  {
    std::ofstream out(wrong_dim);
    out << "a\t0\t1,2,3,4,5\n";
  }
  CHECK_THROWS_AS(load_feature_file(wrong_dim, 4), DimensionMismatch);

  const std::string bad_token = (dir / "token.tsv").string();
  {
    std::ofstream out(bad_token);
    out << "a\t0\t1,2\n";
    out << "b\t0\t1,oops\n";
  }
  try {
    load_feature_file(bad_token);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  CHECK_THROWS_AS(load_feature_file((dir / "missing.tsv").string()), ParseError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("feature file writing is read back exactly") {
  const auto dir = std::filesystem::temp_directory_path() / "coralign_features_rt";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "rt.tsv").string();

  std::vector<FeatureRecord> records{
      {"x1", 0, {0.1 + 0.2, -1.0 / 3.0, 1e-17}},
      {"x2", 3, {2.0, 0.0, -0.0}},
  };
  write_feature_file(records, path);
  const auto loaded = load_feature_file(path, 3);
  REQUIRE(loaded.size() == 2);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].id == records[i].id);
    CHECK(loaded[i].label == records[i].label);
    for (std::size_t j = 0; j < records[i].values.size(); ++j) {
      CHECK(loaded[i].values[j] == records[i].values[j]);
    }
  }
  std::filesystem::remove_all(dir);
}
