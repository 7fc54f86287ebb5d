#include "coralign/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>

#include "coralign/errors.hpp"

namespace coralign {

std::vector<std::string> tokenize(std::string_view text) {
  const auto& stopwords = english_stopwords();
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2 && !stopwords.contains(current)) {
      tokens.push_back(current);
    }
    current.clear();
  };
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

Vocabulary tfidf_fit(const std::vector<std::string>& corpus, std::size_t top_k) {
  if (corpus.empty()) throw EmptyCorpus("tfidf_fit: corpus is empty");

  // std::map keeps tokens sorted, which fixes both the tie-break and the
  // final index order.
  std::map<std::string, std::size_t> df;
  for (const std::string& doc : corpus) {
    auto tokens = tokenize(doc);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (const auto& token : tokens) ++df[token];
  }

  std::vector<std::pair<std::string, std::size_t>> entries(df.begin(), df.end());
  if (top_k > 0 && entries.size() > top_k) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    entries.resize(top_k);
    std::sort(entries.begin(), entries.end());
  }

  Vocabulary vocab;
  vocab.corpus_size = corpus.size();
  vocab.tokens.reserve(entries.size());
  vocab.df.reserve(entries.size());
  for (const auto& [token, count] : entries) {
    vocab.index.emplace(token, vocab.tokens.size());
    vocab.tokens.push_back(token);
    vocab.df.push_back(count);
  }
  return vocab;
}

std::vector<double> tfidf_transform(const Vocabulary& vocab, std::string_view text) {
  std::vector<double> out(vocab.size(), 0.0);
  for (const auto& token : tokenize(text)) {
    auto it = vocab.index.find(token);
    if (it == vocab.index.end()) continue;
    out[it->second] += 1.0;  // raw term count first
  }
  const double n = static_cast<double>(vocab.corpus_size);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] > 0.0) out[i] *= std::log(n / static_cast<double>(vocab.df[i]));
  }
  return out;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "#N=" << vocab.corpus_size << "\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.tokens[i] << "\t" << i << "\t" << vocab.df[i] << "\n";
  }
  if (!out) throw ParseError(path + ": write failed");
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || line.rfind("#N=", 0) != 0) {
    throw ParseError(path + ": missing #N= header");
  }
  Vocabulary vocab;
  vocab.corpus_size = std::strtoull(line.c_str() + 3, nullptr, 10);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = line.find('\t', tab1 == std::string::npos ? tab1 : tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos) {
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": expected token<TAB>index<TAB>df");
    }
    const std::string token = line.substr(0, tab1);
    const std::size_t index = std::strtoull(line.substr(tab1 + 1, tab2 - tab1 - 1).c_str(),
                                            nullptr, 10);
    const std::size_t df = std::strtoull(line.substr(tab2 + 1).c_str(), nullptr, 10);
    if (index != vocab.tokens.size()) {
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": indices must be dense and ascending");
    }
    vocab.index.emplace(token, index);
    vocab.tokens.push_back(token);
    vocab.df.push_back(df);
  }
  return vocab;
}

namespace {

double parse_strict_double(const std::string& token, const std::string& path,
                           std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size()) {
    throw ParseError(path + ": line " + std::to_string(line_no) +
                     ": bad numeric token '" + token + "'");
  }
  if (!std::isfinite(v)) {
    throw ParseError(path + ": line " + std::to_string(line_no) +
                     ": non-finite value");
  }
  return v;
}

}  // namespace

std::vector<FeatureRecord> load_feature_file(const std::string& path,
                                             std::size_t expected_dim) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::vector<FeatureRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = line.find('\t', tab1 == std::string::npos ? tab1 : tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos) {
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": expected id<TAB>label<TAB>values");
    }
    FeatureRecord record;
    record.id = line.substr(0, tab1);
    if (record.id.empty()) {
      throw ParseError(path + ": line " + std::to_string(line_no) + ": empty id");
    }
    const std::string label_str = line.substr(tab1 + 1, tab2 - tab1 - 1);
    char* end = nullptr;
    const long label = std::strtol(label_str.c_str(), &end, 10);
    if (label_str.empty() || end != label_str.c_str() + label_str.size() || label < 0) {
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": bad label '" + label_str + "'");
    }
    record.label = static_cast<int>(label);

    const std::string values = line.substr(tab2 + 1);
    std::size_t start = 0;
    while (start <= values.size()) {
      auto comma = values.find(',', start);
      if (comma == std::string::npos) comma = values.size();
      record.values.push_back(
          parse_strict_double(values.substr(start, comma - start), path, line_no));
      start = comma + 1;
    }
    if (expected_dim > 0 && record.values.size() != expected_dim) {
      throw DimensionMismatch(path + ": record '" + record.id + "' has " +
                              std::to_string(record.values.size()) +
                              " values, expected " + std::to_string(expected_dim));
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_feature_file(const std::vector<FeatureRecord>& records,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  char buf[32];
  for (const auto& record : records) {
    out << record.id << "\t" << record.label << "\t";
    for (std::size_t i = 0; i < record.values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", record.values[i]);
      out << buf << (i + 1 == record.values.size() ? "" : ",");
    }
    out << "\n";
  }
  if (!out) throw ParseError(path + ": write failed");
}

}  // namespace coralign
