#include "coralign/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coralign {

const char* metric_name(Metric metric) {
  switch (metric) {
    case Metric::KlDivergence: return "kl";
    case Metric::Euclidean: return "euclidean";
    case Metric::Cosine: return "cosine";
    case Metric::NormalizedCorrelation: return "nc";
  }
  return "?";
}

Metric parse_metric(const std::string& name) {
  if (name == "kl") return Metric::KlDivergence;
  if (name == "euclidean") return Metric::Euclidean;
  if (name == "cosine") return Metric::Cosine;
  if (name == "nc") return Metric::NormalizedCorrelation;
  throw ConfigError("unknown metric '" + name + "'");
}

const char* embedding_kind_name(EmbeddingKind kind) {
  return kind == EmbeddingKind::Probability ? "probability" : "logit";
}

EmbeddingKind parse_embedding_kind(const std::string& name) {
  if (name == "probability") return EmbeddingKind::Probability;
  if (name == "logit") return EmbeddingKind::Logit;
  throw ConfigError("unknown embedding kind '" + name + "'");
}

namespace {

void check_dims(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("distance between vectors of dims " + std::to_string(a.size()) +
                     " and " + std::to_string(b.size()));
  }
  if (a.empty()) throw ShapeError("distance on empty vectors");
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateVector("cosine distance on a zero vector");
  }
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

double kl_divergence(std::span<const double> a, std::span<const double> b) {
  constexpr double kEps = 1e-12;
  double sum_a = 0.0, sum_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum_a += a[i] + kEps;
    sum_b += b[i] + kEps;
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double pa = (a[i] + kEps) / sum_a;
    const double pb = (b[i] + kEps) / sum_b;
    kl += pa * std::log(pa / pb);
  }
  return kl;
}

double normalized_correlation(std::span<const double> a, std::span<const double> b) {
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) /
                        static_cast<double>(a.size());
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) /
                        static_cast<double>(b.size());
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ca = a[i] - mean_a;
    const double cb = b[i] - mean_b;
    dot += ca * cb;
    na += ca * ca;
    nb += cb * cb;
  }
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateVector("normalized correlation on a constant vector");
  }
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

double distance(Metric metric, std::span<const double> a, std::span<const double> b) {
  check_dims(a, b);
  switch (metric) {
    case Metric::KlDivergence: return kl_divergence(a, b);
    case Metric::Euclidean: return euclidean(a, b);
    case Metric::Cosine: return cosine_distance(a, b);
    case Metric::NormalizedCorrelation: return normalized_correlation(a, b);
  }
  throw ConfigError("unhandled metric");
}

EmbeddingIndex make_index(Modality modality, EmbeddingKind kind, Matrix embeddings,
                          std::vector<std::string> ids, std::vector<int> labels) {
  if (embeddings.rows() != ids.size() || ids.size() != labels.size()) {
    throw ShapeError("index rows, ids and labels must align");
  }
  return {modality, kind, std::move(embeddings), std::move(ids), std::move(labels)};
}

RankingList rank(std::span<const double> query, int query_label, std::string query_id,
                 const EmbeddingIndex& index, Metric metric) {
  if (metric == Metric::KlDivergence && index.kind != EmbeddingKind::Probability) {
    throw ConfigError("kl divergence needs probability embeddings");
  }
  if (!index.embeddings.empty() && query.size() != index.embeddings.cols()) {
    throw ShapeError("query dim " + std::to_string(query.size()) +
                     " does not match index dim " +
                     std::to_string(index.embeddings.cols()));
  }
  RankingList list;
  list.query_id = std::move(query_id);
  list.query_label = query_label;

  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    try {
      order.emplace_back(distance(metric, query, index.embeddings.row(i)), i);
    } catch (const DegenerateVector&) {
      list.skipped.push_back(index.ids[i]);
    }
  }
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return index.ids[a.second] < index.ids[b.second];
  });

  list.entries.reserve(order.size());
  for (const auto& [dist, i] : order) {
    list.entries.push_back({index.ids[i], index.labels[i], -dist,
                            index.labels[i] == query_label});
  }
  return list;
}

double average_precision(const RankingList& ranking, std::size_t depth) {
  std::size_t relevant = 0;
  for (const auto& entry : ranking.entries) relevant += entry.relevant ? 1 : 0;
  if (relevant == 0) {
    throw NoRelevantItems("query '" + ranking.query_id + "' has no relevant items");
  }
  const std::size_t limit =
      depth == 0 ? ranking.entries.size() : std::min(depth, ranking.entries.size());
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < limit; ++k) {
    if (ranking.entries[k].relevant) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  return sum / static_cast<double>(relevant);
}

MapResult mean_ap(const EmbeddingIndex& queries, const EmbeddingIndex& index,
                  Metric metric, std::size_t depth) {
  if (queries.size() == 0) throw NoEvaluableQueries("empty query set");
  MapResult result;
  double sum = 0.0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    try {
      const RankingList list = rank(queries.embeddings.row(q), queries.labels[q],
                                    queries.ids[q], index, metric);
      const double ap = average_precision(list, depth);
      std::size_t first = 0;
      for (std::size_t k = 0; k < list.entries.size(); ++k) {
        if (list.entries[k].relevant) {
          first = k + 1;
          break;
        }
      }
      result.per_query.push_back({queries.ids[q], ap, first});
      sum += ap;
      ++result.num_queries;
    } catch (const NoRelevantItems&) {
      ++result.num_skipped;
    } catch (const DegenerateVector&) {
      ++result.num_skipped;
    }
  }
  if (result.num_queries == 0) {
    throw NoEvaluableQueries("no query had relevant items under " +
                             std::string(metric_name(metric)));
  }
  result.map = sum / static_cast<double>(result.num_queries);
  return result;
}

}  // namespace coralign
