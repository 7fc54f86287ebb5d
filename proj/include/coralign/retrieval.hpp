#pragma once

#include <span>
#include <string>
#include <vector>

#include "coralign/dataset.hpp"
#include "coralign/matrix.hpp"

namespace coralign {

enum class Metric { KlDivergence, Euclidean, Cosine, NormalizedCorrelation };

const char* metric_name(Metric metric);
Metric parse_metric(const std::string& name);

enum class EmbeddingKind { Probability, Logit };

const char* embedding_kind_name(EmbeddingKind kind);
EmbeddingKind parse_embedding_kind(const std::string& name);

/// Distance between two vectors of equal dimension.
///   Euclidean:  l2 norm of the difference
///   Cosine:     1 - cos(a, b); zero vectors are degenerate
///   KL:         sum a_i ln(a_i / b_i) after eps=1e-12 smoothing and
///               renormalization; query goes first
///   NC:         1 - cosine of the mean-centered vectors; constant vectors
///               are degenerate
double distance(Metric metric, std::span<const double> a, std::span<const double> b);

/// Embeddings for one modality with parallel ids and labels.
struct EmbeddingIndex {
  Modality modality = Modality::Image;
  EmbeddingKind kind = EmbeddingKind::Probability;
  Matrix embeddings;
  std::vector<std::string> ids;
  std::vector<int> labels;

  std::size_t size() const { return ids.size(); }
};

EmbeddingIndex make_index(Modality modality, EmbeddingKind kind, Matrix embeddings,
                          std::vector<std::string> ids, std::vector<int> labels);

struct RankedEntry {
  std::string id;
  int label = 0;
  double score = 0.0;  // negated distance, so scores are non-increasing
  bool relevant = false;
};

struct RankingList {
  std::string query_id;
  int query_label = 0;
  std::vector<RankedEntry> entries;
  std::vector<std::string> skipped;  // candidates degenerate under the metric
};

/// Ranks every index entry by ascending distance to the query, ties broken by
/// ascending candidate id. Degenerate candidates are skipped and recorded.
RankingList rank(std::span<const double> query, int query_label, std::string query_id,
                 const EmbeddingIndex& index, Metric metric);

/// (1/R) * sum over ranks k of (R_k / k) * rel_k, with R the number of
/// relevant entries in the whole list. With depth > 0 only the top `depth`
/// ranks contribute terms; R stays the full count. Throws NoRelevantItems
/// when R = 0.
double average_precision(const RankingList& ranking, std::size_t depth = 0);

struct QueryScore {
  std::string id;
  double ap = 0.0;
  std::size_t first_relevant_rank = 0;  // 1-based
};

struct MapResult {
  double map = 0.0;
  std::size_t num_queries = 0;  // queries contributing to the mean
  std::size_t num_skipped = 0;  // no relevant item, or degenerate query
  std::vector<QueryScore> per_query;
};

/// Mean AP of every query row against the index. Queries without relevant
/// items (or degenerate under the metric) are excluded and counted; throws
/// NoEvaluableQueries when nothing remains.
MapResult mean_ap(const EmbeddingIndex& queries, const EmbeddingIndex& index,
                  Metric metric, std::size_t depth = 0);

}  // namespace coralign
