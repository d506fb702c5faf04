#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "irdecide/corpus_io.hpp"

namespace irdecide::metrics {

enum class MetricKind { kNdcg, kRr, kRecall, kPrecision };

struct MetricSpec {
  MetricKind kind = MetricKind::kNdcg;
  int cutoff = 10;
  // Minimum grade counted as relevant by rr/recall/precision. Unset means
  // the grade scale's default.
  std::optional<int> threshold;

  /// Accepts `ndcg@10`, `rr@10`, `mrr@10`, `recall@100`, `p@1`,
  /// `precision@1`, with an optional `:g` suffix setting the threshold.
  static MetricSpec parse(std::string_view text);
  /// Canonical name, e.g. `ndcg@10` or `recall@100:2`.
  std::string name() const;
  int threshold_for(io::GradeScale scale) const;

  bool operator==(const MetricSpec&) const = default;
  auto operator<=>(const MetricSpec&) const = default;
};

using ScoreMap = std::map<QueryId, double>;

struct PerQueryScores {
  MetricSpec metric;
  ScoreMap scores;
  // Queries without any judged-relevant document; never in `scores`.
  std::set<QueryId> skipped;

  bool operator==(const PerQueryScores&) const = default;
};

using Ranking = std::span<const io::RankedDoc>;

// Per-query metric functions. `judgments` may be null (no judgments). The
// optional-returning ones yield nullopt when the query must be skipped.
std::optional<double> ndcg_at_k(Ranking ranking,
                                const io::Qrels::Judgments* judgments, int k);
std::optional<double> rr_at_k(Ranking ranking,
                              const io::Qrels::Judgments* judgments, int k,
                              int threshold);
std::optional<double> recall_at_k(Ranking ranking,
                                  const io::Qrels::Judgments* judgments, int k,
                                  int threshold);
std::optional<double> precision_at_k(Ranking ranking,
                                     const io::Qrels::Judgments* judgments,
                                     int k, int threshold);

/// Scores every query that appears in the qrels or the run. Judged queries
/// the run does not answer score 0; queries without judged-relevant
/// documents go to `skipped`.
PerQueryScores evaluate(const io::RunFile& run, const io::Qrels& qrels,
                        const MetricSpec& spec);

struct MeanResult {
  double mean = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;

  bool operator==(const MeanResult&) const = default;
};

/// Arithmetic mean over scored queries, optionally restricted to a slice.
/// Throws EmptySetError when nothing is left to average.
MeanResult mean(const PerQueryScores& scores,
                const std::set<QueryId>* slice = nullptr);

/// `qid<TAB>score` lines in query-id order.
void write_per_query_tsv(std::ostream& out, const PerQueryScores& scores);

}  // namespace irdecide::metrics
