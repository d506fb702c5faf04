#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "irdecide/corpus_io.hpp"

namespace irdecide::slicing {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// How a slice was built; enough to rebuild it from the same inputs.
struct Selector {
  std::string rule;           // length | frequency | lexical | memory | file
  nlohmann::json parameters;  // rule parameters, infinities as "inf"
  std::optional<SystemId> source_system;

  bool operator==(const Selector&) const = default;
};

struct QuerySlice {
  std::string name;
  std::set<QueryId> query_ids;
  Selector selector;
  bool system_independent = true;
  // Non-fatal notes: excluded empty queries, unknown ids, ...
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return query_ids.size(); }
  bool operator==(const QuerySlice&) const = default;
};

/// Open interval (lower, upper) as in the set-builder definitions.
struct OpenInterval {
  double lower = 0.0;
  double upper = kUnbounded;

  bool contains(double x) const { return lower < x && x < upper; }
  bool operator==(const OpenInterval&) const = default;
};

/// Parses `m:n[,m:n...]`; `n` may be `inf`.
std::vector<OpenInterval> parse_bins(std::string_view text);
/// Half-open integer bins [e0,e1), [e1,e2), ..., [ek,inf) mapped to the
/// open intervals (e0-1, e1), (e1-1, e2), ..., (ek-1, inf), lower bounds
/// clamped at 0. Parses `e0,e1,...,ek`; a last edge of `inf` closes the
/// final bin.
std::vector<OpenInterval> bins_from_edges(std::string_view text);

/// {q | m < len(q) < n}. Throws InputError when m >= n or m < 0.
QuerySlice slice_by_length(const io::QuerySet& queries, OpenInterval bounds);

/// {q | m < min TF(token of q) < n}; unknown tokens have TF 0. Queries with
/// no tokens are excluded with a warning.
QuerySlice slice_by_min_frequency(
    const io::QuerySet& queries, const io::Collection& collection,
    OpenInterval bounds,
    io::FrequencyStatistic statistic =
        io::FrequencyStatistic::kCollectionFrequency);

/// Queries whose top `depth` documents in `run` each share at most
/// `max_overlap` unique tokens with the query. Queries the run does not
/// answer are excluded with a warning. Throws InputError when a top-ranked
/// document is missing from the collection.
QuerySlice slice_by_lexical_overlap(const io::RunFile& run,
                                    const io::QuerySet& queries,
                                    const io::Collection& collection,
                                    std::size_t max_overlap, std::size_t depth);

/// Dissimilarity between two token lists.
using QueryDistance = std::function<double(const std::vector<std::string>&,
                                           const std::vector<std::string>&)>;

/// 1 - |A ∩ B| / |A ∪ B| over unique tokens; two empty sets are identical.
double jaccard_distance(const std::vector<std::string>& a,
                        const std::vector<std::string>& b);

/// Eval queries whose nearest training query is farther than `epsilon`.
/// Throws InputError on an empty training set.
QuerySlice slice_out_of_distribution(const io::QuerySet& eval_queries,
                                     const io::QuerySet& train_queries,
                                     double epsilon,
                                     const QueryDistance& distance =
                                         jaccard_distance,
                                     std::string distance_name = "jaccard");

/// Listed ids intersected with the query set; unknown ids become warnings.
/// Throws EmptySetError when nothing is left.
QuerySlice slice_from_ids(std::span<const QueryId> ids,
                          const io::QuerySet& queries, std::string name);
QuerySlice slice_from_file(std::istream& in, const io::QuerySet& queries,
                           std::string name);

nlohmann::json to_json(const QuerySlice& slice);
QuerySlice slice_from_json(const nlohmann::json& j);

}  // namespace irdecide::slicing
