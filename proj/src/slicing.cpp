#include "irdecide/slicing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

#include "irdecide/error.hpp"

namespace irdecide::slicing {

namespace {

nlohmann::json bound_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double parse_bound(std::string_view text) {
  if (text == "inf" || text == "+inf" || text == "∞") return kUnbounded;
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InputError("invalid bin bound `" + std::string(text) + "`");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

void check_bounds(OpenInterval b) {
  if (std::isnan(b.lower) || std::isnan(b.upper) || b.lower < 0 ||
      !(b.lower < b.upper)) {
    throw InputError("slice bounds need 0 <= m < n");
  }
}

nlohmann::json interval_json(OpenInterval b) {
  return {{"lower", bound_to_json(b.lower)}, {"upper", bound_to_json(b.upper)}};
}

std::string interval_name(OpenInterval b) {
  std::ostringstream os;
  os << "(" << b.lower << ", ";
  if (std::isinf(b.upper)) {
    os << "inf";
  } else {
    os << b.upper;
  }
  os << ")";
  return os.str();
}

std::vector<std::string> unique_sorted(const std::vector<std::string>& tokens) {
  std::vector<std::string> out = tokens;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t sorted_intersection_size(const std::vector<std::string>& a,
                                     const std::vector<std::string>& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace

std::vector<OpenInterval> parse_bins(std::string_view text) {
  std::vector<OpenInterval> bins;
  for (std::string_view part : split(text, ',')) {
    auto colon = part.find(':');
    if (colon == std::string_view::npos) {
      throw InputError("invalid bin `" + std::string(part) +
                       "` (expected m:n)");
    }
    OpenInterval b{parse_bound(part.substr(0, colon)),
                   parse_bound(part.substr(colon + 1))};
    check_bounds(b);
    bins.push_back(b);
  }
  return bins;
}

std::vector<OpenInterval> bins_from_edges(std::string_view text) {
  std::vector<double> edges;
  for (std::string_view part : split(text, ',')) {
    edges.push_back(parse_bound(part));
  }
  if (edges.empty()) throw InputError("no bin edges given");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i] < edges[i + 1])) {
      throw InputError("bin edges must be strictly increasing");
    }
  }
  for (double e : edges) {
    if (!std::isinf(e) && e != std::floor(e)) {
      throw InputError("bin edges must be integers");
    }
  }
  if (!std::isinf(edges.back())) edges.push_back(kUnbounded);
  std::vector<OpenInterval> bins;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    // [0, e) maps to (0, e): lower bounds stay >= 0, so a frequency bin
    // never selects queries with unknown tokens (TF 0).
    OpenInterval b{std::max(0.0, edges[i] - 1.0), edges[i + 1]};
    check_bounds(b);
    bins.push_back(b);
  }
  return bins;
}

QuerySlice slice_by_length(const io::QuerySet& queries, OpenInterval bounds) {
  check_bounds(bounds);
  QuerySlice slice;
  slice.name = "length " + interval_name(bounds);
  slice.selector = {"length", interval_json(bounds), std::nullopt};
  for (const auto& [id, q] : queries.queries()) {
    if (bounds.contains(static_cast<double>(q.tokens.size()))) {
      slice.query_ids.insert(id);
    }
  }
  return slice;
}

QuerySlice slice_by_min_frequency(const io::QuerySet& queries,
                                  const io::Collection& collection,
                                  OpenInterval bounds,
                                  io::FrequencyStatistic statistic) {
  check_bounds(bounds);
  QuerySlice slice;
  slice.name = "min-frequency " + interval_name(bounds);
  nlohmann::json params = interval_json(bounds);
  params["statistic"] =
      statistic == io::FrequencyStatistic::kCollectionFrequency
          ? "collection_frequency"
          : "document_frequency";
  slice.selector = {"frequency", std::move(params), std::nullopt};
  std::size_t empty = 0;
  for (const auto& [id, q] : queries.queries()) {
    if (q.tokens.empty()) {
      ++empty;
      continue;
    }
    std::uint64_t lowest = std::numeric_limits<std::uint64_t>::max();
    for (const std::string& t : q.tokens) {
      lowest = std::min(lowest, collection.frequency(t, statistic));
    }
    if (bounds.contains(static_cast<double>(lowest))) slice.query_ids.insert(id);
  }
  if (empty > 0) {
    slice.warnings.push_back(std::to_string(empty) +
                             " queries without tokens excluded");
  }
  return slice;
}

QuerySlice slice_by_lexical_overlap(const io::RunFile& run,
                                    const io::QuerySet& queries,
                                    const io::Collection& collection,
                                    std::size_t max_overlap,
                                    std::size_t depth) {
  if (depth < 1) throw InputError("lexical slice depth must be >= 1");
  QuerySlice slice;
  slice.name = "lexical overlap <= " + std::to_string(max_overlap) + " @" +
               std::to_string(depth);
  slice.selector = {"lexical",
                    {{"max_overlap", max_overlap}, {"depth", depth}},
                    run.system_id()};
  slice.system_independent = false;
  std::size_t unanswered = 0;
  for (const auto& [id, q] : queries.queries()) {
    auto ranking = run.ranking(id);
    if (ranking.empty()) {
      ++unanswered;
      continue;
    }
    const std::vector<std::string> query_terms = unique_sorted(q.tokens);
    bool selected = true;
    for (std::size_t i = 0; i < ranking.size() && i < depth; ++i) {
      const auto* doc = collection.find(ranking[i].doc_id);
      if (!doc) {
        throw InputError("document " + ranking[i].doc_id + " ranked by " +
                         run.system_id() + " for query " + id +
                         " is missing from the collection");
      }
      if (sorted_intersection_size(query_terms, unique_sorted(*doc)) >
          max_overlap) {
        selected = false;
        break;
      }
    }
    if (selected) slice.query_ids.insert(id);
  }
  if (unanswered > 0) {
    slice.warnings.push_back(std::to_string(unanswered) + " queries without " +
                             run.system_id() + " results excluded");
  }
  return slice;
}

double jaccard_distance(const std::vector<std::string>& a,
                        const std::vector<std::string>& b) {
  auto ua = unique_sorted(a);
  auto ub = unique_sorted(b);
  std::size_t inter = sorted_intersection_size(ua, ub);
  std::size_t uni = ua.size() + ub.size() - inter;
  if (uni == 0) return 0.0;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

QuerySlice slice_out_of_distribution(const io::QuerySet& eval_queries,
                                     const io::QuerySet& train_queries,
                                     double epsilon,
                                     const QueryDistance& distance,
                                     std::string distance_name) {
  if (train_queries.size() == 0) {
    throw InputError("out-of-distribution slice needs training queries");
  }
  if (std::isnan(epsilon)) throw InputError("epsilon is NaN");
  QuerySlice slice;
  std::ostringstream name;
  name << "out-of-distribution eps=" << epsilon;
  slice.name = name.str();
  slice.selector = {"memory",
                    {{"epsilon", epsilon}, {"distance", distance_name}},
                    std::nullopt};
  for (const auto& [id, q] : eval_queries.queries()) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& [_, t] : train_queries.queries()) {
      nearest = std::min(nearest, distance(q.tokens, t.tokens));
      if (nearest <= epsilon) break;
    }
    if (nearest > epsilon) slice.query_ids.insert(id);
  }
  return slice;
}

QuerySlice slice_from_ids(std::span<const QueryId> ids,
                          const io::QuerySet& queries, std::string name) {
  QuerySlice slice;
  slice.name = name;
  std::set<QueryId> unknown;
  for (const QueryId& id : ids) {
    if (queries.contains(id)) {
      slice.query_ids.insert(id);
    } else {
      unknown.insert(id);
    }
  }
  slice.selector = {"file", {{"name", std::move(name)}, {"listed", ids.size()}},
                    std::nullopt};
  if (!unknown.empty()) {
    std::string msg = std::to_string(unknown.size()) + " unknown query ids:";
    for (const QueryId& id : unknown) msg += " " + id;
    slice.warnings.push_back(std::move(msg));
  }
  if (slice.query_ids.empty()) {
    throw EmptySetError("query list " + slice.name +
                        " matches no known query");
  }
  return slice;
}

QuerySlice slice_from_file(std::istream& in, const io::QuerySet& queries,
                           std::string name) {
  std::vector<QueryId> ids = io::parse_qid_list(in);
  return slice_from_ids(ids, queries, std::move(name));
}

nlohmann::json to_json(const QuerySlice& slice) {
  nlohmann::json j;
  j["name"] = slice.name;
  j["query_ids"] = slice.query_ids;
  j["rule"] = slice.selector.rule;
  j["parameters"] = slice.selector.parameters;
  j["source_system"] = slice.selector.source_system
                           ? nlohmann::json(*slice.selector.source_system)
                           : nlohmann::json(nullptr);
  j["system_independent"] = slice.system_independent;
  j["warnings"] = slice.warnings;
  return j;
}

QuerySlice slice_from_json(const nlohmann::json& j) {
  QuerySlice s;
  s.name = j.at("name").get<std::string>();
  s.query_ids = j.at("query_ids").get<std::set<QueryId>>();
  s.selector.rule = j.at("rule").get<std::string>();
  s.selector.parameters = j.at("parameters");
  if (!j.at("source_system").is_null()) {
    s.selector.source_system = j.at("source_system").get<std::string>();
  }
  s.system_independent = j.at("system_independent").get<bool>();
  s.warnings = j.at("warnings").get<std::vector<std::string>>();
  return s;
}

}  // namespace irdecide::slicing
