#include "irdecide/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <vector>

#include "irdecide/error.hpp"

namespace irdecide::metrics {

namespace {

void check_cutoff(int k) {
  if (k < 1) {
    throw InputError("metric cutoff must be >= 1, got " + std::to_string(k));
  }
}

int grade_of(const io::Qrels::Judgments* judgments, const DocId& doc) {
  if (!judgments) return 0;
  auto it = judgments->find(doc);
  return it == judgments->end() ? 0 : it->second;
}

std::size_t count_relevant(const io::Qrels::Judgments* judgments,
                           int threshold) {
  if (!judgments) return 0;
  return static_cast<std::size_t>(
      std::count_if(judgments->begin(), judgments->end(),
                    [&](const auto& kv) { return kv.second >= threshold; }));
}

std::size_t relevant_in_top_k(Ranking ranking,
                              const io::Qrels::Judgments* judgments, int k,
                              int threshold) {
  std::size_t depth = std::min<std::size_t>(ranking.size(), k);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (grade_of(judgments, ranking[i].doc_id) >= threshold) ++hits;
  }
  return hits;
}

double gain(int grade) { return std::exp2(static_cast<double>(grade)) - 1.0; }

double discount(std::size_t rank) {
  return std::log2(static_cast<double>(rank) + 1.0);
}

int parse_positive(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("invalid metric `" + std::string(whole) + "`");
  }
  return value;
}

}  // namespace

MetricSpec MetricSpec::parse(std::string_view text) {
  auto at = text.find('@');
  if (at == std::string_view::npos) {
    throw ConfigError("invalid metric `" + std::string(text) +
                      "` (expected kind@k, e.g. ndcg@10)");
  }
  std::string_view kind = text.substr(0, at);
  std::string_view rest = text.substr(at + 1);
  std::optional<int> threshold;
  if (auto colon = rest.find(':'); colon != std::string_view::npos) {
    threshold = parse_positive(rest.substr(colon + 1), text);
    rest = rest.substr(0, colon);
  }
  MetricSpec spec;
  if (kind == "ndcg") {
    spec.kind = MetricKind::kNdcg;
  } else if (kind == "rr" || kind == "mrr") {
    spec.kind = MetricKind::kRr;
  } else if (kind == "recall" || kind == "r") {
    spec.kind = MetricKind::kRecall;
  } else if (kind == "p" || kind == "precision") {
    spec.kind = MetricKind::kPrecision;
  } else {
    throw ConfigError("unknown metric kind `" + std::string(kind) + "`");
  }
  spec.cutoff = parse_positive(rest, text);
  if (spec.cutoff < 1) {
    throw ConfigError("metric cutoff must be >= 1 in `" + std::string(text) +
                      "`");
  }
  if (threshold) {
    if (spec.kind == MetricKind::kNdcg) {
      throw ConfigError("ndcg takes no relevance threshold: `" +
                        std::string(text) + "`");
    }
    if (*threshold < 1 || *threshold > io::kMaxGradedGrade) {
      throw ConfigError("relevance threshold out of range in `" +
                        std::string(text) + "`");
    }
  }
  spec.threshold = threshold;
  return spec;
}

std::string MetricSpec::name() const {
  std::string out;
  switch (kind) {
    case MetricKind::kNdcg: out = "ndcg"; break;
    case MetricKind::kRr: out = "rr"; break;
    case MetricKind::kRecall: out = "recall"; break;
    case MetricKind::kPrecision: out = "p"; break;
  }
  out += "@" + std::to_string(cutoff);
  if (threshold) out += ":" + std::to_string(*threshold);
  return out;
}

int MetricSpec::threshold_for(io::GradeScale scale) const {
  int t = threshold.value_or(io::default_relevance_threshold(scale));
  if (t > io::max_grade(scale)) {
    throw ConfigError("relevance threshold " + std::to_string(t) + " of " +
                      name() + " exceeds the " +
                      std::string(io::to_string(scale)) + " grade scale");
  }
  return t;
}

std::optional<double> ndcg_at_k(Ranking ranking,
                                const io::Qrels::Judgments* judgments, int k) {
  check_cutoff(k);
  std::vector<int> grades;
  if (judgments) {
    for (const auto& [_, g] : *judgments) {
      if (g > 0) grades.push_back(g);
    }
  }
  if (grades.empty()) return std::nullopt;
  std::sort(grades.begin(), grades.end(), std::greater<>());

  double ideal = 0.0;
  for (std::size_t i = 0; i < grades.size() && i < static_cast<std::size_t>(k);
       ++i) {
    ideal += gain(grades[i]) / discount(i + 1);
  }
  double dcg = 0.0;
  std::size_t depth = std::min<std::size_t>(ranking.size(), k);
  for (std::size_t i = 0; i < depth; ++i) {
    int g = grade_of(judgments, ranking[i].doc_id);
    if (g > 0) dcg += gain(g) / discount(i + 1);
  }
  return dcg / ideal;
}

std::optional<double> rr_at_k(Ranking ranking,
                              const io::Qrels::Judgments* judgments, int k,
                              int threshold) {
  check_cutoff(k);
  if (count_relevant(judgments, threshold) == 0) return std::nullopt;
  std::size_t depth = std::min<std::size_t>(ranking.size(), k);
  for (std::size_t i = 0; i < depth; ++i) {
    if (grade_of(judgments, ranking[i].doc_id) >= threshold) {
      return 1.0 / static_cast<double>(i + 1);
    }
  }
  return 0.0;
}

std::optional<double> recall_at_k(Ranking ranking,
                                  const io::Qrels::Judgments* judgments, int k,
                                  int threshold) {
  check_cutoff(k);
  std::size_t relevant = count_relevant(judgments, threshold);
  if (relevant == 0) return std::nullopt;
  return static_cast<double>(
             relevant_in_top_k(ranking, judgments, k, threshold)) /
         static_cast<double>(relevant);
}

std::optional<double> precision_at_k(Ranking ranking,
                                     const io::Qrels::Judgments* judgments,
                                     int k, int threshold) {
  check_cutoff(k);
  if (count_relevant(judgments, threshold) == 0) return std::nullopt;
  return static_cast<double>(
             relevant_in_top_k(ranking, judgments, k, threshold)) /
         static_cast<double>(k);
}

PerQueryScores evaluate(const io::RunFile& run, const io::Qrels& qrels,
                        const MetricSpec& spec) {
  PerQueryScores out;
  out.metric = spec;
  const int threshold = spec.kind == MetricKind::kNdcg
                            ? 1
                            : spec.threshold_for(qrels.scale());

  auto score_query = [&](const QueryId& query) {
    const io::Qrels::Judgments* judgments = qrels.query(query);
    Ranking ranking = run.ranking(query);
    std::optional<double> value;
    switch (spec.kind) {
      case MetricKind::kNdcg:
        value = ndcg_at_k(ranking, judgments, spec.cutoff);
        break;
      case MetricKind::kRr:
        value = rr_at_k(ranking, judgments, spec.cutoff, threshold);
        break;
      case MetricKind::kRecall:
        value = recall_at_k(ranking, judgments, spec.cutoff, threshold);
        break;
      case MetricKind::kPrecision:
        value = precision_at_k(ranking, judgments, spec.cutoff, threshold);
        break;
    }
    if (value) {
      out.scores.emplace(query, *value);
    } else {
      out.skipped.insert(query);
    }
  };

  for (const auto& [query, _] : qrels.judgments()) score_query(query);
  for (const auto& [query, _] : run.entries()) {
    if (!qrels.query(query)) out.skipped.insert(query);
  }
  return out;
}

MeanResult mean(const PerQueryScores& scores, const std::set<QueryId>* slice) {
  MeanResult result;
  double sum = 0.0;
  if (slice) {
    for (const QueryId& q : *slice) {
      if (auto it = scores.scores.find(q); it != scores.scores.end()) {
        sum += it->second;
        ++result.evaluated;
      } else if (scores.skipped.contains(q)) {
        ++result.skipped;
      }
    }
  } else {
    for (const auto& [_, v] : scores.scores) sum += v;
    result.evaluated = scores.scores.size();
    result.skipped = scores.skipped.size();
  }
  if (result.evaluated == 0) throw EmptySetError("empty evaluation set");
  result.mean = sum / static_cast<double>(result.evaluated);
  return result;
}

void write_per_query_tsv(std::ostream& out, const PerQueryScores& scores) {
  char buf[64];
  for (const auto& [query, value] : scores.scores) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out << query << '\t' << std::string_view(buf, end - buf) << '\n';
  }
}

}  // namespace irdecide::metrics
