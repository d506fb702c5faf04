#pragma once

// Hand-rolled generators for property tests, all driven by the fixture Rng
// so every failure reproduces from its seed.

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "irdecide/corpus_io.hpp"
#include "irdecide/metrics.hpp"
#include "oracles.hpp"

namespace gen {

using irdecide::fixtures::Rng;

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

// Random run + qrels as file text, plus the same data in oracle form.
struct MetricInstance {
  std::string run_text;
  std::string qrels_text;
  irdecide::io::GradeScale scale = irdecide::io::GradeScale::kGraded;
  std::map<std::string, oracle::Query> queries;
};

// Up to 8 judged documents per query keep the permutation oracle cheap;
// rankings go up to 150 deep so recall@100 cuts.
inline MetricInstance metric_instance(Rng& rng) {
  MetricInstance inst;
  const bool binary = rng.below(3) == 0;
  inst.scale = binary ? irdecide::io::GradeScale::kBinary
                      : irdecide::io::GradeScale::kGraded;
  const int top_grade = binary ? 1 : 3;
  std::vector<std::string> run_lines, qrels_lines;
  const std::size_t nq = 1 + rng.below(5);
  for (std::size_t qi = 0; qi < nq; ++qi) {
    const std::string qid = "q" + std::to_string(qi);
    oracle::Query& q = inst.queries[qid];
    const std::size_t pool = 1 + rng.below(150);
    const int mode = static_cast<int>(rng.below(10));
    const bool judged = mode != 0;    // 10%: run-only query
    const bool answered = mode != 1;  // 10%: qrels-only query
    if (judged) {
      std::size_t nj = 1 + rng.below(8);
      for (std::size_t j = 0; j < nj; ++j) {
        std::string doc = "d" + std::to_string(rng.below(pool + 5));
        if (q.grades.count(doc)) continue;
        int g = static_cast<int>(rng.below(top_grade + 1));
        q.grades[doc] = g;
        qrels_lines.push_back(qid + " 0 " + doc + " " + std::to_string(g));
      }
    }
    if (answered) {
      std::vector<std::pair<std::string, double>> scored;
      for (std::size_t d = 0; d < pool; ++d) {
        if (rng.below(4) == 0) continue;
        double score = static_cast<double>(rng.below(40)) / 4.0 - 3.0;
        scored.emplace_back("d" + std::to_string(d), score);
        std::ostringstream line;
        line.precision(17);
        line << qid << " Q0 d" << d << " " << rng.below(1000) << " " << score
             << " gen";
        run_lines.push_back(line.str());
      }
      q.ranking = oracle::rank_order(scored);
    }
    if (!judged && !answered) inst.queries.erase(qid);
  }
  // The parser infers the scale from the top grade; pin it.
  qrels_lines.push_back("qtop 0 dtop " + std::to_string(top_grade));
  inst.queries["qtop"].grades["dtop"] = top_grade;
  shuffle(run_lines, rng);
  shuffle(qrels_lines, rng);
  for (const auto& l : run_lines) inst.run_text += l + "\n";
  for (const auto& l : qrels_lines) inst.qrels_text += l + "\n";
  return inst;
}

inline long double oracle_metric(const oracle::Query& q,
                                 const irdecide::metrics::MetricSpec& spec,
                                 irdecide::io::GradeScale scale) {
  using irdecide::metrics::MetricKind;
  const int threshold = spec.threshold.value_or(
      scale == irdecide::io::GradeScale::kGraded ? 2 : 1);
  switch (spec.kind) {
    case MetricKind::kNdcg: return oracle::ndcg(q, spec.cutoff);
    case MetricKind::kRr: return oracle::rr(q, spec.cutoff, threshold);
    case MetricKind::kRecall: return oracle::recall(q, spec.cutoff, threshold);
    case MetricKind::kPrecision:
      return oracle::precision(q, spec.cutoff, threshold);
  }
  return -1;
}

// Largest |library - oracle| over the instance; +inf when the scored or
// skipped query sets disagree.
inline double metric_discrepancy(const MetricInstance& inst,
                                 const irdecide::metrics::MetricSpec& spec) {
  std::istringstream run_in(inst.run_text), qrels_in(inst.qrels_text);
  auto run = irdecide::io::parse_run(run_in);
  auto qrels = irdecide::io::parse_qrels(qrels_in);
  auto scores = irdecide::metrics::evaluate(run, qrels, spec);
  double worst = 0;
  for (const auto& [qid, q] : inst.queries) {
    long double expected = oracle_metric(q, spec, inst.scale);
    if (expected < 0) {
      if (!scores.skipped.count(qid) || scores.scores.count(qid)) {
        return std::numeric_limits<double>::infinity();
      }
      continue;
    }
    auto it = scores.scores.find(qid);
    if (it == scores.scores.end()) {
      return std::numeric_limits<double>::infinity();
    }
    worst = std::max(worst,
                     static_cast<double>(std::fabs(it->second - expected)));
  }
  if (scores.scores.size() + scores.skipped.size() != inst.queries.size()) {
    return std::numeric_limits<double>::infinity();
  }
  return worst;
}

// Paired samples with a random shift, noise, and ties.
inline std::pair<std::vector<double>, std::vector<double>> paired_sample(
    Rng& rng, std::size_t n) {
  std::vector<double> a(n), b(n);
  const double shift = (rng.uniform() - 0.5) * 0.4;
  const double noise = 0.05 + rng.uniform() * 0.5;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.uniform();
    b[i] = rng.below(8) == 0 ? a[i] : a[i] + shift + (rng.uniform() - 0.5) * noise;
  }
  return {a, b};
}

// Cost table over 1-5 factors spanning ten orders of magnitude; row 0 is the
// anchor.
struct CostTable {
  std::vector<irdecide::io::FactorMap> systems;
  std::vector<std::string> names;
};

inline CostTable cost_table(Rng& rng) {
  CostTable t;
  const std::size_t nf = 1 + rng.below(5);
  for (std::size_t f = 0; f < nf; ++f) t.names.push_back("f" + std::to_string(f));
  const std::size_t ns = 2 + rng.below(6);
  for (std::size_t s = 0; s < ns; ++s) {
    irdecide::io::FactorMap m;
    for (const auto& f : t.names) {
      m[f] = {std::exp((rng.uniform() - 0.5) * 10), "u"};
    }
    t.systems.push_back(m);
  }
  return t;
}

// Non-negative weights, at least one positive.
inline std::map<std::string, double> cost_weights(
    Rng& rng, const std::vector<std::string>& names) {
  std::map<std::string, double> w;
  for (const auto& f : names) w[f] = rng.below(4) == 0 ? 0.0 : rng.uniform() * 10;
  w[names[rng.below(names.size())]] += 0.5;
  return w;
}

}  // namespace gen
