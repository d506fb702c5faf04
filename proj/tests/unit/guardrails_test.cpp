#include <gtest/gtest.h>

#include "generators.hpp"
#include "irdecide/error.hpp"
#include "irdecide/guardrails.hpp"
#include "oracles.hpp"

namespace {

using namespace irdecide;
using namespace irdecide::guardrails;
using metrics::ScoreMap;
using stats::Outcome;

ScoreMap numbered(const std::vector<double>& v) {
  ScoreMap m;
  for (std::size_t i = 0; i < v.size(); ++i) m["q" + std::to_string(i + 1)] = v[i];
  return m;
}

slicing::QuerySlice slice_of(std::set<QueryId> ids) {
  slicing::QuerySlice s;
  s.name = "test";
  s.query_ids = std::move(ids);
  s.selector.rule = "file";
  return s;
}

TEST(MarginRegressions, CountsMaximalRegressions) {
  auto r = margin_regressions(numbered({1, 1, 0, 1}), numbered({0, 1, 0, 1}), 1.0);
  EXPECT_EQ(r.regressed_fraction, 0.25);
  EXPECT_EQ(r.regressed_query_ids, (std::set<QueryId>{"q1"}));
  EXPECT_EQ(r.evaluated, 4u);
}

TEST(MarginRegressions, WithReciprocalRankOnlyOneToZeroCounts) {
  auto a = numbered({1.0, 1.0, 0.5, 1.0, 0.0});
  auto b = numbered({0.0, 0.1, 0.0, 1.0, 0.0});
  auto r = margin_regressions(a, b, 1.0);
  EXPECT_EQ(r.regressed_query_ids, (std::set<QueryId>{"q1"}));
}

TEST(MarginRegressions, DenominatorIsTheCommonlyScoredSet) {
  ScoreMap a{{"x", 1}, {"y", 1}, {"only_a", 1}};
  ScoreMap b{{"x", 0}, {"y", 1}, {"only_b", 0}};
  auto r = margin_regressions(a, b, 1.0);
  EXPECT_EQ(r.evaluated, 2u);
  EXPECT_EQ(r.regressed_fraction, 0.5);
  EXPECT_THROW(margin_regressions({{"x", 1}}, {{"y", 1}}, 1.0), EmptySetError);
}

// The margin fixture: n queries, `planted` of them regressed by exactly 1.
std::pair<ScoreMap, ScoreMap> planted_pair(std::size_t n, std::size_t planted,
                                           gen::Rng& rng) {
  ScoreMap a, b;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string q = "q" + std::to_string(i);
    if (i < planted) {
      a[q] = 1.0;
      b[q] = 0.0;
    } else {
      a[q] = 1.0 / static_cast<double>(1 + rng.below(10));
      b[q] = 1.0 / static_cast<double>(1 + rng.below(10));
      if (a[q] == 1.0) b[q] = std::max(b[q], 0.1);
    }
  }
  return {a, b};
}

TEST(CheckMargin, ThresholdSeparatesPlantedFractions) {
  gen::Rng rng(61);
  auto [a97, b97] = planted_pair(10000, 97, rng);
  auto r97 = margin_regressions(a97, b97, 1.0);
  EXPECT_EQ(r97.regressed_fraction, 0.0097);
  EXPECT_EQ(check_margin(r97, 0.01).outcome, Outcome::kTie);
  EXPECT_EQ(*r97.threshold, 0.01);

  auto [a187, b187] = planted_pair(10000, 187, rng);
  auto r187 = margin_regressions(a187, b187, 1.0);
  EXPECT_EQ(r187.regressed_fraction, 0.0187);
  EXPECT_EQ(check_margin(r187, 0.01).outcome, Outcome::kLoss);
  EXPECT_EQ(r187.outcome.outcome, Outcome::kLoss);
}

TEST(CheckMargin, NeverAwardsAWin) {
  auto r = margin_regressions(numbered({0, 0}), numbered({1, 1}), 1.0);
  EXPECT_EQ(r.regressed_fraction, 0.0);
  for (double t : {0.0, 0.5, 1.0}) {
    EXPECT_EQ(check_margin(r, t).outcome, Outcome::kTie);
  }
}

TEST(MarginProperties, FractionShrinksWithDeltaAndPassingPersistsAboveT) {
  gen::Rng rng(62);
  for (int trial = 0; trial < 200; ++trial) {
    ScoreMap a, b;
    const std::size_t n = 1 + rng.below(200);
    for (std::size_t i = 0; i < n; ++i) {
      a["q" + std::to_string(i)] = rng.uniform();
      b["q" + std::to_string(i)] = rng.uniform();
    }
    const double d1 = 0.01 + rng.uniform() * 0.98;
    const double d2 = d1 + rng.uniform() * (1.0 - d1);
    auto r1 = margin_regressions(a, b, d1);
    auto r2 = margin_regressions(a, b, d2);
    ASSERT_LE(r2.regressed_fraction, r1.regressed_fraction);
    ASSERT_EQ(r1.regressed_fraction,
              static_cast<double>(r1.regressed_query_ids.size()) / r1.evaluated);

    const double t1 = rng.uniform();
    const double t2 = t1 + rng.uniform() * (1.0 - t1);
    if (check_margin(r1, t1).outcome == Outcome::kTie) {
      ASSERT_EQ(check_margin(r1, t2).outcome, Outcome::kTie);
    }
  }
}

TEST(RunGuardrail, SmallSliceIsFlaggedNotFailed) {
  std::vector<double> a(10, 1.0), b(10, 0.0);
  auto sa = numbered(a), sb = numbered(b);
  std::set<QueryId> ids;
  for (const auto& [q, _] : sa) ids.insert(q);
  auto r = run_guardrail("C-Length", slice_of(ids), {}, sa, sb);
  EXPECT_EQ(r.outcome.outcome, Outcome::kTie);
  EXPECT_TRUE(r.outcome.insufficient_data);
  EXPECT_EQ(r.slice_size, 10u);
}

TEST(RunGuardrail, CountsSliceQueriesWithoutScores) {
  ScoreMap a{{"q1", 0.5}, {"q2", 0.5}};
  ScoreMap b{{"q1", 0.5}, {"q2", 0.4}};
  auto r = run_guardrail("C", slice_of({"q1", "q2", "q9"}), {}, a, b);
  EXPECT_EQ(r.slice_size, 2u);
  EXPECT_EQ(r.skipped_count, 1u);
  EXPECT_THROW(run_guardrail("C", slice_of({"q9"}), {}, a, b), EmptySetError);
}

TEST(RunGuardrail, PlantedRareTermFailureIsCaught) {
  // Candidate scores 0 on every query whose rarest token has TF < 5 and
  // matches the incumbent elsewhere.
  gen::Rng rng(63);
  io::Collection::Docs docs;
  for (int d = 0; d < 500; ++d) {
    std::vector<std::string> words;
    for (int k = 0; k < 8; ++k) {
      words.push_back("w" + std::to_string(rng.below(40) * rng.below(40)));
    }
    docs["d" + std::to_string(d)] = words;
  }
  io::Collection collection(docs);
  std::map<QueryId, io::Query> qs;
  for (int q = 0; q < 400; ++q) {
    std::vector<std::string> toks;
    for (int k = 0; k < 3; ++k) {
      toks.push_back("w" + std::to_string(rng.below(40) * rng.below(40)));
    }
    qs["q" + std::to_string(q)] = io::Query{"", toks};
  }
  io::QuerySet queries(qs);
  auto rare = slicing::slice_by_min_frequency(queries, collection, {0, 5});
  auto frequent =
      slicing::slice_by_min_frequency(queries, collection, {4, slicing::kUnbounded});
  ASSERT_GE(rare.size(), 20u);

  ScoreMap a, b;
  for (const auto& [id, _] : qs) {
    a[id] = 0.3 + 0.7 * rng.uniform();
    b[id] = rare.query_ids.count(id) ? 0.0 : a[id] + 0.2 * (rng.uniform() - 0.5);
  }
  auto r = run_guardrail("C-Frequency", rare, {}, a, b);
  EXPECT_EQ(r.outcome.outcome, Outcome::kLoss);
  std::vector<double> va, vb;
  for (const auto& q : rare.query_ids) {
    va.push_back(a[q]);
    vb.push_back(b[q]);
  }
  EXPECT_NEAR(r.comparison->p_value,
              static_cast<double>(oracle::paired_t(va, vb).p), 1e-6);
  EXPECT_NE(run_guardrail("C-Frequency", frequent, {}, a, b).outcome.outcome,
            Outcome::kLoss);
}

TEST(RunGuardrail, FullSetGuardrailAgreesWithThePrimaryComparison) {
  gen::Rng rng(64);
  for (int trial = 0; trial < 200; ++trial) {
    auto [va, vb] = gen::paired_sample(rng, 20 + rng.below(100));
    auto a = numbered(va), b = numbered(vb);
    std::set<QueryId> all;
    for (const auto& [q, _] : a) all.insert(q);
    GuardrailSettings settings;
    settings.alpha = 0.05;
    auto g = run_guardrail("C-all", slice_of(all), settings, a, b);
    auto primary = stats::classify(stats::compare(a, b), 0.05, 0.0);
    ASSERT_EQ(g.outcome.outcome == Outcome::kLoss,
              primary.outcome == Outcome::kLoss);
  }
}

TEST(GuardrailSerialization, ReportsRoundTrip) {
  gen::Rng rng(65);
  auto [va, vb] = gen::paired_sample(rng, 40);
  auto a = numbered(va), b = numbered(vb);
  std::set<QueryId> ids;
  for (const auto& [q, _] : a) ids.insert(q);
  auto g = run_guardrail("C", slice_of(ids), {}, a, b);
  EXPECT_EQ(guardrail_report_from_json(to_json(g)), g);

  auto m = margin_regressions(a, b, 0.3);
  check_margin(m, 0.1);
  EXPECT_EQ(margin_report_from_json(to_json(m)), m);

  stats::OutcomeLabel label{Outcome::kLoss, "evidence", false};
  EXPECT_EQ(outcome_from_json(to_json(label)), label);
}

}  // namespace
