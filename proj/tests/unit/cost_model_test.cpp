#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "irdecide/cost_model.hpp"
#include "irdecide/error.hpp"

namespace {

using namespace irdecide;
using namespace irdecide::cost;
using stats::Outcome;

io::FactorMap factors(double l, double i, double s) {
  return {{"latency", {l, "ms"}}, {"indexing", {i, "min"}}, {"storage", {s, "GB"}}};
}

CostWeights lis(double l, double i, double s) {
  return CostWeights({{"latency", l}, {"indexing", i}, {"storage", s}});
}

TEST(ComparativeTransform, IsAScaledRatio) {
  EXPECT_EQ(comparative_transform(7.5, 7.5, 4.0), 4.0);
  EXPECT_EQ(comparative_transform(30, 10, 1), 3.0);
  EXPECT_EQ(comparative_transform(2.3, 2.3, 10), 10.0);
  EXPECT_THROW(comparative_transform(1, 0, 1), InputError);
  EXPECT_THROW(comparative_transform(1, -1, 1), InputError);
}

TEST(AggregateCost, AnchorAgainstItselfIsTheWeightSum) {
  auto anchor = factors(55, 11, 2.3);
  EXPECT_EQ(aggregate_cost("bm25", anchor, "bm25", anchor, lis(10, 1, 1)).value,
            12.0);
}

TEST(AggregateCost, SumsWeightedRatios) {
  auto anchor = factors(5, 11, 2.3);
  auto sys = factors(10, 110, 11.5);
  auto ac = aggregate_cost("m", sys, "bm25", anchor, lis(10, 1, 1));
  EXPECT_NEAR(ac.value, 35.0, 1e-12);
  EXPECT_NEAR(ac.contributions.at("latency"), 20.0, 1e-12);
  EXPECT_NEAR(ac.contributions.at("indexing"), 10.0, 1e-12);
  EXPECT_NEAR(ac.contributions.at("storage"), 5.0, 1e-12);
  EXPECT_NEAR(aggregate_cost("m", sys, "bm25", anchor, lis(1, 1, 1)).value, 17.0,
              1e-12);
}

TEST(AggregateCost, MissingWeightedFactorIsNamed) {
  io::FactorMap partial = {{"latency", {1, ""}}};
  try {
    aggregate_cost("m", partial, "a", factors(1, 1, 1), lis(1, 1, 1));
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("indexing"), std::string::npos);
  }
  // Zero weight: the factor may be absent.
  CostWeights only_latency({{"latency", 1}, {"indexing", 0}});
  EXPECT_EQ(aggregate_cost("m", partial, "a", factors(1, 1, 1), only_latency).value,
            1.0);
}

TEST(AggregateCost, WorksFromACostTable) {
  io::CostTable t({{"a", factors(1, 2, 4)}, {"b", factors(2, 2, 2)}});
  EXPECT_EQ(aggregate_cost(t, "b", "a", lis(1, 1, 1)).value, 3.5);
  EXPECT_THROW(aggregate_cost(t, "zzz", "a", lis(1, 1, 1)), InputError);
}

double ac(const gen::CostTable& t, std::size_t s, const std::map<std::string, double>& w) {
  return aggregate_cost("s", t.systems[s], "a", t.systems[0], CostWeights(w)).value;
}

TEST(AggregateCostProperties, LinearInTheWeights) {
  gen::Rng rng(71);
  for (int trial = 0; trial < 500; ++trial) {
    auto t = gen::cost_table(rng);
    auto w1 = gen::cost_weights(rng, t.names);
    auto w2 = gen::cost_weights(rng, t.names);
    const double c = rng.uniform() * 5 + 0.01;
    std::map<std::string, double> sum, scaled;
    for (const auto& f : t.names) {
      sum[f] = w1[f] + w2[f];
      scaled[f] = c * w1[f];
    }
    for (std::size_t s = 0; s < t.systems.size(); ++s) {
      const double a1 = ac(t, s, w1), a2 = ac(t, s, w2);
      ASSERT_NEAR(ac(t, s, sum), a1 + a2, 1e-9 * (a1 + a2));
      ASSERT_NEAR(ac(t, s, scaled), c * a1, 1e-9 * c * a1);
    }
    // Anchor normalization.
    double total = 0;
    for (const auto& [_, v] : w1) total += v;
    ASSERT_NEAR(ac(t, 0, w1), total, 1e-12 * total);
  }
}

TEST(AggregateCostProperties, InvariantToUnitChanges) {
  gen::Rng rng(72);
  for (int trial = 0; trial < 500; ++trial) {
    auto t = gen::cost_table(rng);
    auto w = gen::cost_weights(rng, t.names);
    gen::CostTable rescaled = t;
    for (const auto& f : t.names) {
      const double unit = std::exp((rng.uniform() - 0.5) * 8);
      for (auto& sys : rescaled.systems) sys[f].value *= unit;
    }
    for (std::size_t s = 0; s < t.systems.size(); ++s) {
      const double before = ac(t, s, w), after = ac(rescaled, s, w);
      ASSERT_NEAR(after, before, 1e-12 * before);
    }
  }
}

TEST(AggregateCostProperties, IncreasingAWeightedFactorIncreasesCost) {
  gen::Rng rng(73);
  for (int trial = 0; trial < 300; ++trial) {
    auto t = gen::cost_table(rng);
    auto w = gen::cost_weights(rng, t.names);
    const std::size_t s = 1 + rng.below(t.systems.size() - 1);
    for (const auto& f : t.names) {
      if (w[f] == 0) continue;
      gen::CostTable bumped = t;
      bumped.systems[s][f].value *= 1.5;
      ASSERT_GT(ac(bumped, s, w), ac(t, s, w));
    }
  }
}

TEST(CostWeights, RejectInvalidWeights) {
  EXPECT_THROW(CostWeights({{"a", -1}}), ConfigError);
  EXPECT_THROW(CostWeights({{"a", 0}, {"b", 0}}), ConfigError);
  EXPECT_THROW(CostWeights({{"a", std::nan("")}}), ConfigError);
  EXPECT_THROW(CostWeights({{"a", INFINITY}}), ConfigError);
  EXPECT_THROW(CostWeights(std::map<std::string, double>{}), ConfigError);
  EXPECT_EQ(lis(10, 1, 1).total(), 12.0);
  EXPECT_EQ(lis(10, 1, 1).weight("absent"), 0.0);
}

TEST(EfficiencyCap, NeedsExactlyOneValidOption) {
  EXPECT_THROW(EfficiencyCap::from_options(std::nullopt, std::nullopt, std::nullopt),
               ConfigError);
  EXPECT_THROW(EfficiencyCap::from_options(2.0, 1.0, std::nullopt), ConfigError);
  EXPECT_THROW(EfficiencyCap::from_options(0.5, std::nullopt, std::nullopt),
               ConfigError);
  EXPECT_THROW(EfficiencyCap::from_options(std::nullopt, -1.0, std::nullopt),
               ConfigError);
  EXPECT_THROW(EfficiencyCap::from_options(std::nullopt, std::nullopt, 0.0),
               ConfigError);
  auto cap = EfficiencyCap::from_options(std::nullopt, 2.5, std::nullopt);
  EXPECT_EQ(cap.mode, CapMode::kMargin);
  EXPECT_EQ(cap.limit, 2.5);
}

TEST(CheckEfficiency, FactorMode) {
  auto no_increase = EfficiencyCap::from_options(1.0, std::nullopt, std::nullopt);
  EXPECT_EQ(check_efficiency(12.5, 12.0, no_increase).outcome, Outcome::kLoss);
  EXPECT_EQ(check_efficiency(12.0, 12.0, no_increase).outcome, Outcome::kTie);
  EXPECT_EQ(check_efficiency(11.0, 12.0, no_increase).outcome, Outcome::kWin);
  auto triple = EfficiencyCap::from_options(3.0, std::nullopt, std::nullopt);
  EXPECT_EQ(check_efficiency(30, 12, triple).outcome, Outcome::kTie);
  EXPECT_EQ(check_efficiency(37, 12, triple).outcome, Outcome::kLoss);
  EXPECT_EQ(check_efficiency(3.9, 12, triple).outcome, Outcome::kWin);
  EXPECT_EQ(check_efficiency(4.0, 12, triple).outcome, Outcome::kTie);
}

TEST(CheckEfficiency, MarginMode) {
  auto cap = EfficiencyCap::from_options(std::nullopt, 5.0, std::nullopt);
  EXPECT_EQ(check_efficiency(16, 10, cap).outcome, Outcome::kLoss);
  EXPECT_EQ(check_efficiency(15, 10, cap).outcome, Outcome::kTie);
  EXPECT_EQ(check_efficiency(4, 10, cap).outcome, Outcome::kWin);
  EXPECT_EQ(check_efficiency(10, 10, cap).outcome, Outcome::kTie);
}

TEST(CheckEfficiency, AbsoluteCeiling) {
  auto cap = EfficiencyCap::from_options(std::nullopt, std::nullopt, 20.0);
  EXPECT_NE(check_efficiency(18, 10, cap).outcome, Outcome::kLoss);
  EXPECT_EQ(check_efficiency(21, 10, cap).outcome, Outcome::kLoss);
  EXPECT_EQ(check_efficiency(8, 10, cap).outcome, Outcome::kWin);
}

TEST(CheckEfficiency, EqualCostsTieUnderAnyCap) {
  gen::Rng rng(74);
  for (int trial = 0; trial < 200; ++trial) {
    const double cost = 0.1 + rng.uniform() * 100;
    auto factor = EfficiencyCap::from_options(1.0 + rng.uniform() * 5,
                                              std::nullopt, std::nullopt);
    auto margin = EfficiencyCap::from_options(std::nullopt, rng.uniform() * 5,
                                              std::nullopt);
    ASSERT_EQ(check_efficiency(cost, cost, factor).outcome, Outcome::kTie);
    ASSERT_EQ(check_efficiency(cost, cost, margin).outcome, Outcome::kTie);
  }
}

TEST(Presets, ShipTheStandardWeightings) {
  auto presets = standard_presets();
  ASSERT_EQ(presets.size(), 4u);
  EXPECT_EQ(find_preset("latency-emphasis").weights, lis(10, 1, 1));
  EXPECT_EQ(find_preset("indexing-emphasis").weights, lis(10, 5, 1));
  EXPECT_EQ(find_preset("uniform").weights, lis(1, 1, 1));
  EXPECT_EQ(find_preset("static-collection").weights.weight("indexing"), 0.0);
  EXPECT_THROW(find_preset("nope"), ConfigError);

  PresetFactors renamed{"latency_ms", "indexing_min", "storage_gb"};
  EXPECT_EQ(find_preset("latency-emphasis", renamed).weights.weight("latency_ms"),
            10.0);
}

TEST(CostSerialization, RoundTrips) {
  auto w = lis(10, 1, 1);
  EXPECT_EQ(weights_from_json(to_json(w)), w);
  auto a = aggregate_cost("m", factors(2, 3, 4), "b", factors(1, 1, 1), w);
  EXPECT_EQ(aggregated_cost_from_json(to_json(a)), a);
  io::CostTable t({{"a", factors(1, 2.5, 1e-3)}});
  EXPECT_EQ(cost_table_from_json(to_json(t)), t);
}

}  // namespace
