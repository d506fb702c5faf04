#include <gtest/gtest.h>

#include "irdecide/bundle.hpp"
#include "irdecide/cost_model.hpp"
#include "irdecide/error.hpp"
#include "irdecide/pipeline.hpp"
#include "testing.hpp"

namespace {

using namespace irdecide;
using namespace testing_support;
using nlohmann::json;
using stats::Outcome;

const fs::path kFixtures = IRDECIDE_FIXTURES_DIR;

decision::DecisionBundle run_fixture(const fs::path& config_path) {
  auto config = io::load_config(config_path);
  return run_decision(config, load_workspace(config));
}

const decision::CriterionRecord& record(const decision::DecisionBundle& b,
                                        const std::string& candidate,
                                        const std::string& id) {
  for (const auto& r : b.criteria.at(candidate)) {
    if (r.criterion_id == id) return r;
  }
  throw std::runtime_error("no record " + id);
}

TEST(Pipeline, TradeoffWillingScenarioDeploys) {
  auto b = run_fixture(kFixtures / "scenario" / "scenario1.json");
  ASSERT_EQ(b.outcome.verdicts.size(), 1u);
  const auto& v = b.outcome.verdicts[0];
  EXPECT_TRUE(v.deploy);
  EXPECT_EQ(v.candidate, "dense");
  EXPECT_EQ(record(b, "dense", "C-Effective").outcome.outcome, Outcome::kWin);
  for (const auto& r : b.criteria.at("dense")) {
    if (r.kind == decision::CriterionKind::kSecondary) {
      EXPECT_EQ(r.outcome.outcome, Outcome::kTie) << r.criterion_id;
    }
  }
  EXPECT_EQ(b.outcome.chosen, "dense");
  EXPECT_EQ(b.aggregated_costs.at("bm25").value, 12.0);
  EXPECT_EQ(b.notes.count("C-Environment"), 1u);
}

TEST(Pipeline, NoCostIncreaseScenarioRejectsOnEfficiency) {
  auto b = run_fixture(kFixtures / "scenario" / "scenario2.json");
  const auto& v = b.outcome.verdicts.at(0);
  EXPECT_FALSE(v.deploy);
  EXPECT_EQ(record(b, "dense", "C-Efficient").outcome.outcome, Outcome::kLoss);
  bool names_efficiency = false;
  for (const auto& r : v.reasons) {
    names_efficiency = names_efficiency || r.find("C-Efficient") != std::string::npos;
  }
  EXPECT_TRUE(names_efficiency);
  EXPECT_EQ(b.outcome.eligible, (std::vector<SystemId>{"bm25"}));
}

TEST(Pipeline, PlantedLongQueryFailureIsCaught) {
  auto b = run_fixture(kFixtures / "planted" / "planted.json");
  EXPECT_EQ(record(b, "dense", "C-Effective").outcome.outcome, Outcome::kWin);
  EXPECT_EQ(record(b, "dense", "C-Length-long").outcome.outcome, Outcome::kLoss);
  EXPECT_FALSE(b.outcome.verdicts.at(0).deploy);
  // Every long query scores 0 for the candidate.
  const auto& scores = b.per_query_scores.at("ndcg@10").at("dense").scores;
  const auto& slice = record(b, "dense", "C-Length-long").evidence;
  ASSERT_TRUE(slice.contains("slice"));
  for (const auto& q : slice["slice"]["query_ids"]) {
    EXPECT_EQ(scores.at(q.get<std::string>()), 0.0);
  }
}

TEST(Bundle, RoundTripsAndRecomputesFromRawCosts) {
  auto b = run_fixture(kFixtures / "scenario" / "scenario1.json");
  EXPECT_EQ(decision::parse_bundle(decision::emit_bundle(b)), b);
  ASSERT_TRUE(b.costs);
  for (const auto& [system, ac] : b.aggregated_costs) {
    auto again = cost::aggregate_cost(*b.costs, system, b.anchor, b.weights);
    EXPECT_EQ(again.value, ac.value) << system;
  }
  EXPECT_EQ(b.presets.size(), cost::standard_presets().size());
}

TEST(Bundle, RejectsOtherSchemaVersions) {
  auto j = json::parse(decision::emit_bundle(
      run_fixture(kFixtures / "scenario" / "scenario1.json")));
  j["schema_version"] = 99;
  EXPECT_THROW(decision::bundle_from_json(j), InputError);
  j.erase("schema_version");
  EXPECT_THROW(decision::bundle_from_json(j), InputError);
  EXPECT_THROW(decision::parse_bundle("{broken"), ParseError);
}

TEST(Bundle, ReportShowsTheCriterionTableAndFrontier) {
  auto b = run_fixture(kFixtures / "planted" / "planted.json");
  auto report = decision::render_report(b);
  EXPECT_NE(report.find("REJECT"), std::string::npos);
  EXPECT_NE(report.find("C-Length-long"), std::string::npos);
  EXPECT_NE(report.find("✗"), std::string::npos);
  EXPECT_NE(report.find("✓"), std::string::npos);
  EXPECT_NE(report.find("Pareto"), std::string::npos);
}

TEST(Workspace, CriteriaNeedTheirInputs) {
  auto raw = io::read_config_json(kFixtures / "scenario" / "scenario1.json");
  raw["inputs"].erase("train_queries");
  auto config = io::config_from_json(raw, kFixtures / "scenario");
  EXPECT_THROW(load_workspace(config), ConfigError);
}

TEST(Workspace, MissingCostFactorIsAnInputError) {
  ScratchDir dir("costs");
  for (const auto& e : fs::directory_iterator(kFixtures / "scenario")) {
    fs::copy(e.path(), dir.path() / e.path().filename());
  }
  write_file(dir / "costs.json", R"({"schema_version": 1, "systems": {
      "bm25": {"latency_ms": 55, "indexing_min": 11, "storage_gb": 2.3},
      "dense": {"latency_ms": 22, "indexing_min": 100}}})");
  auto config = io::load_config(dir / "scenario1.json");
  EXPECT_THROW(load_workspace(config), InputError);
}

TEST(Fixtures, ShippedFilesMatchTheGenerator) {
  ScratchDir dir("fixtures");
  fixtures::write_all(dir.path());
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir.path())) {
    if (!e.is_regular_file()) continue;
    auto rel = fs::relative(e.path(), dir.path());
    ASSERT_TRUE(fs::exists(kFixtures / rel)) << rel;
    ASSERT_EQ(read_file(e.path()), read_file(kFixtures / rel)) << rel;
    ++compared;
  }
  std::size_t shipped = 0;
  for (const auto& e : fs::recursive_directory_iterator(kFixtures)) {
    shipped += e.is_regular_file();
  }
  EXPECT_EQ(compared, shipped);
}

}  // namespace
