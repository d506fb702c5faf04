#include <gtest/gtest.h>

#include <sstream>

#include "irdecide/config.hpp"
#include "irdecide/error.hpp"
#include "testing.hpp"

namespace {

using namespace irdecide;
using namespace irdecide::io;
using nlohmann::json;
namespace fs = std::filesystem;

const fs::path kFixtures = IRDECIDE_FIXTURES_DIR;

json minimal() {
  return json::parse(R"({
    "schema_version": 1,
    "incumbent": "bm25",
    "systems": {"bm25": {"run": "a.run"}, "dense": "b.run"},
    "inputs": {"qrels": "q.txt"},
    "criteria": [{"id": "C-Effective", "kind": "primary",
                  "type": "effectiveness"}]
  })");
}

std::string config_error(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, MinimalDocumentGetsDefaults) {
  auto c = config_from_json(minimal(), "/base");
  EXPECT_EQ(c.incumbent, "bm25");
  EXPECT_EQ(c.candidates, (std::vector<SystemId>{"dense"}));
  EXPECT_EQ(c.system("dense").run, "b.run");
  EXPECT_EQ(c.resolve(c.system("dense").run), "/base/b.run");
  EXPECT_EQ(c.resolve("/abs/x"), "/abs/x");
  EXPECT_EQ(c.alpha, 0.05);
  EXPECT_EQ(c.min_slice_size, 20u);
  EXPECT_EQ(c.effectiveness_metric().name(), "ndcg@10");
  EXPECT_FALSE(c.grade_scale);
  EXPECT_EQ(c.decision.cap_target, CapTarget::kNone);
  EXPECT_THROW(c.system("ghost"), ConfigError);
}

TEST(Config, ParsesPaperStyleWeights) {
  json j = minimal();
  j["cost"] = {{"weights", {{"latency", 10}, {"indexing", 1}, {"storage", 1}}}};
  auto c = config_from_json(j);
  EXPECT_EQ(c.cost.weights.weights(),
            (std::map<std::string, double>{
                {"latency", 10}, {"indexing", 1}, {"storage", 1}}));
}

TEST(Config, ResolvesPresetsThroughFactorNames) {
  json j = minimal();
  j["cost"] = {{"preset", "uniform"},
               {"preset_factors", {{"latency", "lat"}, {"indexing", "idx"},
                                   {"storage", "disk"}}}};
  auto c = config_from_json(j);
  EXPECT_EQ(c.cost.preset, "uniform");
  EXPECT_EQ(c.cost.weights.weight("disk"), 1.0);
}

TEST(Config, ParsesEveryCriterionType) {
  json j = minimal();
  j["criteria"] = json::parse(R"([
    {"id": "e", "kind": "primary", "type": "effectiveness", "metric": "mrr@10",
     "margin": 0.01},
    {"id": "f", "kind": "secondary", "type": "efficiency", "factor": "storage",
     "margin_cap": 4},
    {"id": "l", "kind": "secondary", "type": "length", "min": 7, "max": "inf"},
    {"id": "q", "kind": "secondary", "type": "frequency", "max": 5,
     "statistic": "document_frequency"},
    {"id": "x", "kind": "secondary", "type": "lexical", "max_overlap": 1,
     "depth": 3, "source_system": "bm25"},
    {"id": "m", "kind": "secondary", "type": "memory"},
    {"id": "h", "kind": "secondary", "type": "file", "path": "hard.txt"},
    {"id": "r", "kind": "secondary", "type": "margin"}
  ])");
  auto c = config_from_json(j);
  ASSERT_EQ(c.criteria.size(), 8u);
  const auto& e = std::get<EffectivenessParams>(c.criteria[0].params);
  EXPECT_EQ(e.metric.name(), "rr@10");
  EXPECT_EQ(e.margin, 0.01);
  const auto& f = std::get<EfficiencyParams>(c.criteria[1].params);
  EXPECT_EQ(f.factor, "storage");
  EXPECT_EQ(f.cap.mode, cost::CapMode::kMargin);
  EXPECT_EQ(std::get<LengthParams>(c.criteria[2].params).bounds,
            (slicing::OpenInterval{7, slicing::kUnbounded}));
  const auto& q = std::get<FrequencyParams>(c.criteria[3].params);
  EXPECT_EQ(q.bounds, (slicing::OpenInterval{0, 5}));
  EXPECT_EQ(q.statistic, FrequencyStatistic::kDocumentFrequency);
  const auto& x = std::get<LexicalParams>(c.criteria[4].params);
  EXPECT_EQ(x.depth, 3u);
  EXPECT_EQ(x.source_system, "bm25");
  EXPECT_EQ(std::get<MemoryParams>(c.criteria[5].params).epsilon, 0.8);
  EXPECT_EQ(std::get<FileSliceParams>(c.criteria[6].params).path, "hard.txt");
  const auto& r = std::get<MarginParams>(c.criteria[7].params);
  EXPECT_EQ(r.delta, 1.0);
  EXPECT_EQ(r.threshold, 0.01);
  EXPECT_EQ(c.criteria[7].type_name(), "margin");
}

TEST(Config, RejectsInvalidDocuments) {
  auto with = [](auto edit) {
    json j = minimal();
    edit(j);
    return j;
  };
  std::vector<std::pair<std::string, json>> cases = {
      {"unknown top-level key", with([](json& j) { j["colour"] = 1; })},
      {"unknown criterion key",
       with([](json& j) { j["criteria"][0]["alpha"] = 0.1; })},
      {"schema version", with([](json& j) { j["schema_version"] = 2; })},
      {"unknown incumbent", with([](json& j) { j["incumbent"] = "x"; })},
      {"incumbent as candidate",
       with([](json& j) { j["candidates"] = {"bm25"}; })},
      {"no candidates", with([](json& j) { j["systems"].erase("dense"); })},
      {"alpha 0", with([](json& j) { j["significance"] = {{"alpha", 0}}; })},
      {"alpha 1", with([](json& j) { j["significance"] = {{"alpha", 1}}; })},
      {"min slice", with([](json& j) { j["min_slice_size"] = 1; })},
      {"duplicate criterion",
       with([](json& j) { j["criteria"].push_back(j["criteria"][0]); })},
      {"no primary",
       with([](json& j) { j["criteria"][0]["kind"] = "secondary"; })},
      {"bad kind", with([](json& j) { j["criteria"][0]["kind"] = "main"; })},
      {"bad type", with([](json& j) { j["criteria"][0]["type"] = "speed"; })},
      {"bad metric",
       with([](json& j) { j["criteria"][0]["metric"] = "ndcg@0"; })},
      {"weights and preset", with([](json& j) {
         j["cost"] = {{"preset", "uniform"}, {"weights", {{"a", 1}}}};
       })},
      {"unknown preset",
       with([](json& j) { j["cost"] = {{"preset", "fastest"}}; })},
      {"negative weight",
       with([](json& j) { j["cost"] = {{"weights", {{"a", -1}}}}; })},
      {"negative lambda",
       with([](json& j) { j["decision"] = {{"lambda", -1}}; })},
      {"bad cap", with([](json& j) { j["decision"] = {{"cost_cap", "max"}}; })},
      {"zero cap", with([](json& j) { j["decision"] = {{"cost_cap", 0}}; })},
      {"grade scale", with([](json& j) { j["grade_scale"] = "ternary"; })},
      {"subword without vocab",
       with([](json& j) { j["tokenizer"] = {{"mode", "subword"}}; })},
      {"missing qrels", with([](json& j) { j["inputs"].erase("qrels"); })},
      {"bad length bounds", with([](json& j) {
         j["criteria"].push_back(
             {{"id", "l"}, {"kind", "secondary"}, {"type", "length"},
              {"min", 5}, {"max", 5}});
       })},
      {"bad epsilon", with([](json& j) {
         j["criteria"].push_back({{"id", "m"}, {"kind", "secondary"},
                                  {"type", "memory"}, {"epsilon", 1.5}});
       })},
      {"two caps", with([](json& j) {
         j["criteria"].push_back({{"id", "f"}, {"kind", "secondary"},
                                  {"type", "efficiency"}, {"factor_cap", 2},
                                  {"margin_cap", 1}});
       })},
      {"notes not strings", with([](json& j) { j["notes"] = {{"a", 1}}; })},
  };
  for (const auto& [name, doc] : cases) {
    EXPECT_FALSE(config_error(doc).empty()) << name;
  }
}

TEST(Config, TomlAndJsonFixturesAreEquivalent) {
  auto from_json = load_config(kFixtures / "scenario" / "scenario1.json");
  auto from_toml = load_config(kFixtures / "scenario" / "scenario1.toml");
  EXPECT_EQ(from_json, from_toml);
}

TEST(Config, TomlSyntaxErrorsCarryALine) {
  std::istringstream in("schema_version = 1\nincumbent = \n");
  try {
    parse_config(in, ConfigFormat::kToml);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream bad_json("{\"schema_version\": ");
  EXPECT_THROW(parse_config(bad_json, ConfigFormat::kJson), ParseError);
}

TEST(Config, MissingFileIsAnInputError) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), InputError);
}

TEST(Scenario, FragmentReplacesWeightsAndDecisionLine) {
  json base = minimal();
  base["cost"] = {{"weights", {{"a", 1}}}, {"anchor", "bm25"}};
  base["decision"] = {{"lambda", 0.5}, {"cost_cap", "anchor"},
                      {"cap_factor", "a"}, {"choose", "dense"}};
  json fragment = {{"schema_version", 1},
                   {"cost", {{"preset", "uniform"}}},
                   {"decision", {{"lambda", 0.01}}}};
  json merged = apply_scenario(base, fragment);
  EXPECT_FALSE(merged["cost"].contains("weights"));
  EXPECT_EQ(merged["cost"]["preset"], "uniform");
  EXPECT_EQ(merged["cost"]["anchor"], "bm25");
  EXPECT_FALSE(merged["decision"].contains("cost_cap"));
  EXPECT_EQ(merged["decision"]["choose"], "dense");
  EXPECT_EQ(merged["decision"]["lambda"], 0.01);
  EXPECT_THROW(apply_scenario(base, {{"systems", {}}}), ConfigError);
}

TEST(Scenario, ExportedFragmentReproducesTheConfig) {
  for (const char* name : {"scenario1.json", "scenario2.json"}) {
    auto raw = read_config_json(kFixtures / "scenario" / name);
    auto config = config_from_json(raw);
    auto fragment = scenario_to_json(config);
    EXPECT_EQ(config_from_json(apply_scenario(raw, fragment)), config) << name;
    // Applying one scenario's fragment to the other switches it over.
    auto other = read_config_json(
        kFixtures / "scenario" /
        (std::string(name) == "scenario1.json" ? "scenario2.json"
                                                : "scenario1.json"));
    auto switched = config_from_json(apply_scenario(other, fragment));
    EXPECT_EQ(switched.cost.weights, config.cost.weights);
    EXPECT_EQ(switched.decision, config.decision);
  }
}

TEST(Scenario, OmitsAnAbsentCap) {
  auto c = config_from_json(minimal());
  auto f = scenario_to_json(c);
  EXPECT_FALSE(f["decision"].contains("cost_cap"));
  EXPECT_EQ(f["schema_version"], 1);
}

}  // namespace
