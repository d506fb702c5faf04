#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "irdecide/corpus_io.hpp"
#include "irdecide/cost_model.hpp"
#include "irdecide/decision.hpp"
#include "irdecide/metrics.hpp"
#include "irdecide/slicing.hpp"

namespace irdecide::io {

inline constexpr int kConfigSchemaVersion = 1;

struct SystemEntry {
  SystemId id;
  std::filesystem::path run;

  bool operator==(const SystemEntry&) const = default;
};

struct InputPaths {
  std::filesystem::path qrels;
  std::optional<std::filesystem::path> queries;
  std::optional<std::filesystem::path> collection;
  std::optional<std::filesystem::path> train_queries;
  std::optional<std::filesystem::path> costs;

  bool operator==(const InputPaths&) const = default;
};

// Criterion parameter blocks, one per criterion type.

struct EffectivenessParams {
  metrics::MetricSpec metric;
  double margin = 0.0;
  bool operator==(const EffectivenessParams&) const = default;
};

struct EfficiencyParams {
  // Unset compares aggregated costs; otherwise the named factor.
  std::optional<std::string> factor;
  cost::EfficiencyCap cap;
  bool operator==(const EfficiencyParams&) const = default;
};

struct LengthParams {
  metrics::MetricSpec metric;
  slicing::OpenInterval bounds;
  bool operator==(const LengthParams&) const = default;
};

struct FrequencyParams {
  metrics::MetricSpec metric;
  slicing::OpenInterval bounds;
  FrequencyStatistic statistic = FrequencyStatistic::kCollectionFrequency;
  bool operator==(const FrequencyParams&) const = default;
};

struct LexicalParams {
  metrics::MetricSpec metric;
  std::size_t max_overlap = 0;
  std::size_t depth = 1;
  // Unset means the candidate under test supplies the ranking.
  std::optional<SystemId> source_system;
  bool operator==(const LexicalParams&) const = default;
};

struct MemoryParams {
  metrics::MetricSpec metric;
  double epsilon = 0.8;
  bool operator==(const MemoryParams&) const = default;
};

struct FileSliceParams {
  metrics::MetricSpec metric;
  std::filesystem::path path;
  bool operator==(const FileSliceParams&) const = default;
};

struct MarginParams {
  metrics::MetricSpec metric;
  double delta = 1.0;
  double threshold = 0.01;
  bool operator==(const MarginParams&) const = default;
};

using CriterionParams =
    std::variant<EffectivenessParams, EfficiencyParams, LengthParams,
                 FrequencyParams, LexicalParams, MemoryParams, FileSliceParams,
                 MarginParams>;

struct CriterionSpec {
  std::string id;
  decision::CriterionKind kind = decision::CriterionKind::kSecondary;
  CriterionParams params;
  // Guardrail practical margin; unused by efficiency and margin criteria.
  double margin = 0.0;

  std::string_view type_name() const;
  bool operator==(const CriterionSpec&) const = default;
};

struct CostSettings {
  std::optional<std::string> preset;  // one of the standard presets
  cost::CostWeights weights;          // resolved weights
  std::optional<SystemId> anchor;     // default: incumbent
  cost::PresetFactors preset_factors;

  bool operator==(const CostSettings&) const = default;
};

enum class CapTarget { kNone, kAnchor, kAbsolute };

struct DecisionSettings {
  double lambda = 0.0;
  CapTarget cap_target = CapTarget::kNone;
  double cap_value = 0.0;                 // kAbsolute only
  std::optional<std::string> cap_factor;  // unset: aggregated cost
  std::optional<SystemId> choose;
  std::vector<decision::Objective> objectives;
  std::optional<metrics::MetricSpec> effectiveness_metric;

  bool operator==(const DecisionSettings&) const = default;
};

struct FrameworkConfig {
  int schema_version = kConfigSchemaVersion;
  std::filesystem::path base_dir;  // relative input paths resolve here
  SystemId incumbent;
  std::vector<SystemEntry> systems;  // incumbent included
  std::vector<SystemId> candidates;
  InputPaths inputs;
  TokenizerConfig tokenizer;
  std::optional<GradeScale> grade_scale;  // unset: infer
  metrics::MetricSpec default_metric = metrics::MetricSpec::parse("ndcg@10");
  double alpha = 0.05;
  std::size_t min_slice_size = 20;
  std::vector<CriterionSpec> criteria;
  CostSettings cost;
  DecisionSettings decision;
  std::map<std::string, std::string> notes;  // qualitative criteria

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  const SystemEntry& system(const SystemId& id) const;
  /// Metric the Pareto analysis and utility use.
  metrics::MetricSpec effectiveness_metric() const;

  bool operator==(const FrameworkConfig&) const = default;
};

enum class ConfigFormat { kJson, kToml };

/// Throws ConfigError on schema or invariant violations.
FrameworkConfig config_from_json(const nlohmann::json& j,
                                 std::filesystem::path base_dir = {});
FrameworkConfig parse_config(std::istream& in, ConfigFormat format,
                             std::filesystem::path base_dir = {},
                             std::string_view source = "<config>");
/// Raw config document; format from the extension (.toml, otherwise JSON).
nlohmann::json read_config_json(const std::filesystem::path& path);
/// read_config_json + config_from_json with the file's directory as base.
FrameworkConfig load_config(const std::filesystem::path& path);

/// Overlays a scenario fragment (cost weights, decision line) onto a raw
/// config document. Weights replace a preset and vice versa; the fragment's
/// decision line replaces the cap entirely, so an omitted cap means none.
nlohmann::json apply_scenario(nlohmann::json config,
                              const nlohmann::json& fragment);
/// TOML document converted to the equivalent JSON value.
nlohmann::json toml_to_json(std::istream& in, std::string_view source);

/// Scenario fragment reproducing the config's weights and decision line;
/// the inverse of apply_scenario.
nlohmann::json scenario_to_json(const FrameworkConfig& config);

}  // namespace irdecide::io
