#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "irdecide/corpus_io.hpp"
#include "irdecide/cost_model.hpp"
#include "irdecide/decision.hpp"
#include "irdecide/metrics.hpp"

namespace irdecide::decision {

inline constexpr int kBundleSchemaVersion = 1;

struct ScoreRecord {
  metrics::ScoreMap scores;
  std::set<QueryId> skipped;
  double mean = 0.0;

  bool operator==(const ScoreRecord&) const = default;
};

struct DecisionLine {
  double lambda = 0.0;
  std::optional<CostCap> cost_cap;
  std::string cap_source;  // none | anchor | absolute

  bool operator==(const DecisionLine&) const = default;
};

/// Everything a reader needs to audit or re-weigh the decision, without
/// access to the original inputs.
struct DecisionBundle {
  int schema_version = kBundleSchemaVersion;
  SystemId incumbent;
  std::vector<SystemId> candidates;
  std::vector<SystemId> systems;
  std::string effectiveness_metric;
  // metric name -> system -> scores
  std::map<std::string, std::map<SystemId, ScoreRecord>> per_query_scores;
  // candidate -> records, config order
  std::map<SystemId, std::vector<CriterionRecord>> criteria;
  std::optional<io::CostTable> costs;
  SystemId anchor;
  cost::CostWeights weights;
  std::optional<std::string> active_preset;
  std::vector<cost::WeightPreset> presets;
  std::map<SystemId, cost::AggregatedCost> aggregated_costs;
  std::vector<SystemPoint> points;
  std::vector<Objective> objectives;
  DecisionLine decision_line;
  DecisionOutcome outcome;
  std::map<std::string, std::string> notes;

  bool operator==(const DecisionBundle&) const = default;
};

nlohmann::json to_json(const DecisionBundle& bundle);
/// Throws InputError on a schema mismatch or missing field.
DecisionBundle bundle_from_json(const nlohmann::json& j);

/// Canonical serialized form: two-space indented JSON plus newline.
std::string emit_bundle(const DecisionBundle& bundle);
DecisionBundle parse_bundle(std::string_view text);
DecisionBundle read_bundle(const std::filesystem::path& path);

/// Markdown report: criterion table per candidate, frontier, verdicts.
std::string render_report(const DecisionBundle& bundle);

}  // namespace irdecide::decision
