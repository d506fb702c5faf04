#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "irdecide/corpus_io.hpp"
#include "irdecide/significance.hpp"

namespace irdecide::decision {

struct SystemPoint {
  SystemId system_id;
  double effectiveness = 0.0;                 // higher is better
  std::map<std::string, double> cost_vector;  // lower is better, > 0
  std::optional<double> aggregated_cost;

  bool operator==(const SystemPoint&) const = default;
};

enum class Direction { kMaximize, kMinimize };

/// `effectiveness`, `aggregated_cost` or the name of a cost factor.
struct Objective {
  std::string field;
  Direction direction = Direction::kMinimize;

  /// Parses `effectiveness`, `aggregated_cost`, `<factor>`, optionally
  /// suffixed with `+`/`-` (maximize/minimize). Effectiveness defaults to
  /// maximize, everything else to minimize.
  static Objective parse(std::string_view text);
  std::string name() const;
  bool operator==(const Objective&) const = default;
};

struct ParetoResult {
  // Best first by the first objective, then by id.
  std::vector<SystemId> frontier;
  // Dominated system -> one system that dominates it.
  std::map<SystemId, SystemId> dominated;

  bool on_frontier(const SystemId& id) const;
  bool contains(const SystemId& id) const;
  bool operator==(const ParetoResult&) const = default;
};

/// Weak dominance with at least one strict improvement; exact duplicates
/// all stay on the frontier. Throws InputError when a point lacks an
/// objective field or there are no points.
ParetoResult pareto_frontier(std::span<const SystemPoint> points,
                             std::span<const Objective> objectives);

/// True when `x` dominates `y` under the objectives.
bool dominates(const SystemPoint& x, const SystemPoint& y,
               std::span<const Objective> objectives);

struct UtilityEntry {
  SystemId system_id;
  double utility = 0.0;
  double effectiveness = 0.0;
  double aggregated_cost = 0.0;

  bool operator==(const UtilityEntry&) const = default;
};

/// U = effectiveness - lambda * aggregated_cost, best first; ties go to the
/// lower cost, then the smaller id. A missing aggregated cost counts as 0
/// when lambda is 0. Throws InputError when lambda < 0, or lambda > 0 and a
/// point has no aggregated cost.
std::vector<UtilityEntry> utility_rank(std::span<const SystemPoint> points,
                                       double lambda);

/// Limit on the aggregated cost (factor unset) or on one cost factor.
struct CostCap {
  std::optional<std::string> factor;
  double limit = 0.0;

  bool operator==(const CostCap&) const = default;
};

/// Points whose capped cost is <= limit, in input order.
std::vector<SystemPoint> apply_cost_cap(std::span<const SystemPoint> points,
                                        const CostCap& cap);

enum class CriterionKind { kPrimary, kSecondary };

std::string_view to_string(CriterionKind kind);
CriterionKind parse_criterion_kind(std::string_view text);

struct CriterionRecord {
  std::string criterion_id;
  CriterionKind kind = CriterionKind::kSecondary;
  stats::OutcomeLabel outcome;
  nlohmann::json evidence;

  bool operator==(const CriterionRecord&) const = default;
};

struct RuleResult {
  bool passed = false;
  std::vector<std::string> reasons;

  bool operator==(const RuleResult&) const = default;
};

/// Passes iff some primary criterion is ✓ and no criterion is ✗. Throws
/// ConfigError when no primary criterion is present.
RuleResult significance_rule(std::span<const CriterionRecord> records);

/// Passes iff `chosen` is on the frontier. Throws InputError when `chosen`
/// is not one of the analysed systems.
RuleResult pareto_rule(const SystemId& chosen, const ParetoResult& pareto);

struct DecisionInputs {
  SystemId incumbent;
  std::vector<SystemId> candidates;
  std::vector<std::string> declared_criteria;
  std::map<SystemId, std::vector<CriterionRecord>> records;
  std::vector<SystemPoint> points;  // every system, incumbent included
  std::vector<Objective> objectives;
  double lambda = 0.0;
  std::optional<CostCap> cost_cap;
  std::optional<SystemId> chosen_override;
};

struct Verdict {
  SystemId candidate;
  bool deploy = false;
  RuleResult significance;
  RuleResult pareto;
  std::vector<std::string> reasons;

  bool operator==(const Verdict&) const = default;
};

struct DecisionOutcome {
  std::vector<SystemId> eligible;  // after the cost cap
  ParetoResult pareto;             // over the eligible systems
  std::vector<UtilityEntry> ranking;
  SystemId chosen;
  std::vector<Verdict> verdicts;  // one per candidate, config order

  bool any_deploy() const;
  bool operator==(const DecisionOutcome&) const = default;
};

/// Runs both rules for every candidate against the incumbent.
///
/// The cost cap filters the points (the incumbent always stays eligible),
/// the frontier is computed over what remains, and the chosen system is the
/// override or the utility winner. A candidate passes the Pareto rule iff it
/// is the chosen system and the chosen system is Pareto optimal. Throws
/// InputError when a declared criterion has no record for some candidate.
DecisionOutcome decide(const DecisionInputs& inputs);

nlohmann::json to_json(const SystemPoint& p);
SystemPoint system_point_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ParetoResult& p);
ParetoResult pareto_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CriterionRecord& r);
CriterionRecord criterion_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RuleResult& r);
RuleResult rule_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);
nlohmann::json to_json(const UtilityEntry& u);
UtilityEntry utility_entry_from_json(const nlohmann::json& j);

}  // namespace irdecide::decision
