#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "irdecide/metrics.hpp"
#include "irdecide/significance.hpp"
#include "irdecide/slicing.hpp"

namespace irdecide::guardrails {

struct GuardrailSettings {
  double alpha = 0.05;
  std::size_t min_slice_size = 20;
  double practical_margin = 0.0;
};

struct GuardrailReport {
  std::string criterion_id;
  slicing::QuerySlice slice;
  std::optional<stats::ComparisonResult> comparison;
  stats::OutcomeLabel outcome;
  std::size_t slice_size = 0;     // slice queries scored for both systems
  std::size_t skipped_count = 0;  // slice queries without a score

  bool operator==(const GuardrailReport&) const = default;
};

/// Robustness check of candidate `b` against incumbent `a` over a slice.
/// Throws EmptySetError when no slice query has a score.
GuardrailReport run_guardrail(const std::string& criterion_id,
                              const slicing::QuerySlice& slice,
                              const GuardrailSettings& settings,
                              const metrics::ScoreMap& scores_a,
                              const metrics::ScoreMap& scores_b);

struct MarginReport {
  double delta = 1.0;
  std::optional<double> threshold;  // set by check_margin
  double regressed_fraction = 0.0;
  std::set<QueryId> regressed_query_ids;
  std::size_t evaluated = 0;
  stats::OutcomeLabel outcome;

  bool operator==(const MarginReport&) const = default;
};

/// Queries where a beats b by at least `delta`, over the queries both
/// systems score. Throws EmptySetError when there are none.
MarginReport margin_regressions(const metrics::ScoreMap& scores_a,
                                const metrics::ScoreMap& scores_b,
                                double delta);

/// ✗ iff the regressed fraction exceeds t, otherwise ≈. Records t and the
/// outcome in the report.
stats::OutcomeLabel check_margin(MarginReport& report, double threshold);

nlohmann::json to_json(const stats::ComparisonResult& c);
stats::ComparisonResult comparison_from_json(const nlohmann::json& j);
nlohmann::json to_json(const stats::OutcomeLabel& label);
stats::OutcomeLabel outcome_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GuardrailReport& report);
GuardrailReport guardrail_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MarginReport& report);
MarginReport margin_report_from_json(const nlohmann::json& j);

}  // namespace irdecide::guardrails
