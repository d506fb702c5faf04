#include "irdecide/guardrails.hpp"

#include <sstream>

#include "irdecide/error.hpp"
#include "json_util.hpp"

namespace irdecide::guardrails {

GuardrailReport run_guardrail(const std::string& criterion_id,
                              const slicing::QuerySlice& slice,
                              const GuardrailSettings& settings,
                              const metrics::ScoreMap& scores_a,
                              const metrics::ScoreMap& scores_b) {
  GuardrailReport report;
  report.criterion_id = criterion_id;
  report.slice = slice;
  for (const QueryId& q : slice.query_ids) {
    if (!scores_a.contains(q) || !scores_b.contains(q)) ++report.skipped_count;
  }
  if (report.skipped_count == slice.size()) {
    throw EmptySetError(criterion_id + ": slice " + slice.name +
                        " has no evaluated queries");
  }
  stats::RobustnessResult r = stats::robustness_check(
      scores_a, scores_b, slice.query_ids, settings.alpha,
      settings.min_slice_size, settings.practical_margin);
  report.comparison = r.comparison;
  report.outcome = r.label;
  report.slice_size = r.slice_size;
  return report;
}

MarginReport margin_regressions(const metrics::ScoreMap& scores_a,
                                const metrics::ScoreMap& scores_b,
                                double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw InputError("margin delta must lie in (0, 1]");
  }
  MarginReport report;
  report.delta = delta;
  for (const auto& [q, a] : scores_a) {
    auto it = scores_b.find(q);
    if (it == scores_b.end()) continue;
    ++report.evaluated;
    if (a - it->second >= delta) report.regressed_query_ids.insert(q);
  }
  if (report.evaluated == 0) {
    throw EmptySetError("margin check: no query scored for both systems");
  }
  report.regressed_fraction =
      static_cast<double>(report.regressed_query_ids.size()) /
      static_cast<double>(report.evaluated);
  return report;
}

stats::OutcomeLabel check_margin(MarginReport& report, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InputError("margin threshold must lie in [0, 1]");
  }
  report.threshold = threshold;
  std::ostringstream os;
  os << report.regressed_query_ids.size() << " of " << report.evaluated
     << " queries regressed by >= " << report.delta << " (fraction "
     << report.regressed_fraction << ", threshold " << threshold << ")";
  stats::OutcomeLabel label;
  label.outcome = report.regressed_fraction > threshold ? stats::Outcome::kLoss
                                                        : stats::Outcome::kTie;
  label.evidence = os.str();
  report.outcome = label;
  return label;
}

nlohmann::json to_json(const stats::ComparisonResult& c) {
  return {{"mean_a", c.mean_a},
          {"mean_b", c.mean_b},
          {"n", c.n},
          {"t_statistic", detail::number(c.t_statistic)},
          {"p_value", c.p_value},
          {"practical_delta", c.practical_delta},
          {"degenerate_variance", c.degenerate_variance}};
}

stats::ComparisonResult comparison_from_json(const nlohmann::json& j) {
  stats::ComparisonResult c;
  c.mean_a = j.at("mean_a").get<double>();
  c.mean_b = j.at("mean_b").get<double>();
  c.n = j.at("n").get<std::size_t>();
  c.t_statistic = detail::to_number(j.at("t_statistic"));
  c.p_value = j.at("p_value").get<double>();
  c.practical_delta = j.at("practical_delta").get<double>();
  c.degenerate_variance = j.at("degenerate_variance").get<bool>();
  return c;
}

nlohmann::json to_json(const stats::OutcomeLabel& label) {
  return {{"outcome", stats::to_string(label.outcome)},
          {"symbol", stats::symbol(label.outcome)},
          {"evidence", label.evidence},
          {"insufficient_data", label.insufficient_data}};
}

stats::OutcomeLabel outcome_from_json(const nlohmann::json& j) {
  stats::OutcomeLabel label;
  label.outcome = stats::parse_outcome(j.at("outcome").get<std::string>());
  label.evidence = j.at("evidence").get<std::string>();
  label.insufficient_data = j.at("insufficient_data").get<bool>();
  return label;
}

nlohmann::json to_json(const GuardrailReport& r) {
  return {{"criterion_id", r.criterion_id},
          {"slice", slicing::to_json(r.slice)},
          {"comparison", r.comparison ? to_json(*r.comparison)
                                      : nlohmann::json(nullptr)},
          {"outcome", to_json(r.outcome)},
          {"slice_size", r.slice_size},
          {"skipped_count", r.skipped_count}};
}

GuardrailReport guardrail_report_from_json(const nlohmann::json& j) {
  GuardrailReport r;
  r.criterion_id = j.at("criterion_id").get<std::string>();
  r.slice = slicing::slice_from_json(j.at("slice"));
  if (!j.at("comparison").is_null()) {
    r.comparison = comparison_from_json(j.at("comparison"));
  }
  r.outcome = outcome_from_json(j.at("outcome"));
  r.slice_size = j.at("slice_size").get<std::size_t>();
  r.skipped_count = j.at("skipped_count").get<std::size_t>();
  return r;
}

nlohmann::json to_json(const MarginReport& r) {
  return {{"delta", r.delta},
          {"threshold", detail::optional_json(r.threshold)},
          {"regressed_fraction", r.regressed_fraction},
          {"regressed_query_ids", r.regressed_query_ids},
          {"evaluated", r.evaluated},
          {"outcome", to_json(r.outcome)}};
}

MarginReport margin_report_from_json(const nlohmann::json& j) {
  MarginReport r;
  r.delta = j.at("delta").get<double>();
  r.threshold = detail::optional_from<double>(j, "threshold");
  r.regressed_fraction = j.at("regressed_fraction").get<double>();
  r.regressed_query_ids =
      j.at("regressed_query_ids").get<std::set<QueryId>>();
  r.evaluated = j.at("evaluated").get<std::size_t>();
  r.outcome = outcome_from_json(j.at("outcome"));
  return r;
}

}  // namespace irdecide::guardrails
