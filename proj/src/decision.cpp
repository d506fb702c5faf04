#include "irdecide/decision.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "irdecide/error.hpp"
#include "irdecide/guardrails.hpp"
#include "json_util.hpp"

namespace irdecide::decision {

namespace {

double objective_value(const SystemPoint& p, const Objective& o) {
  if (o.field == "effectiveness") return p.effectiveness;
  if (o.field == "aggregated_cost") {
    if (!p.aggregated_cost) {
      throw InputError("system " + p.system_id + " has no aggregated cost");
    }
    return *p.aggregated_cost;
  }
  auto it = p.cost_vector.find(o.field);
  if (it == p.cost_vector.end()) {
    throw InputError("system " + p.system_id + " has no value for objective " +
                     o.field);
  }
  return it->second;
}

// Larger is better after orienting by direction.
double oriented(const SystemPoint& p, const Objective& o) {
  double v = objective_value(p, o);
  return o.direction == Direction::kMaximize ? v : -v;
}

void check_unique_ids(std::span<const SystemPoint> points) {
  std::set<SystemId> seen;
  for (const SystemPoint& p : points) {
    if (!seen.insert(p.system_id).second) {
      throw InputError("duplicate system " + p.system_id);
    }
  }
}

}  // namespace

Objective Objective::parse(std::string_view text) {
  if (text.empty()) throw ConfigError("empty objective");
  Objective o;
  std::optional<Direction> explicit_dir;
  if (text.back() == '+' || text.back() == '-') {
    explicit_dir =
        text.back() == '+' ? Direction::kMaximize : Direction::kMinimize;
    text.remove_suffix(1);
  }
  if (text.empty()) throw ConfigError("objective needs a field name");
  o.field = std::string(text);
  o.direction = explicit_dir.value_or(
      o.field == "effectiveness" ? Direction::kMaximize : Direction::kMinimize);
  return o;
}

std::string Objective::name() const {
  return field + (direction == Direction::kMaximize ? "+" : "-");
}

bool ParetoResult::on_frontier(const SystemId& id) const {
  return std::find(frontier.begin(), frontier.end(), id) != frontier.end();
}

bool ParetoResult::contains(const SystemId& id) const {
  return on_frontier(id) || dominated.contains(id);
}

bool dominates(const SystemPoint& x, const SystemPoint& y,
               std::span<const Objective> objectives) {
  bool strict = false;
  for (const Objective& o : objectives) {
    const double vx = oriented(x, o);
    const double vy = oriented(y, o);
    if (vx < vy) return false;
    if (vx > vy) strict = true;
  }
  return strict;
}

ParetoResult pareto_frontier(std::span<const SystemPoint> points,
                             std::span<const Objective> objectives) {
  if (points.empty()) throw InputError("Pareto analysis needs points");
  if (objectives.empty()) throw InputError("Pareto analysis needs objectives");
  check_unique_ids(points);
  for (const SystemPoint& p : points) {
    for (const Objective& o : objectives) objective_value(p, o);
  }
  ParetoResult result;
  std::vector<const SystemPoint*> front;
  for (const SystemPoint& y : points) {
    bool dominated = false;
    for (const SystemPoint& x : points) {
      if (&x != &y && dominates(x, y, objectives)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(&y);
  }
  const Objective& first = objectives.front();
  std::sort(front.begin(), front.end(),
            [&](const SystemPoint* a, const SystemPoint* b) {
              const double va = oriented(*a, first);
              const double vb = oriented(*b, first);
              if (va != vb) return va > vb;
              return a->system_id < b->system_id;
            });
  for (const SystemPoint* p : front) result.frontier.push_back(p->system_id);
  // Witness: the smallest-id frontier point dominating the system; one
  // always exists because dominance is a strict partial order.
  std::vector<const SystemPoint*> by_id = front;
  std::sort(by_id.begin(), by_id.end(),
            [](const SystemPoint* a, const SystemPoint* b) {
              return a->system_id < b->system_id;
            });
  for (const SystemPoint& y : points) {
    if (result.on_frontier(y.system_id)) continue;
    for (const SystemPoint* x : by_id) {
      if (dominates(*x, y, objectives)) {
        result.dominated.emplace(y.system_id, x->system_id);
        break;
      }
    }
  }
  return result;
}

std::vector<UtilityEntry> utility_rank(std::span<const SystemPoint> points,
                                       double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InputError("lambda must be a finite value >= 0");
  }
  check_unique_ids(points);
  std::vector<UtilityEntry> ranking;
  for (const SystemPoint& p : points) {
    if (!p.aggregated_cost && lambda > 0.0) {
      throw InputError("system " + p.system_id +
                       " has no aggregated cost for the utility");
    }
    UtilityEntry e;
    e.system_id = p.system_id;
    e.effectiveness = p.effectiveness;
    e.aggregated_cost = p.aggregated_cost.value_or(0.0);
    e.utility = e.effectiveness - lambda * e.aggregated_cost;
    ranking.push_back(e);
  }
  std::sort(ranking.begin(), ranking.end(),
            [](const UtilityEntry& a, const UtilityEntry& b) {
              if (a.utility != b.utility) return a.utility > b.utility;
              if (a.aggregated_cost != b.aggregated_cost) {
                return a.aggregated_cost < b.aggregated_cost;
              }
              return a.system_id < b.system_id;
            });
  return ranking;
}

std::vector<SystemPoint> apply_cost_cap(std::span<const SystemPoint> points,
                                        const CostCap& cap) {
  std::vector<SystemPoint> kept;
  for (const SystemPoint& p : points) {
    double v = 0.0;
    if (cap.factor) {
      auto it = p.cost_vector.find(*cap.factor);
      if (it == p.cost_vector.end()) {
        throw InputError("system " + p.system_id + " has no cost factor " +
                         *cap.factor);
      }
      v = it->second;
    } else {
      if (!p.aggregated_cost) {
        throw InputError("system " + p.system_id + " has no aggregated cost");
      }
      v = *p.aggregated_cost;
    }
    if (v <= cap.limit) kept.push_back(p);
  }
  return kept;
}

std::string_view to_string(CriterionKind kind) {
  return kind == CriterionKind::kPrimary ? "primary" : "secondary";
}

CriterionKind parse_criterion_kind(std::string_view text) {
  if (text == "primary") return CriterionKind::kPrimary;
  if (text == "secondary") return CriterionKind::kSecondary;
  throw ConfigError("criterion kind must be primary or secondary, got `" +
                    std::string(text) + "`");
}

RuleResult significance_rule(std::span<const CriterionRecord> records) {
  bool any_primary = false;
  std::vector<std::string> wins;
  std::vector<std::string> losses;
  for (const CriterionRecord& r : records) {
    const std::string label =
        r.criterion_id + " " + std::string(stats::symbol(r.outcome.outcome));
    if (r.kind == CriterionKind::kPrimary) {
      any_primary = true;
      if (r.outcome.outcome == stats::Outcome::kWin) {
        wins.push_back(label + " (primary)");
      }
    }
    if (r.outcome.outcome == stats::Outcome::kLoss) {
      losses.push_back(label + ": " + r.outcome.evidence);
    }
  }
  if (!any_primary) {
    throw ConfigError("the significance rule needs a primary criterion");
  }
  // A passing rule lists the wins it rests on, a failing one only what
  // made it fail.
  RuleResult result;
  result.passed = !wins.empty() && losses.empty();
  if (result.passed) {
    result.reasons = std::move(wins);
  } else {
    result.reasons = std::move(losses);
    if (wins.empty()) result.reasons.push_back("no primary criterion is ✓");
  }
  return result;
}

RuleResult pareto_rule(const SystemId& chosen, const ParetoResult& pareto) {
  if (!pareto.contains(chosen)) {
    throw InputError("system " + chosen + " is not part of the Pareto analysis");
  }
  RuleResult result;
  result.passed = pareto.on_frontier(chosen);
  if (result.passed) {
    result.reasons.push_back(chosen + " is Pareto optimal");
  } else {
    result.reasons.push_back(chosen + " is dominated by " +
                             pareto.dominated.at(chosen));
  }
  return result;
}

bool DecisionOutcome::any_deploy() const {
  return std::any_of(verdicts.begin(), verdicts.end(),
                     [](const Verdict& v) { return v.deploy; });
}

DecisionOutcome decide(const DecisionInputs& in) {
  check_unique_ids(in.points);
  auto known = [&](const SystemId& id) {
    return std::any_of(in.points.begin(), in.points.end(),
                       [&](const SystemPoint& p) { return p.system_id == id; });
  };
  if (!known(in.incumbent)) {
    throw InputError("incumbent " + in.incumbent + " has no system point");
  }
  if (in.candidates.empty()) throw InputError("no candidate systems");
  for (const SystemId& c : in.candidates) {
    if (!known(c)) throw InputError("candidate " + c + " has no system point");
    if (c == in.incumbent) {
      throw InputError("the incumbent cannot also be a candidate");
    }
    auto it = in.records.find(c);
    for (const std::string& id : in.declared_criteria) {
      bool found = it != in.records.end() &&
                   std::any_of(it->second.begin(), it->second.end(),
                               [&](const CriterionRecord& r) {
                                 return r.criterion_id == id;
                               });
      if (!found) {
        throw InputError("criterion " + id + " has no result for " + c);
      }
    }
  }

  DecisionOutcome out;
  std::vector<SystemPoint> eligible;
  if (in.cost_cap) {
    eligible = apply_cost_cap(in.points, *in.cost_cap);
    bool has_incumbent = std::any_of(
        eligible.begin(), eligible.end(),
        [&](const SystemPoint& p) { return p.system_id == in.incumbent; });
    if (!has_incumbent) {
      for (const SystemPoint& p : in.points) {
        if (p.system_id == in.incumbent) eligible.push_back(p);
      }
    }
  } else {
    eligible = in.points;
  }
  for (const SystemPoint& p : eligible) out.eligible.push_back(p.system_id);
  std::sort(out.eligible.begin(), out.eligible.end());

  out.pareto = pareto_frontier(eligible, in.objectives);
  out.ranking = utility_rank(eligible, in.lambda);
  if (in.chosen_override) {
    if (std::find(out.eligible.begin(), out.eligible.end(),
                  *in.chosen_override) == out.eligible.end()) {
      throw InputError("chosen system " + *in.chosen_override +
                       " is not eligible");
    }
    out.chosen = *in.chosen_override;
  } else {
    out.chosen = out.ranking.front().system_id;
  }

  for (const SystemId& c : in.candidates) {
    Verdict v;
    v.candidate = c;
    const auto& records = in.records.contains(c)
                              ? in.records.at(c)
                              : std::vector<CriterionRecord>{};
    v.significance = significance_rule(records);
    const bool eligible_c = std::find(out.eligible.begin(), out.eligible.end(),
                                      c) != out.eligible.end();
    if (!eligible_c) {
      v.pareto.passed = false;
      v.pareto.reasons.push_back(c + " excluded by cost cap");
    } else if (out.chosen != c) {
      v.pareto.passed = false;
      v.pareto.reasons.push_back("decision line selects " + out.chosen);
      if (!out.pareto.on_frontier(c)) {
        v.pareto.reasons.push_back(c + " is dominated by " +
                                   out.pareto.dominated.at(c));
      }
    } else {
      v.pareto = pareto_rule(out.chosen, out.pareto);
    }
    v.deploy = v.significance.passed && v.pareto.passed;
    if (!v.significance.passed) {
      for (const std::string& r : v.significance.reasons) {
        v.reasons.push_back("significance: " + r);
      }
    }
    if (!v.pareto.passed) {
      for (const std::string& r : v.pareto.reasons) {
        v.reasons.push_back("pareto: " + r);
      }
    }
    out.verdicts.push_back(std::move(v));
  }
  return out;
}

nlohmann::json to_json(const SystemPoint& p) {
  return {{"system_id", p.system_id},
          {"effectiveness", p.effectiveness},
          {"cost_vector", p.cost_vector},
          {"aggregated_cost", detail::optional_json(p.aggregated_cost)}};
}

SystemPoint system_point_from_json(const nlohmann::json& j) {
  SystemPoint p;
  p.system_id = j.at("system_id").get<std::string>();
  p.effectiveness = j.at("effectiveness").get<double>();
  p.cost_vector = j.at("cost_vector").get<std::map<std::string, double>>();
  p.aggregated_cost = detail::optional_from<double>(j, "aggregated_cost");
  return p;
}

nlohmann::json to_json(const ParetoResult& p) {
  return {{"frontier", p.frontier}, {"dominated", p.dominated}};
}

ParetoResult pareto_from_json(const nlohmann::json& j) {
  ParetoResult p;
  p.frontier = j.at("frontier").get<std::vector<SystemId>>();
  p.dominated = j.at("dominated").get<std::map<SystemId, SystemId>>();
  return p;
}

nlohmann::json to_json(const CriterionRecord& r) {
  return {{"criterion_id", r.criterion_id},
          {"kind", to_string(r.kind)},
          {"outcome", guardrails::to_json(r.outcome)},
          {"evidence", r.evidence}};
}

CriterionRecord criterion_record_from_json(const nlohmann::json& j) {
  CriterionRecord r;
  r.criterion_id = j.at("criterion_id").get<std::string>();
  r.kind = parse_criterion_kind(j.at("kind").get<std::string>());
  r.outcome = guardrails::outcome_from_json(j.at("outcome"));
  r.evidence = j.at("evidence");
  return r;
}

nlohmann::json to_json(const RuleResult& r) {
  return {{"passed", r.passed}, {"reasons", r.reasons}};
}

RuleResult rule_result_from_json(const nlohmann::json& j) {
  RuleResult r;
  r.passed = j.at("passed").get<bool>();
  r.reasons = j.at("reasons").get<std::vector<std::string>>();
  return r;
}

nlohmann::json to_json(const Verdict& v) {
  return {{"candidate", v.candidate},
          {"deploy", v.deploy},
          {"significance", to_json(v.significance)},
          {"pareto", to_json(v.pareto)},
          {"reasons", v.reasons}};
}

Verdict verdict_from_json(const nlohmann::json& j) {
  Verdict v;
  v.candidate = j.at("candidate").get<std::string>();
  v.deploy = j.at("deploy").get<bool>();
  v.significance = rule_result_from_json(j.at("significance"));
  v.pareto = rule_result_from_json(j.at("pareto"));
  v.reasons = j.at("reasons").get<std::vector<std::string>>();
  return v;
}

nlohmann::json to_json(const UtilityEntry& u) {
  return {{"system_id", u.system_id},
          {"utility", u.utility},
          {"effectiveness", u.effectiveness},
          {"aggregated_cost", u.aggregated_cost}};
}

UtilityEntry utility_entry_from_json(const nlohmann::json& j) {
  UtilityEntry u;
  u.system_id = j.at("system_id").get<std::string>();
  u.utility = j.at("utility").get<double>();
  u.effectiveness = j.at("effectiveness").get<double>();
  u.aggregated_cost = j.at("aggregated_cost").get<double>();
  return u;
}

}  // namespace irdecide::decision
