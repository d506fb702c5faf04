#include "irdecide/cost_model.hpp"

#include <cmath>
#include <sstream>

#include "irdecide/error.hpp"
#include "json_util.hpp"

namespace irdecide::cost {

namespace {

std::string fmt_number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

CostWeights::CostWeights(std::map<std::string, double> weights)
    : weights_(std::move(weights)) {
  bool any_positive = false;
  for (const auto& [factor, w] : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw ConfigError("weight of " + factor + " must be a finite value >= 0");
    }
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw ConfigError("at least one cost weight must be > 0");
}

double CostWeights::weight(const std::string& factor) const {
  auto it = weights_.find(factor);
  return it == weights_.end() ? 0.0 : it->second;
}

double CostWeights::total() const {
  double sum = 0.0;
  for (const auto& [_, w] : weights_) sum += w;
  return sum;
}

double comparative_transform(double x, double y, double weight) {
  if (!(y > 0.0)) {
    throw InputError("comparative transform needs a positive baseline value");
  }
  return (x / y) * weight;
}

AggregatedCost aggregate_cost(const SystemId& system,
                              const io::FactorMap& system_costs,
                              const SystemId& anchor,
                              const io::FactorMap& anchor_costs,
                              const CostWeights& weights) {
  AggregatedCost ac;
  ac.system_id = system;
  ac.anchor_id = anchor;
  for (const auto& [factor, w] : weights.weights()) {
    auto m = system_costs.find(factor);
    auto a = anchor_costs.find(factor);
    if (w == 0.0 && (m == system_costs.end() || a == anchor_costs.end())) {
      continue;
    }
    if (m == system_costs.end()) {
      throw InputError("system " + system + " is missing cost factor " +
                       factor);
    }
    if (a == anchor_costs.end()) {
      throw InputError("anchor " + anchor + " is missing cost factor " +
                       factor);
    }
    double contribution =
        comparative_transform(m->second.value, a->second.value, w);
    ac.contributions.emplace(factor, contribution);
    ac.value += contribution;
  }
  return ac;
}

AggregatedCost aggregate_cost(const io::CostTable& table,
                              const SystemId& system, const SystemId& anchor,
                              const CostWeights& weights) {
  return aggregate_cost(system, table.system(system), anchor,
                        table.system(anchor), weights);
}

std::string_view to_string(CapMode mode) {
  switch (mode) {
    case CapMode::kFactor: return "factor";
    case CapMode::kMargin: return "margin";
    case CapMode::kAbsolute: return "absolute";
  }
  return "?";
}

EfficiencyCap EfficiencyCap::from_options(std::optional<double> factor_cap,
                                          std::optional<double> margin_cap,
                                          std::optional<double> absolute_cap) {
  int set = (factor_cap ? 1 : 0) + (margin_cap ? 1 : 0) + (absolute_cap ? 1 : 0);
  if (set != 1) {
    throw ConfigError(
        "efficiency check needs exactly one of factor cap N, margin cap D or "
        "absolute cap");
  }
  if (factor_cap) {
    if (!std::isfinite(*factor_cap) || *factor_cap < 1.0) {
      throw ConfigError("factor cap N must be >= 1");
    }
    return {CapMode::kFactor, *factor_cap};
  }
  if (margin_cap) {
    if (!std::isfinite(*margin_cap) || *margin_cap < 0.0) {
      throw ConfigError("margin cap D must be >= 0");
    }
    return {CapMode::kMargin, *margin_cap};
  }
  if (!std::isfinite(*absolute_cap) || *absolute_cap <= 0.0) {
    throw ConfigError("absolute cap must be > 0");
  }
  return {CapMode::kAbsolute, *absolute_cap};
}

stats::OutcomeLabel check_efficiency(double cost_b, double cost_a,
                                     const EfficiencyCap& cap) {
  stats::OutcomeLabel label;
  const std::string costs =
      "cost " + fmt_number(cost_b) + " vs " + fmt_number(cost_a);
  bool loss = false;
  bool win = false;
  std::string rule;
  switch (cap.mode) {
    case CapMode::kFactor:
      loss = cost_b > cap.limit * cost_a;
      win = cap.limit * cost_b < cost_a;
      rule = "factor cap N=" + fmt_number(cap.limit);
      break;
    case CapMode::kMargin:
      loss = cost_b - cost_a > cap.limit;
      win = cost_a - cost_b > cap.limit;
      rule = "margin cap D=" + fmt_number(cap.limit);
      break;
    case CapMode::kAbsolute:
      loss = cost_b > cap.limit;
      win = !loss && cost_b < cost_a;
      rule = "absolute cap " + fmt_number(cap.limit);
      break;
  }
  if (loss) {
    label.outcome = stats::Outcome::kLoss;
    label.evidence = costs + " exceeds " + rule;
  } else if (win) {
    label.outcome = stats::Outcome::kWin;
    label.evidence = costs + " is cheaper under " + rule;
  } else {
    label.outcome = stats::Outcome::kTie;
    label.evidence = costs + " within " + rule;
  }
  return label;
}

std::vector<WeightPreset> standard_presets(const PresetFactors& f) {
  auto make = [&](std::string name, std::string description, double l,
                  double i, double s) {
    return WeightPreset{std::move(name), std::move(description),
                        CostWeights({{f.latency, l}, {f.indexing, i},
                                     {f.storage, s}})};
  };
  return {
      make("latency-emphasis",
           "latency weighted 10, indexing and storage 1", 10, 1, 1),
      make("indexing-emphasis",
           "frequent index refreshes: indexing weight raised to 5", 10, 5, 1),
      make("uniform", "all weights 1", 1, 1, 1),
      make("static-collection",
           "indexing is a one-time cost and ignored", 10, 0, 1),
  };
}

WeightPreset find_preset(const std::string& name, const PresetFactors& f) {
  for (WeightPreset& p : standard_presets(f)) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown weight preset `" + name + "`");
}

nlohmann::json to_json(const CostWeights& w) { return w.weights(); }

CostWeights weights_from_json(const nlohmann::json& j) {
  return CostWeights(j.get<std::map<std::string, double>>());
}

nlohmann::json to_json(const AggregatedCost& ac) {
  return {{"system_id", ac.system_id},
          {"anchor_id", ac.anchor_id},
          {"value", ac.value},
          {"contributions", ac.contributions}};
}

AggregatedCost aggregated_cost_from_json(const nlohmann::json& j) {
  AggregatedCost ac;
  ac.system_id = j.at("system_id").get<std::string>();
  ac.anchor_id = j.at("anchor_id").get<std::string>();
  ac.value = j.at("value").get<double>();
  ac.contributions = j.at("contributions").get<std::map<std::string, double>>();
  return ac;
}

nlohmann::json to_json(const io::CostTable& table) {
  nlohmann::json systems = nlohmann::json::object();
  for (const auto& [system, factors] : table.rows()) {
    nlohmann::json row = nlohmann::json::object();
    for (const auto& [factor, cv] : factors) {
      row[factor] = {{"value", cv.value}, {"unit", cv.unit}};
    }
    systems[system] = std::move(row);
  }
  return {{"schema_version", 1}, {"systems", std::move(systems)}};
}

io::CostTable cost_table_from_json(const nlohmann::json& j) {
  std::map<SystemId, io::FactorMap> rows;
  for (const auto& [system, factors] : j.at("systems").items()) {
    io::FactorMap row;
    for (const auto& [factor, v] : factors.items()) {
      row.emplace(factor, io::CostValue{v.at("value").get<double>(),
                                        v.at("unit").get<std::string>()});
    }
    rows.emplace(system, std::move(row));
  }
  return io::CostTable(std::move(rows));
}

}  // namespace irdecide::cost
