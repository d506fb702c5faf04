#include "irdecide/bundle.hpp"

#include <fstream>
#include <sstream>

#include "irdecide/error.hpp"
#include "json_util.hpp"

namespace irdecide::decision {

namespace {

using nlohmann::json;

template <typename T, typename F>
json array_of(const std::vector<T>& items, F&& f) {
  json a = json::array();
  for (const T& item : items) a.push_back(f(item));
  return a;
}

template <typename T, typename F>
std::vector<T> vector_from(const json& a, F&& f) {
  std::vector<T> out;
  for (const json& item : a) out.push_back(f(item));
  return out;
}

json cap_json(const std::optional<CostCap>& cap) {
  if (!cap) return nullptr;
  return {{"factor", detail::optional_json(cap->factor)},
          {"limit", cap->limit}};
}

std::optional<CostCap> cap_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  CostCap cap;
  cap.factor = detail::optional_from<std::string>(j, "factor");
  cap.limit = j.at("limit").get<double>();
  return cap;
}

json outcome_json(const DecisionOutcome& o) {
  return {{"eligible", o.eligible},
          {"pareto", to_json(o.pareto)},
          {"ranking", array_of(o.ranking,
                               [](const UtilityEntry& u) { return to_json(u); })},
          {"chosen", o.chosen},
          {"verdicts",
           array_of(o.verdicts, [](const Verdict& v) { return to_json(v); })},
          {"any_deploy", o.any_deploy()}};
}

DecisionOutcome outcome_from(const json& j) {
  DecisionOutcome o;
  o.eligible = j.at("eligible").get<std::vector<SystemId>>();
  o.pareto = pareto_from_json(j.at("pareto"));
  o.ranking = vector_from<UtilityEntry>(j.at("ranking"),
                                        utility_entry_from_json);
  o.chosen = j.at("chosen").get<std::string>();
  o.verdicts = vector_from<Verdict>(j.at("verdicts"), verdict_from_json);
  return o;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

// Keeps table cells on one line.
std::string cell(std::string s) {
  for (char& c : s) {
    if (c == '|' || c == '\n') c = ' ';
  }
  return s;
}

}  // namespace

json to_json(const DecisionBundle& b) {
  json scores = json::object();
  for (const auto& [metric, systems] : b.per_query_scores) {
    json per_system = json::object();
    for (const auto& [system, rec] : systems) {
      per_system[system] = {{"scores", rec.scores},
                            {"skipped", rec.skipped},
                            {"mean", rec.mean}};
    }
    scores[metric] = std::move(per_system);
  }
  json criteria = json::object();
  for (const auto& [candidate, records] : b.criteria) {
    criteria[candidate] = array_of(
        records, [](const CriterionRecord& r) { return to_json(r); });
  }
  json aggregated = json::object();
  for (const auto& [system, ac] : b.aggregated_costs) {
    aggregated[system] = cost::to_json(ac);
  }
  return {
      {"schema_version", b.schema_version},
      {"incumbent", b.incumbent},
      {"candidates", b.candidates},
      {"systems", b.systems},
      {"effectiveness_metric", b.effectiveness_metric},
      {"per_query_scores", std::move(scores)},
      {"criteria", std::move(criteria)},
      {"costs", b.costs ? cost::to_json(*b.costs) : json(nullptr)},
      {"anchor", b.anchor},
      {"weights", cost::to_json(b.weights)},
      {"active_preset", detail::optional_json(b.active_preset)},
      {"presets", array_of(b.presets,
                           [](const cost::WeightPreset& p) -> json {
                             return {{"name", p.name},
                                     {"description", p.description},
                                     {"weights", cost::to_json(p.weights)}};
                           })},
      {"aggregated_costs", std::move(aggregated)},
      {"points",
       array_of(b.points, [](const SystemPoint& p) { return to_json(p); })},
      {"objectives", array_of(b.objectives,
                              [](const Objective& o) { return o.name(); })},
      {"decision_line",
       {{"lambda", b.decision_line.lambda},
        {"cost_cap", cap_json(b.decision_line.cost_cap)},
        {"cap_source", b.decision_line.cap_source}}},
      {"outcome", outcome_json(b.outcome)},
      {"notes", b.notes},
  };
}

DecisionBundle bundle_from_json(const json& j) {
  try {
    DecisionBundle b;
    b.schema_version = j.at("schema_version").get<int>();
    if (b.schema_version != kBundleSchemaVersion) {
      throw InputError("unsupported bundle schema_version " +
                       std::to_string(b.schema_version));
    }
    b.incumbent = j.at("incumbent").get<std::string>();
    b.candidates = j.at("candidates").get<std::vector<SystemId>>();
    b.systems = j.at("systems").get<std::vector<SystemId>>();
    b.effectiveness_metric = j.at("effectiveness_metric").get<std::string>();
    for (const auto& [metric, systems] : j.at("per_query_scores").items()) {
      for (const auto& [system, rec] : systems.items()) {
        ScoreRecord r;
        r.scores = rec.at("scores").get<metrics::ScoreMap>();
        r.skipped = rec.at("skipped").get<std::set<QueryId>>();
        r.mean = rec.at("mean").get<double>();
        b.per_query_scores[metric][system] = std::move(r);
      }
    }
    for (const auto& [candidate, records] : j.at("criteria").items()) {
      b.criteria[candidate] =
          vector_from<CriterionRecord>(records, criterion_record_from_json);
    }
    if (!j.at("costs").is_null()) {
      b.costs = cost::cost_table_from_json(j.at("costs"));
    }
    b.anchor = j.at("anchor").get<std::string>();
    const json& w = j.at("weights");
    if (!w.empty()) b.weights = cost::weights_from_json(w);
    b.active_preset = detail::optional_from<std::string>(j, "active_preset");
    b.presets = vector_from<cost::WeightPreset>(
        j.at("presets"), [](const json& p) {
          return cost::WeightPreset{p.at("name").get<std::string>(),
                                    p.at("description").get<std::string>(),
                                    cost::weights_from_json(p.at("weights"))};
        });
    for (const auto& [system, ac] : j.at("aggregated_costs").items()) {
      b.aggregated_costs.emplace(system, cost::aggregated_cost_from_json(ac));
    }
    b.points = vector_from<SystemPoint>(j.at("points"), system_point_from_json);
    b.objectives = vector_from<Objective>(j.at("objectives"), [](const json& o) {
      return Objective::parse(o.get<std::string>());
    });
    const json& line = j.at("decision_line");
    b.decision_line.lambda = line.at("lambda").get<double>();
    b.decision_line.cost_cap = cap_from(line.at("cost_cap"));
    b.decision_line.cap_source = line.at("cap_source").get<std::string>();
    b.outcome = outcome_from(j.at("outcome"));
    b.notes = j.at("notes").get<std::map<std::string, std::string>>();
    return b;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed bundle: ") + e.what());
  }
}

std::string emit_bundle(const DecisionBundle& bundle) {
  return to_json(bundle).dump(2) + "\n";
}

DecisionBundle parse_bundle(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("<bundle>", 0, e.what());
  }
  return bundle_from_json(j);
}

DecisionBundle read_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open bundle " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_bundle(buffer.str());
}

std::string render_report(const DecisionBundle& b) {
  std::ostringstream os;
  os << "# Deployment decision\n\n";
  os << "Incumbent: `" << b.incumbent << "`. Effectiveness metric: `"
     << b.effectiveness_metric << "`.\n\n";
  os << "| System | " << b.effectiveness_metric << " | Aggregated cost |\n";
  os << "|---|---|---|\n";
  for (const SystemPoint& p : b.points) {
    os << "| " << cell(p.system_id) << " | " << fmt(p.effectiveness) << " | "
       << (p.aggregated_cost ? fmt(*p.aggregated_cost) : "n/a") << " |\n";
  }
  for (const Verdict& v : b.outcome.verdicts) {
    os << "\n## " << v.candidate << " vs " << b.incumbent << ": "
       << (v.deploy ? "DEPLOY" : "REJECT") << "\n\n";
    os << "| Criterion | Kind | Outcome | Evidence |\n";
    os << "|---|---|---|---|\n";
    auto it = b.criteria.find(v.candidate);
    if (it != b.criteria.end()) {
      for (const CriterionRecord& r : it->second) {
        os << "| " << cell(r.criterion_id) << " | " << to_string(r.kind)
           << " | " << stats::symbol(r.outcome.outcome) << " | "
           << cell(r.outcome.evidence) << " |\n";
      }
    }
    os << "\nSignificance rule: " << (v.significance.passed ? "pass" : "fail")
       << ". Pareto rule: " << (v.pareto.passed ? "pass" : "fail") << ".\n";
    for (const std::string& r : v.reasons) os << "- " << r << "\n";
  }
  os << "\n## Pareto frontier\n\nObjectives:";
  for (const Objective& o : b.objectives) os << " `" << o.name() << "`";
  os << "\n\n";
  for (const SystemId& s : b.outcome.pareto.frontier) {
    os << "- " << s << "\n";
  }
  for (const auto& [s, w] : b.outcome.pareto.dominated) {
    os << "- " << s << " (dominated by " << w << ")\n";
  }
  os << "\n## Decision line\n\nlambda = " << b.decision_line.lambda;
  if (b.decision_line.cost_cap) {
    os << ", cost cap " << fmt(b.decision_line.cost_cap->limit) << " ("
       << b.decision_line.cap_source;
    if (b.decision_line.cost_cap->factor) {
      os << ", factor " << *b.decision_line.cost_cap->factor;
    }
    os << ")";
  }
  os << ". Chosen: `" << b.outcome.chosen << "`.\n\n";
  os << "| System | Utility |\n|---|---|\n";
  for (const UtilityEntry& u : b.outcome.ranking) {
    os << "| " << cell(u.system_id) << " | " << fmt(u.utility) << " |\n";
  }
  if (!b.notes.empty()) {
    os << "\n## Notes\n\n";
    for (const auto& [k, v] : b.notes) os << "- " << k << ": " << v << "\n";
  }
  return os.str();
}

}  // namespace irdecide::decision
