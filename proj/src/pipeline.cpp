#include "irdecide/pipeline.hpp"

#include <fstream>
#include <set>

#include "irdecide/error.hpp"
#include "irdecide/guardrails.hpp"
#include "irdecide/significance.hpp"
#include "irdecide/slicing.hpp"

namespace irdecide {

namespace {

using decision::CriterionRecord;
using nlohmann::json;

struct Needs {
  bool queries = false;
  bool collection = false;
  bool train_queries = false;
  bool costs = false;
};

Needs needs_of(const io::FrameworkConfig& config) {
  Needs n;
  for (const io::CriterionSpec& c : config.criteria) {
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, io::EfficiencyParams>) {
            n.costs = true;
          } else if constexpr (std::is_same_v<P, io::LengthParams> ||
                               std::is_same_v<P, io::FileSliceParams>) {
            n.queries = true;
          } else if constexpr (std::is_same_v<P, io::FrequencyParams> ||
                               std::is_same_v<P, io::LexicalParams>) {
            n.queries = true;
            n.collection = true;
          } else if constexpr (std::is_same_v<P, io::MemoryParams>) {
            n.queries = true;
            n.train_queries = true;
          }
        },
        c.params);
  }
  if (config.decision.cap_target != io::CapTarget::kNone) n.costs = true;
  return n;
}

void require_input(bool needed, const auto& path, const char* key) {
  if (needed && !path) {
    throw ConfigError(std::string("a declared criterion needs inputs.") + key);
  }
}

// Evaluated per-query scores, computed once per (metric, system).
class ScoreCache {
 public:
  ScoreCache(const Workspace& ws) : ws_(ws) {}

  const metrics::PerQueryScores& get(const metrics::MetricSpec& m,
                                     const SystemId& s) {
    auto& per_system = cache_[m];
    auto it = per_system.find(s);
    if (it == per_system.end()) {
      it = per_system
               .emplace(s, metrics::evaluate(ws_.runs.at(s), ws_.qrels, m))
               .first;
    }
    return it->second;
  }

  const std::map<metrics::MetricSpec,
                 std::map<SystemId, metrics::PerQueryScores>>&
  all() const {
    return cache_;
  }

 private:
  const Workspace& ws_;
  std::map<metrics::MetricSpec, std::map<SystemId, metrics::PerQueryScores>>
      cache_;
};

double capped_cost(const decision::SystemPoint& p,
                   const std::optional<std::string>& factor) {
  if (factor) {
    auto it = p.cost_vector.find(*factor);
    if (it == p.cost_vector.end()) {
      throw InputError("system " + p.system_id + " has no cost factor " +
                       *factor);
    }
    return it->second;
  }
  if (!p.aggregated_cost) {
    throw ConfigError("a cost cap on the aggregated cost needs cost weights");
  }
  return *p.aggregated_cost;
}

}  // namespace

Workspace load_workspace(const io::FrameworkConfig& config) {
  const Needs needs = needs_of(config);
  require_input(needs.queries, config.inputs.queries, "queries");
  require_input(needs.collection, config.inputs.collection, "collection");
  require_input(needs.train_queries, config.inputs.train_queries,
                "train_queries");
  require_input(needs.costs, config.inputs.costs, "costs");

  Workspace ws;
  for (const io::SystemEntry& s : config.systems) {
    ws.runs.emplace(s.id, io::read_run(config.resolve(s.run), s.id));
  }
  ws.qrels = io::read_qrels(config.resolve(config.inputs.qrels),
                            config.grade_scale);

  io::TokenizerConfig tok = config.tokenizer;
  if (tok.vocab_path) tok.vocab_path = config.resolve(*tok.vocab_path);
  const io::Tokenizer tokenizer(tok);
  if (config.inputs.queries) {
    ws.queries = io::read_queries(config.resolve(*config.inputs.queries),
                                  tokenizer);
  }
  if (config.inputs.collection) {
    ws.collection = io::read_collection(
        config.resolve(*config.inputs.collection), tokenizer);
  }
  if (config.inputs.train_queries) {
    ws.train_queries = io::read_queries(
        config.resolve(*config.inputs.train_queries), tokenizer);
  }
  if (config.inputs.costs) {
    ws.costs = io::read_costs(config.resolve(*config.inputs.costs));
    std::vector<SystemId> systems;
    for (const io::SystemEntry& s : config.systems) systems.push_back(s.id);
    std::vector<std::string> factors;
    for (const auto& [f, w] : config.cost.weights.weights()) {
      if (w > 0.0) factors.push_back(f);
    }
    for (const io::CriterionSpec& c : config.criteria) {
      if (auto* e = std::get_if<io::EfficiencyParams>(&c.params);
          e && e->factor) {
        factors.push_back(*e->factor);
      }
    }
    if (config.decision.cap_factor) {
      factors.push_back(*config.decision.cap_factor);
    }
    ws.costs->require(systems, factors);
  }
  return ws;
}

decision::DecisionBundle run_decision(const io::FrameworkConfig& config,
                                      const Workspace& ws) {
  const bool has_weights = !config.cost.weights.weights().empty();
  for (const io::CriterionSpec& c : config.criteria) {
    auto* e = std::get_if<io::EfficiencyParams>(&c.params);
    if (e && !e->factor && !has_weights) {
      throw ConfigError("criterion " + c.id +
                        " compares aggregated costs but no cost weights or "
                        "preset are configured");
    }
  }
  const SystemId anchor = config.cost.anchor.value_or(config.incumbent);
  const SystemId& incumbent = config.incumbent;
  ScoreCache scores(ws);

  decision::DecisionBundle bundle;
  bundle.incumbent = incumbent;
  bundle.candidates = config.candidates;
  for (const io::SystemEntry& s : config.systems) {
    bundle.systems.push_back(s.id);
  }
  const metrics::MetricSpec eff_metric = config.effectiveness_metric();
  bundle.effectiveness_metric = eff_metric.name();
  bundle.costs = ws.costs;
  bundle.anchor = anchor;
  bundle.weights = config.cost.weights;
  bundle.active_preset = config.cost.preset;
  bundle.presets = cost::standard_presets(config.cost.preset_factors);
  bundle.notes = config.notes;

  if (ws.costs && has_weights) {
    for (const SystemId& s : bundle.systems) {
      bundle.aggregated_costs.emplace(
          s, cost::aggregate_cost(*ws.costs, s, anchor, config.cost.weights));
    }
  }

  // Slices that do not depend on the candidate are built once.
  std::map<std::string, slicing::QuerySlice> shared_slices;
  auto shared_slice = [&](const io::CriterionSpec& c) -> const slicing::QuerySlice& {
    auto it = shared_slices.find(c.id);
    if (it != shared_slices.end()) return it->second;
    slicing::QuerySlice slice;
    if (auto* p = std::get_if<io::LengthParams>(&c.params)) {
      slice = slicing::slice_by_length(*ws.queries, p->bounds);
    } else if (auto* p = std::get_if<io::FrequencyParams>(&c.params)) {
      slice = slicing::slice_by_min_frequency(*ws.queries, *ws.collection,
                                              p->bounds, p->statistic);
    } else if (auto* p = std::get_if<io::MemoryParams>(&c.params)) {
      slice = slicing::slice_out_of_distribution(*ws.queries,
                                                 *ws.train_queries, p->epsilon);
    } else if (auto* p = std::get_if<io::FileSliceParams>(&c.params)) {
      const auto path = config.resolve(p->path);
      std::ifstream in(path);
      if (!in) throw InputError("cannot open query list " + path.string());
      slice = slicing::slice_from_file(in, *ws.queries,
                                       p->path.filename().string());
    }
    return shared_slices.emplace(c.id, std::move(slice)).first->second;
  };

  const guardrails::GuardrailSettings base_settings{
      config.alpha, config.min_slice_size, 0.0};

  for (const SystemId& cand : config.candidates) {
    std::vector<CriterionRecord> records;
    for (const io::CriterionSpec& c : config.criteria) {
      CriterionRecord r;
      r.criterion_id = c.id;
      r.kind = c.kind;
      std::visit(
          [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, io::EffectivenessParams>) {
              const auto& a = scores.get(p.metric, incumbent).scores;
              const auto& b = scores.get(p.metric, cand).scores;
              stats::ComparisonResult cmp = stats::compare(a, b);
              r.outcome = stats::classify(cmp, config.alpha, p.margin);
              r.evidence = {{"type", "effectiveness"},
                            {"metric", p.metric.name()},
                            {"alpha", config.alpha},
                            {"margin", p.margin},
                            {"comparison", guardrails::to_json(cmp)}};
            } else if constexpr (std::is_same_v<P, io::EfficiencyParams>) {
              double cost_a = 0.0;
              double cost_b = 0.0;
              if (p.factor) {
                cost_a = ws.costs->value(incumbent, *p.factor);
                cost_b = ws.costs->value(cand, *p.factor);
              } else {
                cost_a = bundle.aggregated_costs.at(incumbent).value;
                cost_b = bundle.aggregated_costs.at(cand).value;
              }
              r.outcome = cost::check_efficiency(cost_b, cost_a, p.cap);
              r.evidence = {
                  {"type", "efficiency"},
                  {"factor", p.factor ? json(*p.factor)
                                      : json("aggregated_cost")},
                  {"mode", cost::to_string(p.cap.mode)},
                  {"limit", p.cap.limit},
                  {"cost_a", cost_a},
                  {"cost_b", cost_b}};
            } else if constexpr (std::is_same_v<P, io::MarginParams>) {
              guardrails::MarginReport m = guardrails::margin_regressions(
                  scores.get(p.metric, incumbent).scores,
                  scores.get(p.metric, cand).scores, p.delta);
              r.outcome = guardrails::check_margin(m, p.threshold);
              r.evidence = guardrails::to_json(m);
              r.evidence["type"] = "margin";
              r.evidence["metric"] = p.metric.name();
            } else {
              slicing::QuerySlice slice;
              if constexpr (std::is_same_v<P, io::LexicalParams>) {
                const SystemId source = p.source_system.value_or(cand);
                slice = slicing::slice_by_lexical_overlap(
                    ws.runs.at(source), *ws.queries, *ws.collection,
                    p.max_overlap, p.depth);
              } else {
                slice = shared_slice(c);
              }
              guardrails::GuardrailSettings settings = base_settings;
              settings.practical_margin = c.margin;
              guardrails::GuardrailReport g = guardrails::run_guardrail(
                  c.id, slice, settings, scores.get(p.metric, incumbent).scores,
                  scores.get(p.metric, cand).scores);
              r.outcome = g.outcome;
              r.evidence = guardrails::to_json(g);
              r.evidence["type"] = c.type_name();
              r.evidence["metric"] = p.metric.name();
            }
          },
          c.params);
      records.push_back(std::move(r));
    }
    bundle.criteria.emplace(cand, std::move(records));
  }

  for (const SystemId& s : bundle.systems) {
    decision::SystemPoint p;
    p.system_id = s;
    p.effectiveness = metrics::mean(scores.get(eff_metric, s)).mean;
    if (ws.costs && ws.costs->has_system(s)) {
      for (const auto& [f, v] : ws.costs->system(s)) p.cost_vector[f] = v.value;
    }
    if (auto it = bundle.aggregated_costs.find(s);
        it != bundle.aggregated_costs.end()) {
      p.aggregated_cost = it->second.value;
    }
    bundle.points.push_back(std::move(p));
  }

  bundle.objectives = config.decision.objectives;
  if (bundle.objectives.empty()) {
    bundle.objectives.push_back(decision::Objective::parse("effectiveness"));
    if (!bundle.aggregated_costs.empty()) {
      bundle.objectives.push_back(decision::Objective::parse("aggregated_cost"));
    }
  }

  bundle.decision_line.lambda = config.decision.lambda;
  switch (config.decision.cap_target) {
    case io::CapTarget::kNone:
      bundle.decision_line.cap_source = "none";
      break;
    case io::CapTarget::kAnchor: {
      bundle.decision_line.cap_source = "anchor";
      const auto& anchor_point = *std::find_if(
          bundle.points.begin(), bundle.points.end(),
          [&](const decision::SystemPoint& p) { return p.system_id == anchor; });
      bundle.decision_line.cost_cap = decision::CostCap{
          config.decision.cap_factor,
          capped_cost(anchor_point, config.decision.cap_factor)};
      break;
    }
    case io::CapTarget::kAbsolute:
      bundle.decision_line.cap_source = "absolute";
      bundle.decision_line.cost_cap =
          decision::CostCap{config.decision.cap_factor, config.decision.cap_value};
      break;
  }

  decision::DecisionInputs in;
  in.incumbent = incumbent;
  in.candidates = config.candidates;
  for (const io::CriterionSpec& c : config.criteria) {
    in.declared_criteria.push_back(c.id);
  }
  in.records = bundle.criteria;
  in.points = bundle.points;
  in.objectives = bundle.objectives;
  in.lambda = config.decision.lambda;
  in.cost_cap = bundle.decision_line.cost_cap;
  in.chosen_override = config.decision.choose;
  bundle.outcome = decision::decide(in);

  for (const auto& [metric, systems] : scores.all()) {
    for (const auto& [s, pq] : systems) {
      decision::ScoreRecord rec;
      rec.scores = pq.scores;
      rec.skipped = pq.skipped;
      rec.mean = metrics::mean(pq).mean;
      bundle.per_query_scores[metric.name()][s] = std::move(rec);
    }
  }
  return bundle;
}

}  // namespace irdecide
