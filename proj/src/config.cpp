#include "irdecide/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#define TOML_HEADER_ONLY 1
#include <toml.hpp>

#include "irdecide/error.hpp"
#include "json_util.hpp"

namespace irdecide::io {

namespace {

using nlohmann::json;

// Rejects keys outside `allowed` so typos fail loudly instead of silently
// falling back to defaults.
void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key `" + key + "` in " + where);
    }
  }
}

std::string get_string(const json& j, const char* key,
                       const std::string& where) {
  if (!j.contains(key)) {
    throw ConfigError(where + " is missing `" + key + "`");
  }
  if (!j.at(key).is_string()) {
    throw ConfigError(where + "." + key + " must be a string");
  }
  return j.at(key).get<std::string>();
}

std::optional<std::string> opt_string(const json& j, const char* key,
                                      const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_string(j, key, where);
}

double get_number(const json& v, const std::string& where) {
  try {
    return detail::to_number(v);
  } catch (const InputError&) {
    throw ConfigError(where + " must be a number");
  }
}

std::optional<double> opt_number(const json& j, const char* key,
                                 const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_number(j.at(key), where + "." + key);
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback,
                      const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

metrics::MetricSpec parse_metric(const json& j, const char* key,
                                 const metrics::MetricSpec& fallback,
                                 const std::string& where) {
  auto text = opt_string(j, key, where);
  if (!text) return fallback;
  try {
    return metrics::MetricSpec::parse(*text);
  } catch (const Error& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

slicing::OpenInterval parse_interval(const json& c, const std::string& where) {
  slicing::OpenInterval b;
  b.lower = opt_number(c, "min", where).value_or(0.0);
  b.upper = opt_number(c, "max", where).value_or(slicing::kUnbounded);
  if (!(b.lower >= 0.0) || !(b.lower < b.upper)) {
    throw ConfigError(where + " needs 0 <= min < max");
  }
  return b;
}

const std::set<std::string> kCommonCriterionKeys = {"id", "kind", "type",
                                                    "metric", "margin"};

std::set<std::string> with_common(std::initializer_list<std::string> extra) {
  std::set<std::string> keys = kCommonCriterionKeys;
  keys.insert(extra.begin(), extra.end());
  return keys;
}

CriterionSpec parse_criterion(const json& c, const metrics::MetricSpec& dflt) {
  if (!c.is_object()) throw ConfigError("every criterion must be an object");
  CriterionSpec spec;
  spec.id = get_string(c, "id", "criterion");
  const std::string where = "criterion " + spec.id;
  spec.kind = decision::parse_criterion_kind(get_string(c, "kind", where));
  const std::string type = get_string(c, "type", where);
  spec.margin = opt_number(c, "margin", where).value_or(0.0);
  if (!(spec.margin >= 0.0)) throw ConfigError(where + ".margin must be >= 0");
  const metrics::MetricSpec metric = parse_metric(c, "metric", dflt, where);

  if (type == "effectiveness") {
    check_keys(c, kCommonCriterionKeys, where);
    spec.params = EffectivenessParams{metric, spec.margin};
  } else if (type == "efficiency") {
    check_keys(c, {"id", "kind", "type", "factor", "factor_cap", "margin_cap",
                   "absolute_cap"},
               where);
    EfficiencyParams p;
    p.factor = opt_string(c, "factor", where);
    p.cap = cost::EfficiencyCap::from_options(
        opt_number(c, "factor_cap", where), opt_number(c, "margin_cap", where),
        opt_number(c, "absolute_cap", where));
    spec.params = p;
  } else if (type == "length") {
    check_keys(c, with_common({"min", "max"}), where);
    spec.params = LengthParams{metric, parse_interval(c, where)};
  } else if (type == "frequency") {
    check_keys(c, with_common({"min", "max", "statistic"}), where);
    FrequencyParams p{metric, parse_interval(c, where),
                      FrequencyStatistic::kCollectionFrequency};
    auto stat = opt_string(c, "statistic", where);
    if (stat && *stat == "document_frequency") {
      p.statistic = FrequencyStatistic::kDocumentFrequency;
    } else if (stat && *stat != "collection_frequency") {
      throw ConfigError(where +
                        ".statistic must be collection_frequency or "
                        "document_frequency");
    }
    spec.params = p;
  } else if (type == "lexical") {
    check_keys(c, with_common({"max_overlap", "depth", "source_system"}),
               where);
    LexicalParams p{metric, get_count(c, "max_overlap", 0, where),
                    get_count(c, "depth", 1, where),
                    opt_string(c, "source_system", where)};
    if (p.depth < 1) throw ConfigError(where + ".depth must be >= 1");
    spec.params = p;
  } else if (type == "memory") {
    check_keys(c, with_common({"epsilon"}), where);
    MemoryParams p{metric, opt_number(c, "epsilon", where).value_or(0.8)};
    if (!(p.epsilon >= 0.0 && p.epsilon <= 1.0)) {
      throw ConfigError(where + ".epsilon must lie in [0, 1]");
    }
    spec.params = p;
  } else if (type == "file") {
    check_keys(c, with_common({"path"}), where);
    spec.params = FileSliceParams{metric, get_string(c, "path", where)};
  } else if (type == "margin") {
    check_keys(c, {"id", "kind", "type", "metric", "delta", "threshold"},
               where);
    MarginParams p{metric, opt_number(c, "delta", where).value_or(1.0),
                   opt_number(c, "threshold", where).value_or(0.01)};
    if (!(p.delta > 0.0 && p.delta <= 1.0)) {
      throw ConfigError(where + ".delta must lie in (0, 1]");
    }
    if (!(p.threshold >= 0.0 && p.threshold <= 1.0)) {
      throw ConfigError(where + ".threshold must lie in [0, 1]");
    }
    spec.params = p;
  } else {
    throw ConfigError(where + ": unknown criterion type `" + type + "`");
  }
  return spec;
}

TokenizerConfig parse_tokenizer(const json& j) {
  check_keys(j,
             {"mode", "vocab", "continuation_prefix", "unknown_token",
              "max_word_chars"},
             "tokenizer");
  TokenizerConfig t;
  auto mode = opt_string(j, "mode", "tokenizer").value_or("word");
  if (mode == "word") {
    t.mode = TokenizerMode::kWord;
  } else if (mode == "subword") {
    t.mode = TokenizerMode::kSubword;
  } else {
    throw ConfigError("tokenizer.mode must be word or subword");
  }
  if (auto v = opt_string(j, "vocab", "tokenizer")) t.vocab_path = *v;
  if (auto v = opt_string(j, "continuation_prefix", "tokenizer")) {
    t.continuation_prefix = *v;
  }
  if (auto v = opt_string(j, "unknown_token", "tokenizer")) {
    t.unknown_token = *v;
  }
  t.max_word_chars = get_count(j, "max_word_chars", t.max_word_chars,
                               "tokenizer");
  if (t.mode == TokenizerMode::kSubword && !t.vocab_path) {
    throw ConfigError("subword tokenizer needs tokenizer.vocab");
  }
  return t;
}

CostSettings parse_cost(const json& j) {
  check_keys(j, {"weights", "preset", "anchor", "preset_factors"}, "cost");
  CostSettings s;
  if (j.contains("preset_factors")) {
    const json& f = j.at("preset_factors");
    check_keys(f, {"latency", "indexing", "storage"}, "cost.preset_factors");
    if (auto v = opt_string(f, "latency", "cost.preset_factors")) {
      s.preset_factors.latency = *v;
    }
    if (auto v = opt_string(f, "indexing", "cost.preset_factors")) {
      s.preset_factors.indexing = *v;
    }
    if (auto v = opt_string(f, "storage", "cost.preset_factors")) {
      s.preset_factors.storage = *v;
    }
  }
  s.preset = opt_string(j, "preset", "cost");
  const bool has_weights = j.contains("weights") && !j.at("weights").is_null();
  if (s.preset && has_weights) {
    throw ConfigError("cost.preset and cost.weights are mutually exclusive");
  }
  if (s.preset) {
    s.weights = cost::find_preset(*s.preset, s.preset_factors).weights;
  } else if (has_weights) {
    const json& w = j.at("weights");
    if (!w.is_object()) throw ConfigError("cost.weights must be an object");
    std::map<std::string, double> weights;
    for (const auto& [factor, v] : w.items()) {
      weights.emplace(factor, get_number(v, "cost.weights." + factor));
    }
    s.weights = cost::CostWeights(std::move(weights));
  }
  s.anchor = opt_string(j, "anchor", "cost");
  return s;
}

DecisionSettings parse_decision(const json& j) {
  check_keys(j,
             {"lambda", "cost_cap", "cap_factor", "choose", "objectives",
              "metric"},
             "decision");
  DecisionSettings d;
  d.lambda = opt_number(j, "lambda", "decision").value_or(0.0);
  if (!(d.lambda >= 0.0) || !std::isfinite(d.lambda)) {
    throw ConfigError("decision.lambda must be a finite value >= 0");
  }
  if (j.contains("cost_cap") && !j.at("cost_cap").is_null()) {
    const json& cap = j.at("cost_cap");
    if (cap.is_string() && cap.get<std::string>() == "anchor") {
      d.cap_target = CapTarget::kAnchor;
    } else if (cap.is_string() && cap.get<std::string>() == "none") {
      d.cap_target = CapTarget::kNone;
    } else if (cap.is_number()) {
      d.cap_target = CapTarget::kAbsolute;
      d.cap_value = cap.get<double>();
      if (!(d.cap_value > 0.0)) {
        throw ConfigError("decision.cost_cap must be > 0");
      }
    } else {
      throw ConfigError(
          "decision.cost_cap must be null, \"none\", \"anchor\" or a number");
    }
  }
  d.cap_factor = opt_string(j, "cap_factor", "decision");
  d.choose = opt_string(j, "choose", "decision");
  if (j.contains("objectives")) {
    const json& objs = j.at("objectives");
    if (!objs.is_array()) {
      throw ConfigError("decision.objectives must be an array");
    }
    for (const json& o : objs) {
      if (!o.is_string()) {
        throw ConfigError("decision.objectives entries must be strings");
      }
      d.objectives.push_back(decision::Objective::parse(o.get<std::string>()));
    }
  }
  if (j.contains("metric")) {
    d.effectiveness_metric =
        parse_metric(j, "metric", metrics::MetricSpec{}, "decision");
  }
  return d;
}

InputPaths parse_inputs(const json& j) {
  check_keys(j, {"qrels", "queries", "collection", "train_queries", "costs"},
             "inputs");
  InputPaths p;
  p.qrels = get_string(j, "qrels", "inputs");
  if (auto v = opt_string(j, "queries", "inputs")) p.queries = *v;
  if (auto v = opt_string(j, "collection", "inputs")) p.collection = *v;
  if (auto v = opt_string(j, "train_queries", "inputs")) p.train_queries = *v;
  if (auto v = opt_string(j, "costs", "inputs")) p.costs = *v;
  return p;
}

}  // namespace

std::string_view CriterionSpec::type_name() const {
  static constexpr std::string_view kNames[] = {
      "effectiveness", "efficiency", "length", "frequency",
      "lexical",       "memory",     "file",   "margin"};
  return kNames[params.index()];
}

std::filesystem::path FrameworkConfig::resolve(
    const std::filesystem::path& p) const {
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

const SystemEntry& FrameworkConfig::system(const SystemId& id) const {
  for (const SystemEntry& s : systems) {
    if (s.id == id) return s;
  }
  throw ConfigError("unknown system " + id);
}

metrics::MetricSpec FrameworkConfig::effectiveness_metric() const {
  return decision.effectiveness_metric.value_or(default_metric);
}

FrameworkConfig config_from_json(const json& j, std::filesystem::path base_dir) {
  check_keys(j,
             {"schema_version", "incumbent", "systems", "candidates", "inputs",
              "tokenizer", "grade_scale", "metric", "significance",
              "min_slice_size", "criteria", "cost", "decision", "notes"},
             "config");
  FrameworkConfig cfg;
  cfg.base_dir = std::move(base_dir);
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer()) {
    throw ConfigError("config needs an integer schema_version");
  }
  cfg.schema_version = j.at("schema_version").get<int>();
  if (cfg.schema_version != kConfigSchemaVersion) {
    throw ConfigError("unsupported config schema_version " +
                      std::to_string(cfg.schema_version) + " (expected " +
                      std::to_string(kConfigSchemaVersion) + ")");
  }
  cfg.incumbent = get_string(j, "incumbent", "config");

  if (!j.contains("systems") || !j.at("systems").is_object() ||
      j.at("systems").empty()) {
    throw ConfigError("config.systems must be a non-empty object");
  }
  for (const auto& [id, v] : j.at("systems").items()) {
    SystemEntry e;
    e.id = id;
    if (v.is_string()) {
      e.run = v.get<std::string>();
    } else {
      check_keys(v, {"run"}, "systems." + id);
      e.run = get_string(v, "run", "systems." + id);
    }
    cfg.systems.push_back(std::move(e));
  }
  cfg.system(cfg.incumbent);

  if (j.contains("candidates")) {
    std::set<SystemId> seen;
    for (const json& c : j.at("candidates")) {
      if (!c.is_string()) throw ConfigError("candidates must be strings");
      SystemId id = c.get<std::string>();
      cfg.system(id);
      if (id == cfg.incumbent) {
        throw ConfigError("the incumbent cannot also be a candidate");
      }
      if (!seen.insert(id).second) {
        throw ConfigError("duplicate candidate " + id);
      }
      cfg.candidates.push_back(std::move(id));
    }
  } else {
    for (const SystemEntry& s : cfg.systems) {
      if (s.id != cfg.incumbent) cfg.candidates.push_back(s.id);
    }
  }
  if (cfg.candidates.empty()) {
    throw ConfigError("config needs at least one candidate system");
  }

  if (!j.contains("inputs")) throw ConfigError("config needs inputs.qrels");
  cfg.inputs = parse_inputs(j.at("inputs"));
  if (j.contains("tokenizer")) cfg.tokenizer = parse_tokenizer(j.at("tokenizer"));
  if (auto g = opt_string(j, "grade_scale", "config"); g && *g != "auto") {
    if (*g == "binary") {
      cfg.grade_scale = GradeScale::kBinary;
    } else if (*g == "graded") {
      cfg.grade_scale = GradeScale::kGraded;
    } else {
      throw ConfigError("grade_scale must be auto, binary or graded");
    }
  }
  cfg.default_metric =
      parse_metric(j, "metric", cfg.default_metric, "config");
  if (j.contains("significance")) {
    const json& s = j.at("significance");
    check_keys(s, {"alpha"}, "significance");
    cfg.alpha = opt_number(s, "alpha", "significance").value_or(cfg.alpha);
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
      throw ConfigError("significance.alpha must lie in (0, 1)");
    }
  }
  cfg.min_slice_size =
      get_count(j, "min_slice_size", cfg.min_slice_size, "config");
  if (cfg.min_slice_size < 2) {
    throw ConfigError("min_slice_size must be >= 2");
  }

  if (j.contains("criteria")) {
    if (!j.at("criteria").is_array()) {
      throw ConfigError("criteria must be an array");
    }
    std::set<std::string> ids;
    for (const json& c : j.at("criteria")) {
      CriterionSpec spec = parse_criterion(c, cfg.default_metric);
      if (!ids.insert(spec.id).second) {
        throw ConfigError("duplicate criterion id " + spec.id);
      }
      if (auto* lex = std::get_if<LexicalParams>(&spec.params);
          lex && lex->source_system) {
        cfg.system(*lex->source_system);
      }
      cfg.criteria.push_back(std::move(spec));
    }
  }
  bool any_primary = false;
  for (const CriterionSpec& c : cfg.criteria) {
    any_primary = any_primary || c.kind == decision::CriterionKind::kPrimary;
  }
  if (!any_primary) throw ConfigError("config declares no primary criterion");

  if (j.contains("cost")) cfg.cost = parse_cost(j.at("cost"));
  if (cfg.cost.anchor) cfg.system(*cfg.cost.anchor);
  if (j.contains("decision")) cfg.decision = parse_decision(j.at("decision"));
  if (cfg.decision.choose) cfg.system(*cfg.decision.choose);
  if (j.contains("notes")) {
    const json& n = j.at("notes");
    if (!n.is_object()) throw ConfigError("notes must be an object");
    for (const auto& [k, v] : n.items()) {
      if (!v.is_string()) throw ConfigError("notes." + k + " must be a string");
      cfg.notes.emplace(k, v.get<std::string>());
    }
  }
  return cfg;
}

json toml_to_json(std::istream& in, std::string_view source) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  toml::table table;
  try {
    table = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ParseError(std::string(source), e.source().begin.line,
                     std::string(e.description()));
  }
  std::ostringstream out;
  out << toml::json_formatter{table};
  return json::parse(out.str());
}

FrameworkConfig parse_config(std::istream& in, ConfigFormat format,
                             std::filesystem::path base_dir,
                             std::string_view source) {
  json j;
  if (format == ConfigFormat::kToml) {
    j = toml_to_json(in, source);
  } else {
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string(source), 0, e.what());
    }
  }
  return config_from_json(j, std::move(base_dir));
}

json read_config_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config " + path.string());
  if (path.extension() == ".toml") return toml_to_json(in, path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

FrameworkConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_config_json(path), path.parent_path());
}

json apply_scenario(json config, const json& fragment) {
  check_keys(fragment, {"schema_version", "cost", "decision"}, "scenario");
  if (fragment.contains("cost")) {
    const json& c = fragment.at("cost");
    check_keys(c, {"weights", "preset", "anchor", "preset_factors"},
               "scenario.cost");
    json& target = config["cost"];
    if (c.contains("weights") || c.contains("preset")) {
      target.erase("weights");
      target.erase("preset");
    }
    for (const auto& [k, v] : c.items()) target[k] = v;
  }
  if (fragment.contains("decision")) {
    const json& d = fragment.at("decision");
    json& target = config["decision"];
    // The fragment carries the whole decision line; an omitted cap means
    // none.
    target.erase("cost_cap");
    target.erase("cap_factor");
    for (const auto& [k, v] : d.items()) target[k] = v;
  }
  return config;
}

json scenario_to_json(const FrameworkConfig& config) {
  json cost = json::object();
  if (config.cost.preset) {
    // The factor mapping travels with the preset so the fragment resolves
    // to the same weights in any config.
    const cost::PresetFactors& f = config.cost.preset_factors;
    cost["preset"] = *config.cost.preset;
    cost["preset_factors"] = {{"latency", f.latency},
                              {"indexing", f.indexing},
                              {"storage", f.storage}};
  } else if (!config.cost.weights.weights().empty()) {
    cost["weights"] = config.cost.weights.weights();
  }
  if (config.cost.anchor) cost["anchor"] = *config.cost.anchor;
  json d = json::object();
  d["lambda"] = config.decision.lambda;
  switch (config.decision.cap_target) {
    case CapTarget::kNone: break;
    case CapTarget::kAnchor: d["cost_cap"] = "anchor"; break;
    case CapTarget::kAbsolute: d["cost_cap"] = config.decision.cap_value; break;
  }
  if (config.decision.cap_target != CapTarget::kNone &&
      config.decision.cap_factor) {
    d["cap_factor"] = *config.decision.cap_factor;
  }
  return {{"schema_version", kConfigSchemaVersion},
          {"cost", std::move(cost)},
          {"decision", std::move(d)}};
}

}  // namespace irdecide::io
