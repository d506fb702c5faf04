#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "irdecide/bundle.hpp"
#include "irdecide/config.hpp"
#include "irdecide/error.hpp"
#include "irdecide/guardrails.hpp"
#include "irdecide/metrics.hpp"
#include "irdecide/pipeline.hpp"
#include "irdecide/significance.hpp"
#include "irdecide/slicing.hpp"

namespace irdecide::cli {

namespace {

using nlohmann::json;

std::string round_trip(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string fixed(double v, int precision = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::string signed_fixed(double v) {
  return (v >= 0 ? "+" : "") + fixed(v);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << content;
  if (!f) throw InputError("failed writing " + path);
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

std::optional<io::GradeScale> grade_scale_option(const std::string& text) {
  if (text.empty() || text == "auto") return std::nullopt;
  try {
    return io::parse_grade_scale(text);
  } catch (const Error&) {
    throw InputError("--grade-scale must be auto, binary or graded");
  }
}

io::Tokenizer make_tokenizer(const std::string& mode,
                             const std::string& vocab) {
  io::TokenizerConfig cfg;
  if (mode == "subword") {
    cfg.mode = io::TokenizerMode::kSubword;
    if (!vocab.empty()) cfg.vocab_path = vocab;
  } else if (mode != "word") {
    throw InputError("--tokenizer must be word or subword");
  }
  return io::Tokenizer(cfg);
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  std::string run;
  std::string qrels;
  std::string metric = "ndcg@10";
  std::string grade_scale = "auto";
  std::string out;
};

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  const metrics::MetricSpec spec = metrics::MetricSpec::parse(o.metric);
  const io::RunFile run = io::read_run(o.run);
  const io::Qrels qrels =
      io::read_qrels(o.qrels, grade_scale_option(o.grade_scale));
  const metrics::PerQueryScores scores = metrics::evaluate(run, qrels, spec);
  const metrics::MeanResult m = metrics::mean(scores);
  std::ostringstream tsv;
  metrics::write_per_query_tsv(tsv, scores);
  tsv << "all\t" << round_trip(m.mean) << '\n';
  if (o.out.empty()) {
    out << tsv.str();
  } else {
    write_file(o.out, tsv.str());
  }
  out << "# " << spec.name() << " mean " << fixed(m.mean) << " over "
      << m.evaluated << " queries (" << m.skipped
      << " without relevant documents skipped)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare

struct CompareOptions {
  std::string baseline;
  std::string candidate;
  std::string qrels;
  std::string metric = "ndcg@10";
  std::string grade_scale = "auto";
  double alpha = 0.05;
  double margin = 0.0;
  std::string out;
};

int cmd_compare(const CompareOptions& o, std::ostream& out) {
  const metrics::MetricSpec spec = metrics::MetricSpec::parse(o.metric);
  const io::RunFile a = io::read_run(o.baseline);
  const io::RunFile b = io::read_run(o.candidate);
  const io::Qrels qrels =
      io::read_qrels(o.qrels, grade_scale_option(o.grade_scale));
  const auto sa = metrics::evaluate(a, qrels, spec);
  const auto sb = metrics::evaluate(b, qrels, spec);
  const stats::ComparisonResult c = stats::compare(sa.scores, sb.scores);
  const stats::OutcomeLabel label = stats::classify(c, o.alpha, o.margin);
  out << "metric     " << spec.name() << '\n'
      << "baseline   " << a.system_id() << "  " << fixed(c.mean_a) << '\n'
      << "candidate  " << b.system_id() << "  " << fixed(c.mean_b) << '\n'
      << "queries    " << c.n << '\n'
      << "delta      " << signed_fixed(c.practical_delta) << '\n'
      << "t          " << fixed(c.t_statistic) << '\n'
      << "p          " << c.p_value << '\n'
      << "outcome    " << stats::symbol(label.outcome) << "  "
      << label.evidence << '\n';
  if (!o.out.empty()) {
    write_file(o.out, json_text({{"baseline", a.system_id()},
                                 {"candidate", b.system_id()},
                                 {"metric", spec.name()},
                                 {"alpha", o.alpha},
                                 {"margin", o.margin},
                                 {"comparison", guardrails::to_json(c)},
                                 {"outcome", guardrails::to_json(label)}}));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// guardrail

struct GuardrailOptions {
  std::string kind;
  std::string baseline;
  std::string candidate;
  std::string run;
  std::string qrels;
  std::string metric = "ndcg@10";
  std::string grade_scale = "auto";
  double alpha = 0.05;
  std::size_t min_slice_size = 20;
  double margin = 0.0;
  std::string queries;
  std::string collection;
  std::string train_queries;
  std::string tokenizer = "word";
  std::string vocab;
  std::string bins;
  std::string edges;
  std::string statistic = "collection_frequency";
  std::size_t max_overlap = 0;
  std::size_t depth = 1;
  double epsilon = 0.8;
  double delta = 1.0;
  double threshold = 0.01;
  std::string qids;
  std::string out;
  std::string export_qids;
};

struct ScorePair {
  SystemId baseline;
  SystemId candidate;
  metrics::ScoreMap a;
  metrics::ScoreMap b;
};

std::optional<ScorePair> load_scores(const GuardrailOptions& o, bool required) {
  const bool any = !o.baseline.empty() || !o.candidate.empty();
  if (!any && !required) return std::nullopt;
  if (o.baseline.empty() || o.candidate.empty() || o.qrels.empty()) {
    throw InputError(
        "an outcome needs --baseline, --candidate and --qrels together");
  }
  const metrics::MetricSpec spec = metrics::MetricSpec::parse(o.metric);
  const io::RunFile a = io::read_run(o.baseline);
  const io::RunFile b = io::read_run(o.candidate);
  const io::Qrels qrels =
      io::read_qrels(o.qrels, grade_scale_option(o.grade_scale));
  return ScorePair{a.system_id(), b.system_id(),
                   metrics::evaluate(a, qrels, spec).scores,
                   metrics::evaluate(b, qrels, spec).scores};
}

std::string require(const std::string& value, const char* flag,
                    const std::string& kind) {
  if (value.empty()) {
    throw InputError("guardrail " + kind + " needs " + flag);
  }
  return value;
}

std::vector<slicing::OpenInterval> bins_of(const GuardrailOptions& o) {
  if (!o.bins.empty() && !o.edges.empty()) {
    throw InputError("--bins and --edges are mutually exclusive");
  }
  if (!o.bins.empty()) return slicing::parse_bins(o.bins);
  if (!o.edges.empty()) return slicing::bins_from_edges(o.edges);
  throw InputError("guardrail " + o.kind + " needs --bins or --edges");
}

std::vector<slicing::QuerySlice> build_slices(const GuardrailOptions& o) {
  const io::Tokenizer tok = make_tokenizer(o.tokenizer, o.vocab);
  const io::QuerySet queries =
      io::read_queries(require(o.queries, "--queries", o.kind), tok);
  std::vector<slicing::QuerySlice> slices;
  if (o.kind == "length") {
    for (const auto& b : bins_of(o)) {
      slices.push_back(slicing::slice_by_length(queries, b));
    }
  } else if (o.kind == "frequency") {
    io::FrequencyStatistic stat;
    if (o.statistic == "collection_frequency" || o.statistic == "cf") {
      stat = io::FrequencyStatistic::kCollectionFrequency;
    } else if (o.statistic == "document_frequency" || o.statistic == "df") {
      stat = io::FrequencyStatistic::kDocumentFrequency;
    } else {
      throw InputError(
          "--statistic must be collection_frequency or document_frequency");
    }
    const io::Collection coll = io::read_collection(
        require(o.collection, "--collection", o.kind), tok);
    for (const auto& b : bins_of(o)) {
      slices.push_back(slicing::slice_by_min_frequency(queries, coll, b, stat));
    }
  } else if (o.kind == "lexical") {
    const std::string source = o.run.empty() ? o.candidate : o.run;
    const io::RunFile run = io::read_run(require(source, "--run", o.kind));
    const io::Collection coll = io::read_collection(
        require(o.collection, "--collection", o.kind), tok);
    slices.push_back(slicing::slice_by_lexical_overlap(run, queries, coll,
                                                       o.max_overlap, o.depth));
  } else if (o.kind == "memory") {
    const io::QuerySet train = io::read_queries(
        require(o.train_queries, "--train-queries", o.kind), tok);
    slices.push_back(
        slicing::slice_out_of_distribution(queries, train, o.epsilon));
  } else if (o.kind == "file") {
    const std::string path = require(o.qids, "--qids", o.kind);
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    slices.push_back(slicing::slice_from_file(
        in, queries, std::filesystem::path(path).filename().string()));
  }
  return slices;
}

int cmd_guardrail_margin(const GuardrailOptions& o, std::ostream& out) {
  const ScorePair s = *load_scores(o, true);
  guardrails::MarginReport r =
      guardrails::margin_regressions(s.a, s.b, o.delta);
  const stats::OutcomeLabel label = guardrails::check_margin(r, o.threshold);
  out << "margin " << o.metric << " " << s.candidate << " vs " << s.baseline
      << ": " << r.regressed_query_ids.size() << " of " << r.evaluated
      << " queries regressed by >= " << o.delta << " (fraction "
      << r.regressed_fraction << ", threshold " << o.threshold << ") "
      << stats::symbol(label.outcome) << ' '
      << (label.outcome == stats::Outcome::kLoss ? "fail" : "pass") << '\n';
  if (!o.out.empty()) {
    json j = guardrails::to_json(r);
    j["metric"] = metrics::MetricSpec::parse(o.metric).name();
    j["baseline"] = s.baseline;
    j["candidate"] = s.candidate;
    write_file(o.out, json_text(j));
  }
  if (!o.export_qids.empty()) {
    std::vector<QueryId> ids(r.regressed_query_ids.begin(),
                             r.regressed_query_ids.end());
    std::ostringstream os;
    io::write_qid_list(os, ids);
    write_file(o.export_qids, os.str());
  }
  return kExitOk;
}

int cmd_guardrail(const GuardrailOptions& o, std::ostream& out) {
  if (o.kind == "margin") return cmd_guardrail_margin(o, out);
  const std::vector<slicing::QuerySlice> slices = build_slices(o);
  const std::optional<ScorePair> scores = load_scores(o, false);
  if (!o.export_qids.empty() && slices.size() != 1) {
    throw InputError("--export-qids needs exactly one slice");
  }
  guardrails::GuardrailSettings settings{o.alpha, o.min_slice_size, o.margin};

  json reports = json::array();
  out << "slice\tqueries";
  if (scores) out << "\tpaired\toutcome\tdelta\tp";
  out << '\n';
  for (const slicing::QuerySlice& slice : slices) {
    out << slice.name << '\t' << slice.size();
    if (!scores) {
      out << '\n';
      reports.push_back({{"slice", slicing::to_json(slice)}});
    } else {
      bool scored = false;
      for (const QueryId& q : slice.query_ids) {
        scored = scored || (scores->a.contains(q) && scores->b.contains(q));
      }
      if (!scored) {
        out << "\t0\tempty\t-\t-\n";
        reports.push_back({{"slice", slicing::to_json(slice)},
                           {"error", "no evaluated queries"}});
      } else {
        const guardrails::GuardrailReport r = guardrails::run_guardrail(
            o.kind, slice, settings, scores->a, scores->b);
        out << '\t' << r.slice_size << '\t' << stats::symbol(r.outcome.outcome);
        if (r.comparison) {
          out << '\t' << signed_fixed(r.comparison->practical_delta) << '\t'
              << r.comparison->p_value;
        } else {
          out << "\t-\t-";
        }
        if (r.outcome.insufficient_data) out << "\t(insufficient data)";
        out << '\n';
        reports.push_back(guardrails::to_json(r));
      }
    }
    for (const std::string& w : slice.warnings) {
      out << "# " << slice.name << ": " << w << '\n';
    }
  }
  if (!o.out.empty()) {
    json j = {{"guardrail", o.kind}, {"reports", std::move(reports)}};
    if (scores) {
      j["metric"] = metrics::MetricSpec::parse(o.metric).name();
      j["baseline"] = scores->baseline;
      j["candidate"] = scores->candidate;
    }
    write_file(o.out, json_text(j));
  }
  if (!o.export_qids.empty()) {
    std::vector<QueryId> ids(slices.front().query_ids.begin(),
                             slices.front().query_ids.end());
    std::ostringstream os;
    io::write_qid_list(os, ids);
    write_file(o.export_qids, os.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// decide

struct DecideOptions {
  std::string config;
  std::string scenario;
  std::string out = "bundle.json";
  std::string report;
};

int cmd_decide(const DecideOptions& o, std::ostream& out) {
  std::string path = o.config;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnv); env && *env) path = env;
  }
  if (path.empty()) {
    throw InputError(std::string("no config given (use --config or set ") +
                     kConfigEnv + ")");
  }
  json raw = io::read_config_json(path);
  if (!o.scenario.empty()) {
    std::ifstream in(o.scenario, std::ios::binary);
    if (!in) throw InputError("cannot open scenario " + o.scenario);
    json fragment;
    try {
      fragment = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError(o.scenario, 0, e.what());
    }
    raw = io::apply_scenario(std::move(raw), fragment);
  }
  const io::FrameworkConfig config =
      io::config_from_json(raw, std::filesystem::path(path).parent_path());
  const Workspace ws = load_workspace(config);
  const decision::DecisionBundle bundle = run_decision(config, ws);

  if (!o.out.empty()) write_file(o.out, decision::emit_bundle(bundle));
  if (!o.report.empty()) write_file(o.report, decision::render_report(bundle));

  for (const decision::Verdict& v : bundle.outcome.verdicts) {
    out << v.candidate << " vs " << bundle.incumbent << ": "
        << (v.deploy ? "DEPLOY" : "REJECT") << '\n';
    for (const decision::CriterionRecord& r : bundle.criteria.at(v.candidate)) {
      out << "  " << stats::symbol(r.outcome.outcome) << ' ' << r.criterion_id
          << " (" << decision::to_string(r.kind) << ") " << r.outcome.evidence
          << '\n';
    }
    for (const std::string& reason : v.reasons) {
      out << "  reason: " << reason << '\n';
    }
  }
  out << "frontier:";
  for (const SystemId& s : bundle.outcome.pareto.frontier) out << ' ' << s;
  out << "\nchosen: " << bundle.outcome.chosen << '\n';
  out << "verdict: " << (bundle.outcome.any_deploy() ? "deploy" : "reject")
      << '\n';
  return bundle.outcome.any_deploy() ? kExitOk : kExitReject;
}

// ---------------------------------------------------------------------------
// serve

struct ServeOptions {
  std::string bundle;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui_dir;
  bool no_open = false;
};

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>irdecide</title></head>
<body>
<p>No UI directory configured; the decision bundle is at
<a href="/bundle.json">/bundle.json</a>.</p>
</body></html>
)";

int cmd_serve(const ServeOptions& o, std::ostream& out) {
  BundleServer server(
      o.bundle, o.ui_dir.empty()
                    ? std::nullopt
                    : std::optional<std::filesystem::path>(o.ui_dir));
  const int port = server.bind(o.host, o.port);
  if (port < 0) {
    throw InputError("cannot bind " + o.host + ":" + std::to_string(o.port));
  }
  const std::string url = "http://" + o.host + ":" + std::to_string(port) + "/";
  out << "serving " << o.bundle << " at " << url << '\n' << std::flush;
  if (!o.no_open) {
    const std::string cmd = "xdg-open '" + url + "' >/dev/null 2>&1 &";
    [[maybe_unused]] int rc = std::system(cmd.c_str());
  }
  server.listen();
  return kExitOk;
}

void add_metric_options(CLI::App* app, std::string& metric,
                        std::string& grade_scale) {
  app->add_option("--metric", metric, "ndcg@k, rr@k, recall@k or p@k")
      ->capture_default_str();
  app->add_option("--grade-scale", grade_scale, "auto, binary or graded")
      ->capture_default_str();
}

}  // namespace

struct BundleServer::Impl {
  httplib::Server server;
  std::string bundle_text;
  int port = -1;
};

BundleServer::BundleServer(const std::filesystem::path& bundle,
                           std::optional<std::filesystem::path> ui_dir)
    : impl_(std::make_unique<Impl>()) {
  std::ifstream in(bundle, std::ios::binary);
  if (!in) throw InputError("cannot open bundle " + bundle.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  impl_->bundle_text = buffer.str();
  decision::parse_bundle(impl_->bundle_text);

  Impl* impl = impl_.get();
  impl->server.Get("/bundle.json",
                   [impl](const httplib::Request&, httplib::Response& res) {
                     res.set_content(impl->bundle_text, "application/json");
                   });
  if (ui_dir) {
    if (!impl->server.set_mount_point("/", ui_dir->string())) {
      throw InputError("UI directory " + ui_dir->string() + " does not exist");
    }
  } else {
    impl->server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  }
}

BundleServer::~BundleServer() = default;

int BundleServer::bind(const std::string& host, int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
  } else {
    impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  return impl_->port;
}

void BundleServer::listen() { impl_->server.listen_after_bind(); }

void BundleServer::stop() { impl_->server.stop(); }

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Decide whether a candidate retrieval system should replace "
               "an incumbent."};
  app.name("irdecide");
  app.require_subcommand(1);

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Per-query metric scores");
  evaluate->add_option("--run", ev.run, "TREC run file")->required();
  evaluate->add_option("--qrels", ev.qrels, "TREC qrels file")->required();
  add_metric_options(evaluate, ev.metric, ev.grade_scale);
  evaluate->add_option("--out", ev.out, "Write the TSV here");

  CompareOptions cmp;
  auto* compare =
      app.add_subcommand("compare", "Paired significance test of two runs");
  compare->add_option("--baseline", cmp.baseline, "Incumbent run")->required();
  compare->add_option("--candidate", cmp.candidate, "Candidate run")
      ->required();
  compare->add_option("--qrels", cmp.qrels, "TREC qrels file")->required();
  add_metric_options(compare, cmp.metric, cmp.grade_scale);
  compare->add_option("--alpha", cmp.alpha, "Significance level")
      ->capture_default_str();
  compare->add_option("--margin", cmp.margin, "Practical margin")
      ->capture_default_str();
  compare->add_option("--out", cmp.out, "Write the JSON result here");

  GuardrailOptions gr;
  auto* guardrail = app.add_subcommand("guardrail", "Robustness guardrails");
  guardrail->add_option("kind", gr.kind,
                        "length, frequency, lexical, memory, margin or file")
      ->required()
      ->check(CLI::IsMember(
          {"length", "frequency", "lexical", "memory", "margin", "file"}));
  guardrail->add_option("--baseline", gr.baseline, "Incumbent run");
  guardrail->add_option("--candidate", gr.candidate, "Candidate run");
  guardrail->add_option("--run", gr.run,
                        "Run whose ranking defines the lexical slice "
                        "(default: --candidate)");
  guardrail->add_option("--qrels", gr.qrels, "TREC qrels file");
  add_metric_options(guardrail, gr.metric, gr.grade_scale);
  guardrail->add_option("--alpha", gr.alpha)->capture_default_str();
  guardrail->add_option("--min-slice-size", gr.min_slice_size)
      ->capture_default_str();
  guardrail->add_option("--margin", gr.margin, "Practical margin")
      ->capture_default_str();
  guardrail->add_option("--queries", gr.queries, "qid<TAB>text file");
  guardrail->add_option("--collection", gr.collection, "docid<TAB>text file");
  guardrail->add_option("--train-queries", gr.train_queries,
                        "Training queries (memory)");
  guardrail->add_option("--tokenizer", gr.tokenizer, "word or subword")
      ->capture_default_str();
  guardrail->add_option("--vocab", gr.vocab, "Subword vocabulary");
  guardrail->add_option("--bins", gr.bins, "Open intervals m:n,m:n,...");
  guardrail->add_option("--edges", gr.edges,
                        "Half-open integer bins e0,e1,...");
  guardrail->add_option("--statistic", gr.statistic,
                        "collection_frequency or document_frequency")
      ->capture_default_str();
  guardrail->add_option("--max-overlap", gr.max_overlap)->capture_default_str();
  guardrail->add_option("--depth", gr.depth)->capture_default_str();
  guardrail->add_option("--epsilon", gr.epsilon)->capture_default_str();
  guardrail->add_option("--delta", gr.delta)->capture_default_str();
  guardrail->add_option("--threshold", gr.threshold)->capture_default_str();
  guardrail->add_option("--qids", gr.qids, "Query id list (file)");
  guardrail->add_option("--out", gr.out, "Write the JSON report here");
  guardrail->add_option("--export-qids", gr.export_qids,
                        "Write the slice or regressed query ids here");

  DecideOptions dc;
  auto* decide = app.add_subcommand("decide", "Run the decision procedure");
  decide->add_option("--config", dc.config,
                     std::string("Config file (default: $") + kConfigEnv + ")");
  decide->add_option("--scenario", dc.scenario,
                     "Scenario fragment overriding weights and decision line");
  decide->add_option("--out", dc.out, "Bundle path")->capture_default_str();
  decide->add_option("--report", dc.report, "Markdown report path");

  ServeOptions sv;
  auto* serve = app.add_subcommand("serve", "Serve a bundle to the what-if UI");
  serve->add_option("--bundle", sv.bundle, "Decision bundle")->required();
  serve->add_option("--host", sv.host)->capture_default_str();
  serve->add_option("--port", sv.port)->capture_default_str();
  serve->add_option("--ui-dir", sv.ui_dir, "Static UI files");
  serve->add_flag("--no-open", sv.no_open, "Do not launch a browser");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "irdecide: " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (evaluate->parsed()) return cmd_evaluate(ev, out);
    if (compare->parsed()) return cmd_compare(cmp, out);
    if (guardrail->parsed()) return cmd_guardrail(gr, out);
    if (decide->parsed()) return cmd_decide(dc, out);
    if (serve->parsed()) return cmd_serve(sv, out);
  } catch (const Error& e) {
    err << "irdecide: error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "irdecide: error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace irdecide::cli
