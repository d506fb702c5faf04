#include "fixtures.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "irdecide/error.hpp"

namespace irdecide::fixtures {

namespace {

using nlohmann::json;

constexpr std::size_t kVocabulary = 600;
constexpr std::size_t kFillers = 1000;
constexpr std::size_t kDistractors = 12;
constexpr std::size_t kJudgedNonRelevant = 3;
constexpr int kRelevantGrades[] = {3, 2, 2, 1, 1};

std::string padded(const char* prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, width - digits.size(), '0');
  }
  return prefix + digits;
}

std::string word(std::size_t i) { return padded("w", i, 3); }
std::string filler(std::size_t i) { return padded("f", i, 4); }

std::string number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

// Skewed towards low indices, so term frequencies spread over orders of
// magnitude.
std::size_t skewed_word(Rng& rng) {
  const double u = rng.uniform();
  return static_cast<std::size_t>(u * u * kVocabulary);
}

std::vector<std::size_t> distinct_words(Rng& rng, std::size_t n) {
  std::vector<std::size_t> out;
  while (out.size() < n) {
    std::size_t w = skewed_word(rng);
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
  }
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string s;
  for (const std::string& w : words) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s;
}

void append_fillers(Rng& rng, std::vector<std::string>& words, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) words.push_back(filler(rng.below(kFillers)));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

struct Doc {
  std::string id;
  int grade = 0;      // judged grade; 0 also for unjudged
  bool judged = false;
  bool lexical_gap = false;  // relevant but shares no query term
};

json base_config() {
  json criteria = json::array({
      {{"id", "C-Effective"}, {"kind", "primary"}, {"type", "effectiveness"},
       {"margin", 0.01}},
      {{"id", "C-Efficient"}, {"kind", "primary"}, {"type", "efficiency"},
       {"factor_cap", 3}},
      {{"id", "C-Length-short"}, {"kind", "secondary"}, {"type", "length"},
       {"min", 0}, {"max", 4}},
      {{"id", "C-Length-medium"}, {"kind", "secondary"}, {"type", "length"},
       {"min", 3}, {"max", 7}},
      {{"id", "C-Length-long"}, {"kind", "secondary"}, {"type", "length"},
       {"min", 7}, {"max", "inf"}},
      {{"id", "C-Frequency"}, {"kind", "secondary"}, {"type", "frequency"},
       {"min", 0}, {"max", 16}, {"statistic", "collection_frequency"}},
      {{"id", "C-Lexical"}, {"kind", "secondary"}, {"type", "lexical"},
       {"max_overlap", 0}, {"depth", 1}},
      {{"id", "C-Memory"}, {"kind", "secondary"}, {"type", "memory"},
       {"epsilon", 0.8}},
      {{"id", "C-Margin"}, {"kind", "secondary"}, {"type", "margin"},
       {"metric", "rr@10"}, {"delta", 1.0}, {"threshold", 0.01}},
  });
  return {
      {"schema_version", 1},
      {"incumbent", "bm25"},
      {"systems", {{"bm25", {{"run", "bm25.run"}}},
                   {"dense", {{"run", "dense.run"}}}}},
      {"inputs",
       {{"qrels", "qrels.txt"},
        {"queries", "queries.tsv"},
        {"collection", "collection.tsv"},
        {"train_queries", "train_queries.tsv"},
        {"costs", "costs.json"}}},
      {"grade_scale", "graded"},
      {"metric", "ndcg@10"},
      {"significance", {{"alpha", 0.05}}},
      {"min_slice_size", 20},
      {"criteria", std::move(criteria)},
      {"cost",
       {{"weights",
         {{"latency_ms", 10}, {"indexing_min", 1}, {"storage_gb", 1}}}}},
      {"decision", {{"lambda", 0.001}}},
      {"notes",
       {{"C-Environment",
         "GPU indexing energy not measured; qualitative only"}}},
  };
}

}  // namespace

std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) { return next() % n; }

void write_world(const std::filesystem::path& dir, const WorldOptions& opt) {
  std::filesystem::create_directories(dir);
  Rng rng(opt.seed);
  std::ostringstream queries, train, collection, qrels, bm25, dense;
  std::vector<std::vector<std::size_t>> query_words;

  for (std::size_t qi = 0; qi < opt.queries; ++qi) {
    const std::string qid = padded("q", qi + 1, 3);
    const bool long_query = qi % 10 == 9;
    const bool lexical_gap = qi % 10 == 3;
    const std::size_t len = long_query ? 8 + rng.below(3) : 1 + rng.below(7);
    const std::vector<std::size_t> terms = distinct_words(rng, len);
    query_words.push_back(terms);
    std::vector<std::string> qtext;
    for (std::size_t t : terms) qtext.push_back(word(t));
    queries << qid << '\t' << join_words(qtext) << '\n';

    std::vector<Doc> docs;
    for (std::size_t k = 0; k < std::size(kRelevantGrades); ++k) {
      Doc d{"d" + qid.substr(1) + "r" + std::to_string(k), kRelevantGrades[k],
            true, lexical_gap && k == 1};
      std::vector<std::string> text;
      if (!d.lexical_gap) {
        // Grade 3 documents hold every query term, lower grades a prefix.
        const std::size_t keep =
            d.grade == 3 ? terms.size()
                         : std::max<std::size_t>(1, terms.size() / 2);
        for (std::size_t i = 0; i < keep; ++i) text.push_back(word(terms[i]));
      }
      append_fillers(rng, text, 8);
      collection << d.id << '\t' << join_words(text) << '\n';
      docs.push_back(d);
    }
    for (std::size_t k = 0; k < kJudgedNonRelevant + kDistractors; ++k) {
      const bool judged = k < kJudgedNonRelevant;
      Doc d{"d" + qid.substr(1) + (judged ? "n" : "x") + std::to_string(k), 0,
            judged, false};
      std::vector<std::string> text;
      for (std::size_t w : distinct_words(rng, 3)) text.push_back(word(w));
      append_fillers(rng, text, 8);
      collection << d.id << '\t' << join_words(text) << '\n';
      docs.push_back(d);
    }
    for (const Doc& d : docs) {
      if (d.judged) qrels << qid << " 0 " << d.id << ' ' << d.grade << '\n';
    }

    // Scores: the candidate separates grades more sharply than the
    // incumbent, which cannot see lexical-gap documents at all.
    std::vector<std::pair<double, std::string>> a, b;
    for (const Doc& d : docs) {
      const double noise_a = rng.uniform() * 2.0;
      const double noise_b = rng.uniform() * 2.0;
      const int visible = d.lexical_gap ? 0 : d.grade;
      a.emplace_back(0.6 * visible + noise_a, d.id);
      double sb = opt.candidate_grade_weight * d.grade + noise_b;
      if (d.lexical_gap) sb += opt.gap_bonus;
      if (opt.fail_long_queries && long_query) {
        sb = d.grade > 0 ? noise_b * 0.25 : 1.0 + noise_b;
      }
      b.emplace_back(sb, d.id);
    }
    auto emit = [&](std::ostringstream& out,
                    std::vector<std::pair<double, std::string>>& ranked,
                    const char* tag) {
      std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return x.second < y.second;
      });
      for (std::size_t r = 0; r < ranked.size(); ++r) {
        out << qid << " Q0 " << ranked[r].second << ' ' << r + 1 << ' '
            << number(ranked[r].first) << ' ' << tag << '\n';
      }
    };
    emit(bm25, a, "bm25");
    emit(dense, b, "dense");
  }

  // Training queries: perturbed copies of every third eval query plus
  // unrelated random ones.
  std::size_t tid = 0;
  for (std::size_t qi = 0; qi < query_words.size(); qi += 3) {
    std::vector<std::size_t> terms = query_words[qi];
    if (terms.size() > 2) terms.back() = skewed_word(rng);
    std::vector<std::string> text;
    for (std::size_t t : terms) text.push_back(word(t));
    train << padded("t", ++tid, 4) << '\t' << join_words(text) << '\n';
  }
  for (std::size_t i = 0; i < 100; ++i) {
    std::vector<std::string> text;
    for (std::size_t t : distinct_words(rng, 2 + rng.below(5))) {
      text.push_back(word(t));
    }
    train << padded("t", ++tid, 4) << '\t' << join_words(text) << '\n';
  }

  const json costs = {
      {"schema_version", 1},
      {"systems",
       {{"bm25",
         {{"latency_ms", {{"value", 55.0}, {"unit", "ms"}}},
          {"indexing_min", {{"value", 11.0}, {"unit", "min"}}},
          {"storage_gb", {{"value", 2.3}, {"unit", "GB"}}}}},
        {"dense",
         {{"latency_ms", {{"value", 22.0}, {"unit", "ms"}}},
          {"indexing_min", {{"value", 100.0}, {"unit", "min"}}},
          {"storage_gb", {{"value", 22.0}, {"unit", "GB"}}}}}}}};

  write_text(dir / "queries.tsv", queries.str());
  write_text(dir / "train_queries.tsv", train.str());
  write_text(dir / "collection.tsv", collection.str());
  write_text(dir / "qrels.txt", qrels.str());
  write_text(dir / "bm25.run", bm25.str());
  write_text(dir / "dense.run", dense.str());
  write_text(dir / "costs.json", costs.dump(2) + "\n");
}

void write_scenario_configs(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json one = base_config();
  write_text(dir / "scenario1.json", one.dump(2) + "\n");

  json two = base_config();
  for (json& c : two["criteria"]) {
    if (c["id"] == "C-Efficient") c["factor_cap"] = 1;
  }
  // Same weights through the preset, mapped onto this table's factor names.
  two["cost"] = {{"preset", "latency-emphasis"},
                 {"preset_factors",
                  {{"latency", "latency_ms"},
                   {"indexing", "indexing_min"},
                   {"storage", "storage_gb"}}}};
  two["decision"] = {{"lambda", 0.001}, {"cost_cap", "anchor"}};
  write_text(dir / "scenario2.json", two.dump(2) + "\n");

  // TOML twin of scenario 1. Kept by hand so the TOML reader is exercised
  // on idiomatic input rather than a mechanical translation.
  const std::string toml = R"(schema_version = 1
incumbent = "bm25"
grade_scale = "graded"
metric = "ndcg@10"
min_slice_size = 20

[systems.bm25]
run = "bm25.run"

[systems.dense]
run = "dense.run"

[inputs]
qrels = "qrels.txt"
queries = "queries.tsv"
collection = "collection.tsv"
train_queries = "train_queries.tsv"
costs = "costs.json"

[significance]
alpha = 0.05

[[criteria]]
id = "C-Effective"
kind = "primary"
type = "effectiveness"
margin = 0.01

[[criteria]]
id = "C-Efficient"
kind = "primary"
type = "efficiency"
factor_cap = 3

[[criteria]]
id = "C-Length-short"
kind = "secondary"
type = "length"
min = 0
max = 4

[[criteria]]
id = "C-Length-medium"
kind = "secondary"
type = "length"
min = 3
max = 7

[[criteria]]
id = "C-Length-long"
kind = "secondary"
type = "length"
min = 7
max = "inf"

[[criteria]]
id = "C-Frequency"
kind = "secondary"
type = "frequency"
min = 0
max = 16
statistic = "collection_frequency"

[[criteria]]
id = "C-Lexical"
kind = "secondary"
type = "lexical"
max_overlap = 0
depth = 1

[[criteria]]
id = "C-Memory"
kind = "secondary"
type = "memory"
epsilon = 0.8

[[criteria]]
id = "C-Margin"
kind = "secondary"
type = "margin"
metric = "rr@10"
delta = 1.0
threshold = 0.01

[cost.weights]
latency_ms = 10
indexing_min = 1
storage_gb = 1

[decision]
lambda = 0.001

[notes]
C-Environment = "GPU indexing energy not measured; qualitative only"
)";
  write_text(dir / "scenario1.toml", toml);
}

void write_planted_config(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "planted.json", base_config().dump(2) + "\n");
}

void write_all(const std::filesystem::path& root) {
  write_world(root / "scenario", WorldOptions{});
  write_scenario_configs(root / "scenario");
  WorldOptions planted;
  planted.fail_long_queries = true;
  // Strong elsewhere, so the overall comparison still shows a gain.
  planted.candidate_grade_weight = 3.0;
  planted.gap_bonus = 5.0;
  write_world(root / "planted", planted);
  write_planted_config(root / "planted");
}

}  // namespace irdecide::fixtures
