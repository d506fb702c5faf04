#include "irdecide/corpus_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "irdecide/error.hpp"

namespace irdecide::io {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<long long> parse_int(std::string_view text) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

bool canonical_order(const RankedDoc& x, const RankedDoc& y) {
  if (x.score != y.score) return x.score > y.score;
  return x.doc_id < y.doc_id;
}

// Splits `id<TAB>text` lines; shared by queries and collection readers.
template <typename Fn>
void for_each_tsv_line(std::istream& in, std::string_view source, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(std::string(source), line_no,
                       "expected `id<TAB>text`, no tab found");
    }
    if (tab == 0) {
      throw ParseError(std::string(source), line_no, "empty id");
    }
    fn(line_no, line.substr(0, tab), std::string_view(line).substr(tab + 1));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Runs

RunFile::RunFile(SystemId system_id, Entries entries)
    : system_id_(std::move(system_id)), entries_(std::move(entries)) {
  for (auto& [query, docs] : entries_) {
    std::sort(docs.begin(), docs.end(), canonical_order);
    std::set<std::string_view> seen;
    for (const RankedDoc& d : docs) {
      if (!seen.insert(d.doc_id).second) {
        throw InputError("run " + system_id_ + ": duplicate document " +
                         d.doc_id + " for query " + query);
      }
    }
  }
}

std::span<const RankedDoc> RunFile::ranking(const QueryId& query) const {
  auto it = entries_.find(query);
  if (it == entries_.end()) return {};
  return it->second;
}

std::size_t RunFile::total_entries() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, docs] : entries_) n += docs.size();
  return n;
}

RunFile parse_run(std::istream& in, std::string_view source,
                  std::optional<SystemId> system_id) {
  RunFile::Entries entries;
  std::map<QueryId, std::map<DocId, std::size_t>> seen;
  std::optional<std::string> smallest_tag;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank(line)) continue;
    auto fields = split_fields(line);
    if (fields.size() != 6) {
      throw ParseError(std::string(source), line_no,
                       "expected 6 fields `qid Q0 docid rank score runtag`, "
                       "found " + std::to_string(fields.size()));
    }
    auto score = parse_double(fields[4]);
    if (!score) {
      throw ParseError(std::string(source), line_no,
                       "non-numeric score `" + std::string(fields[4]) + "`");
    }
    QueryId qid(fields[0]);
    DocId doc(fields[2]);
    auto [it, inserted] = seen[qid].emplace(doc, line_no);
    if (!inserted) {
      throw ParseError(std::string(source), line_no,
                       "duplicate document " + doc + " for query " + qid +
                           " (first seen on line " +
                           std::to_string(it->second) + ")");
    }
    std::string tag(fields[5]);
    if (!smallest_tag || tag < *smallest_tag) smallest_tag = tag;
    entries[qid].push_back({std::move(doc), *score});
  }
  SystemId id = system_id ? *system_id : smallest_tag.value_or("");
  return RunFile(std::move(id), std::move(entries));
}

RunFile read_run(const std::filesystem::path& path,
                 std::optional<SystemId> system_id) {
  auto in = open_input(path);
  return parse_run(in, path.string(), std::move(system_id));
}

void write_run(std::ostream& out, const RunFile& run) {
  const std::string tag = run.system_id().empty() ? "run" : run.system_id();
  char buf[64];
  for (const auto& [query, docs] : run.entries()) {
    for (std::size_t i = 0; i < docs.size(); ++i) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), docs[i].score);
      out << query << " Q0 " << docs[i].doc_id << ' ' << (i + 1) << ' '
          << std::string_view(buf, end - buf) << ' ' << tag << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Qrels

int max_grade(GradeScale scale) {
  return scale == GradeScale::kBinary ? 1 : kMaxGradedGrade;
}

int default_relevance_threshold(GradeScale scale) {
  return scale == GradeScale::kBinary ? 1 : 2;
}

std::string_view to_string(GradeScale scale) {
  return scale == GradeScale::kBinary ? "binary" : "graded";
}

GradeScale parse_grade_scale(std::string_view text) {
  if (text == "binary") return GradeScale::kBinary;
  if (text == "graded") return GradeScale::kGraded;
  throw ConfigError("unknown grade scale `" + std::string(text) +
                    "` (expected binary or graded)");
}

Qrels::Qrels(std::map<QueryId, Judgments> judgments, GradeScale scale)
    : judgments_(std::move(judgments)), scale_(scale) {
  for (const auto& [query, docs] : judgments_) {
    for (const auto& [doc, grade] : docs) {
      if (grade < 0 || grade > max_grade(scale_)) {
        throw InputError("qrels: grade " + std::to_string(grade) + " for (" +
                         query + ", " + doc + ") outside the " +
                         std::string(to_string(scale_)) + " scale");
      }
    }
  }
}

const Qrels::Judgments* Qrels::query(const QueryId& query) const {
  auto it = judgments_.find(query);
  return it == judgments_.end() ? nullptr : &it->second;
}

int Qrels::grade(const QueryId& query, const DocId& doc) const {
  const Judgments* j = this->query(query);
  if (!j) return 0;
  auto it = j->find(doc);
  return it == j->end() ? 0 : it->second;
}

std::size_t Qrels::size() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, docs] : judgments_) n += docs.size();
  return n;
}

Qrels parse_qrels(std::istream& in, std::string_view source,
                  std::optional<GradeScale> declared) {
  std::map<QueryId, Qrels::Judgments> judgments;
  int highest = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank(line)) continue;
    auto fields = split_fields(line);
    if (fields.size() != 4) {
      throw ParseError(std::string(source), line_no,
                       "expected 4 fields `qid 0 docid grade`, found " +
                           std::to_string(fields.size()));
    }
    auto grade = parse_int(fields[3]);
    if (!grade) {
      throw ParseError(std::string(source), line_no,
                       "non-integer grade `" + std::string(fields[3]) + "`");
    }
    if (*grade < 0) {
      throw ParseError(std::string(source), line_no,
                       "negative grade " + std::to_string(*grade));
    }
    if (*grade > kMaxGradedGrade) {
      throw ParseError(std::string(source), line_no,
                       "grade " + std::to_string(*grade) +
                           " above the supported maximum " +
                           std::to_string(kMaxGradedGrade));
    }
    int g = static_cast<int>(*grade);
    auto [it, inserted] =
        judgments[QueryId(fields[0])].emplace(DocId(fields[2]), g);
    if (!inserted && it->second != g) {
      throw ParseError(std::string(source), line_no,
                       "conflicting grades " + std::to_string(it->second) +
                           " and " + std::to_string(g) + " for (" +
                           std::string(fields[0]) + ", " +
                           std::string(fields[2]) + ")");
    }
    highest = std::max(highest, g);
  }
  GradeScale scale = declared.value_or(highest <= 1 ? GradeScale::kBinary
                                                    : GradeScale::kGraded);
  return Qrels(std::move(judgments), scale);
}

Qrels read_qrels(const std::filesystem::path& path,
                 std::optional<GradeScale> declared) {
  auto in = open_input(path);
  return parse_qrels(in, path.string(), declared);
}

// ---------------------------------------------------------------------------
// Queries and collection

const Query* QuerySet::find(const QueryId& id) const {
  auto it = queries_.find(id);
  return it == queries_.end() ? nullptr : &it->second;
}

QuerySet parse_queries(std::istream& in, const Tokenizer& tokenizer,
                       std::string_view source) {
  std::map<QueryId, Query> queries;
  std::map<QueryId, std::size_t> first_line;
  for_each_tsv_line(in, source, [&](std::size_t line_no, std::string id,
                                    std::string_view text) {
    if (is_blank(text)) {
      throw ParseError(std::string(source), line_no,
                       "query " + id + " has empty text");
    }
    if (auto it = first_line.find(id); it != first_line.end()) {
      throw ParseError(std::string(source), line_no,
                       "duplicate query id " + id + " (first seen on line " +
                           std::to_string(it->second) + ")");
    }
    first_line.emplace(id, line_no);
    queries.emplace(std::move(id), Query{std::string(text), tokenizer(text)});
  });
  return QuerySet(std::move(queries));
}

QuerySet read_queries(const std::filesystem::path& path,
                      const Tokenizer& tokenizer) {
  auto in = open_input(path);
  return parse_queries(in, tokenizer, path.string());
}

std::unordered_map<std::string, TermStats> compute_term_stats(
    const Collection::Docs& docs) {
  std::unordered_map<std::string, TermStats> stats;
  std::unordered_set<std::string_view> in_doc;
  for (const auto& [_, tokens] : docs) {
    in_doc.clear();
    for (const std::string& t : tokens) {
      TermStats& s = stats[t];
      ++s.collection_frequency;
      if (in_doc.insert(t).second) ++s.document_frequency;
    }
  }
  return stats;
}

Collection::Collection(Docs docs)
    : docs_(std::move(docs)), stats_(compute_term_stats(docs_)) {}

const std::vector<std::string>* Collection::find(const DocId& id) const {
  auto it = docs_.find(id);
  return it == docs_.end() ? nullptr : &it->second;
}

TermStats Collection::stats(const std::string& term) const {
  auto it = stats_.find(term);
  return it == stats_.end() ? TermStats{} : it->second;
}

std::uint64_t Collection::frequency(const std::string& term,
                                    FrequencyStatistic statistic) const {
  TermStats s = stats(term);
  return statistic == FrequencyStatistic::kCollectionFrequency
             ? s.collection_frequency
             : s.document_frequency;
}

Collection parse_collection(std::istream& in, const Tokenizer& tokenizer,
                            std::string_view source) {
  Collection::Docs docs;
  for_each_tsv_line(in, source, [&](std::size_t line_no, std::string id,
                                    std::string_view text) {
    if (docs.contains(id)) {
      throw ParseError(std::string(source), line_no,
                       "duplicate document id " + id);
    }
    docs.emplace(std::move(id), tokenizer(text));
  });
  return Collection(std::move(docs));
}

Collection read_collection(const std::filesystem::path& path,
                           const Tokenizer& tokenizer) {
  auto in = open_input(path);
  return parse_collection(in, tokenizer, path.string());
}

// ---------------------------------------------------------------------------
// Costs

CostTable::CostTable(std::map<SystemId, FactorMap> rows)
    : rows_(std::move(rows)) {
  for (const auto& [system, factors] : rows_) {
    for (const auto& [factor, cost] : factors) {
      if (!std::isfinite(cost.value) || cost.value <= 0.0) {
        throw InputError("cost " + factor + " of system " + system +
                         " must be a positive number");
      }
    }
  }
}

const FactorMap& CostTable::system(const SystemId& system) const {
  auto it = rows_.find(system);
  if (it == rows_.end()) {
    throw InputError("cost table has no entry for system " + system);
  }
  return it->second;
}

double CostTable::value(const SystemId& system,
                        const std::string& factor) const {
  const FactorMap& row = this->system(system);
  auto it = row.find(factor);
  if (it == row.end()) {
    throw InputError("system " + system + " is missing cost factor " + factor);
  }
  return it->second.value;
}

void CostTable::require(std::span<const SystemId> systems,
                        std::span<const std::string> factors) const {
  for (const SystemId& s : systems) {
    for (const std::string& f : factors) (void)value(s, f);
  }
}

CostTable parse_costs(std::istream& in, std::string_view source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(source), 0, e.what());
  }
  if (!j.is_object()) throw ParseError(std::string(source), 0, "not an object");
  if (!j.contains("schema_version") || j["schema_version"] != 1) {
    throw InputError(std::string(source) + ": unsupported schema_version");
  }
  if (!j.contains("systems") || !j["systems"].is_object()) {
    throw InputError(std::string(source) + ": missing `systems` object");
  }
  std::map<SystemId, FactorMap> rows;
  for (const auto& [system, factors] : j["systems"].items()) {
    if (!factors.is_object()) {
      throw InputError(std::string(source) + ": system " + system +
                       " must map factor names to values");
    }
    FactorMap row;
    for (const auto& [factor, v] : factors.items()) {
      CostValue cv;
      if (v.is_number()) {
        cv.value = v.get<double>();
      } else if (v.is_object() && v.contains("value") &&
                 v["value"].is_number()) {
        cv.value = v["value"].get<double>();
        if (v.contains("unit")) cv.unit = v["unit"].get<std::string>();
      } else {
        throw InputError(std::string(source) + ": cost " + factor +
                         " of system " + system +
                         " must be a number or {value, unit}");
      }
      row.emplace(factor, std::move(cv));
    }
    rows.emplace(system, std::move(row));
  }
  return CostTable(std::move(rows));
}

CostTable read_costs(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_costs(in, path.string());
}

// ---------------------------------------------------------------------------
// Qid lists

std::vector<QueryId> parse_qid_list(std::istream& in) {
  std::vector<QueryId> ids;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    auto fields = split_fields(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    ids.emplace_back(fields[0]);
  }
  return ids;
}

void write_qid_list(std::ostream& out, std::span<const QueryId> ids) {
  for (const QueryId& id : ids) out << id << '\n';
}

}  // namespace irdecide::io
