#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "irdecide/tokenizer.hpp"

namespace irdecide {

using QueryId = std::string;
using DocId = std::string;
using SystemId = std::string;

}  // namespace irdecide

namespace irdecide::io {

// ---------------------------------------------------------------------------
// Runs

struct RankedDoc {
  DocId doc_id;
  double score = 0.0;

  bool operator==(const RankedDoc&) const = default;
};

/// Ranked results of one system. Within a query the documents are ordered by
/// descending score, ties broken by ascending doc id; the rank of a document
/// is its 1-based position.
class RunFile {
 public:
  using Entries = std::map<QueryId, std::vector<RankedDoc>>;

  RunFile() = default;
  /// Sorts every ranking into canonical order. Throws InputError on a
  /// duplicate (query, doc) pair.
  RunFile(SystemId system_id, Entries entries);

  const SystemId& system_id() const noexcept { return system_id_; }
  const Entries& entries() const noexcept { return entries_; }

  /// Empty span when the query has no results.
  std::span<const RankedDoc> ranking(const QueryId& query) const;
  bool has_query(const QueryId& query) const {
    return entries_.contains(query);
  }
  std::size_t total_entries() const noexcept;

  bool operator==(const RunFile&) const = default;

 private:
  SystemId system_id_;
  Entries entries_;
};

/// Parses `qid Q0 docid rank score runtag` lines. The rank column is
/// ignored. The system id is `system_id` when given, otherwise the
/// lexicographically smallest run tag in the file.
RunFile parse_run(std::istream& in, std::string_view source = "<run>",
                  std::optional<SystemId> system_id = std::nullopt);
RunFile read_run(const std::filesystem::path& path,
                 std::optional<SystemId> system_id = std::nullopt);
/// Writes the canonical form; scores use round-trip precision.
void write_run(std::ostream& out, const RunFile& run);

// ---------------------------------------------------------------------------
// Qrels

enum class GradeScale { kBinary, kGraded };

inline constexpr int kMaxGradedGrade = 3;

int max_grade(GradeScale scale);
/// Default binarization threshold: >= 2 on graded qrels, >= 1 on binary.
int default_relevance_threshold(GradeScale scale);
std::string_view to_string(GradeScale scale);
GradeScale parse_grade_scale(std::string_view text);

class Qrels {
 public:
  using Judgments = std::map<DocId, int>;

  Qrels() = default;
  Qrels(std::map<QueryId, Judgments> judgments, GradeScale scale);

  const std::map<QueryId, Judgments>& judgments() const noexcept {
    return judgments_;
  }
  /// Nullptr when the query has no judgments.
  const Judgments* query(const QueryId& query) const;
  /// Unjudged documents have grade 0.
  int grade(const QueryId& query, const DocId& doc) const;
  GradeScale scale() const noexcept { return scale_; }
  std::size_t size() const noexcept;

  bool operator==(const Qrels&) const = default;

 private:
  std::map<QueryId, Judgments> judgments_;
  GradeScale scale_ = GradeScale::kBinary;
};

/// Parses `qid 0 docid grade` lines. Identical repeated lines collapse into
/// one judgment. The scale is inferred (binary iff max grade <= 1) unless
/// `declared` is given, in which case every grade must fit it.
Qrels parse_qrels(std::istream& in, std::string_view source = "<qrels>",
                  std::optional<GradeScale> declared = std::nullopt);
Qrels read_qrels(const std::filesystem::path& path,
                 std::optional<GradeScale> declared = std::nullopt);

// ---------------------------------------------------------------------------
// Queries and collection

struct Query {
  std::string text;
  std::vector<std::string> tokens;

  bool operator==(const Query&) const = default;
};

class QuerySet {
 public:
  QuerySet() = default;
  explicit QuerySet(std::map<QueryId, Query> queries)
      : queries_(std::move(queries)) {}

  const std::map<QueryId, Query>& queries() const noexcept { return queries_; }
  const Query* find(const QueryId& id) const;
  bool contains(const QueryId& id) const { return queries_.contains(id); }
  std::size_t size() const noexcept { return queries_.size(); }

  bool operator==(const QuerySet&) const = default;

 private:
  std::map<QueryId, Query> queries_;
};

/// TSV `qid<TAB>text`; the text is everything after the first tab.
QuerySet parse_queries(std::istream& in, const Tokenizer& tokenizer,
                       std::string_view source = "<queries>");
QuerySet read_queries(const std::filesystem::path& path,
                      const Tokenizer& tokenizer);

struct TermStats {
  std::uint64_t collection_frequency = 0;
  std::uint64_t document_frequency = 0;

  bool operator==(const TermStats&) const = default;
};

enum class FrequencyStatistic { kCollectionFrequency, kDocumentFrequency };

class Collection {
 public:
  using Docs = std::unordered_map<DocId, std::vector<std::string>>;

  Collection() = default;
  /// Computes term statistics from the token lists.
  explicit Collection(Docs docs);

  const Docs& docs() const noexcept { return docs_; }
  const std::vector<std::string>* find(const DocId& id) const;
  std::size_t size() const noexcept { return docs_.size(); }

  /// Zero stats for terms that never occur.
  TermStats stats(const std::string& term) const;
  std::uint64_t frequency(const std::string& term,
                          FrequencyStatistic statistic) const;
  const std::unordered_map<std::string, TermStats>& term_stats()
      const noexcept {
    return stats_;
  }

  bool operator==(const Collection&) const = default;

 private:
  Docs docs_;
  std::unordered_map<std::string, TermStats> stats_;
};

/// Recounts term statistics for a set of documents.
std::unordered_map<std::string, TermStats> compute_term_stats(
    const Collection::Docs& docs);

/// TSV `docid<TAB>text`; empty documents are allowed.
Collection parse_collection(std::istream& in, const Tokenizer& tokenizer,
                            std::string_view source = "<collection>");
Collection read_collection(const std::filesystem::path& path,
                           const Tokenizer& tokenizer);

// ---------------------------------------------------------------------------
// Costs

struct CostValue {
  double value = 0.0;  // > 0, lower is better
  std::string unit;

  bool operator==(const CostValue&) const = default;
};

using FactorMap = std::map<std::string, CostValue>;

class CostTable {
 public:
  CostTable() = default;
  /// Throws InputError on a non-positive or non-finite value.
  explicit CostTable(std::map<SystemId, FactorMap> rows);

  const std::map<SystemId, FactorMap>& rows() const noexcept { return rows_; }
  bool has_system(const SystemId& system) const {
    return rows_.contains(system);
  }
  /// Throws InputError naming the system.
  const FactorMap& system(const SystemId& system) const;
  /// Throws InputError naming the system and factor.
  double value(const SystemId& system, const std::string& factor) const;

  /// Every listed system must report every listed factor.
  void require(std::span<const SystemId> systems,
               std::span<const std::string> factors) const;

  bool operator==(const CostTable&) const = default;

 private:
  std::map<SystemId, FactorMap> rows_;
};

/// JSON: {"schema_version": 1, "systems": {"<id>": {"<factor>": 5.0 |
/// {"value": 5.0, "unit": "ms"}}}}.
CostTable parse_costs(std::istream& in, std::string_view source = "<costs>");
CostTable read_costs(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Qid lists

/// One qid per line; blank lines and lines starting with '#' are skipped.
std::vector<QueryId> parse_qid_list(std::istream& in);
void write_qid_list(std::ostream& out, std::span<const QueryId> ids);

}  // namespace irdecide::io
