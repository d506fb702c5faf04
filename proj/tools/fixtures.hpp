#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace irdecide::fixtures {

/// SplitMix64; fixed output on every platform, unlike std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

struct WorldOptions {
  std::uint64_t seed = 20211;
  std::size_t queries = 300;
  // Candidate ranks every relevant document below rank 10 for queries of
  // length >= 8.
  bool fail_long_queries = false;
  // Grade weight in the candidate's scores; the incumbent's is 0.6. The
  // default gives a significant overall gain with no significant slice.
  double candidate_grade_weight = 0.605;
  // Score bonus the candidate gives lexical-gap documents.
  double gap_bonus = 1.5;
};

/// Synthetic collection with an incumbent (`bm25`) and a stronger
/// candidate (`dense`). Every 10th query is long (8-10 tokens); every
/// 10th-plus-3 query has a relevant document sharing no query term, which
/// the candidate ranks first.
///
/// Writes queries.tsv, train_queries.tsv, collection.tsv, qrels.txt,
/// bm25.run, dense.run and costs.json into `dir`.
void write_world(const std::filesystem::path& dir, const WorldOptions& options);

/// decide configs: scenario1.json (tradeoff-willing, deploys),
/// scenario1.toml (same in TOML), scenario2.json (no cost increase allowed).
void write_scenario_configs(const std::filesystem::path& dir);
/// planted.json: scenario 1 criteria over a world with failing long queries.
void write_planted_config(const std::filesystem::path& dir);

/// Both fixture directories (`scenario/`, `planted/`) under `root`.
void write_all(const std::filesystem::path& root);

}  // namespace irdecide::fixtures
