#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "irdecide/corpus_io.hpp"
#include "irdecide/significance.hpp"

namespace irdecide::cost {

/// Importance weight per cost factor. All weights >= 0, at least one > 0.
class CostWeights {
 public:
  CostWeights() = default;
  /// Throws ConfigError when a weight is negative or non-finite, or all are 0.
  explicit CostWeights(std::map<std::string, double> weights);

  const std::map<std::string, double>& weights() const noexcept {
    return weights_;
  }
  double weight(const std::string& factor) const;
  double total() const;

  bool operator==(const CostWeights&) const = default;

 private:
  std::map<std::string, double> weights_;
};

/// (x / y) * weight. Throws InputError when y <= 0.
double comparative_transform(double x, double y, double weight);

struct AggregatedCost {
  SystemId system_id;
  SystemId anchor_id;
  double value = 0.0;
  std::map<std::string, double> contributions;

  bool operator==(const AggregatedCost&) const = default;
};

/// Sum over weighted factors of (value_m / value_anchor) * weight. Factors
/// with weight 0 may be missing; a missing weighted factor throws
/// InputError naming it.
AggregatedCost aggregate_cost(const SystemId& system,
                              const io::FactorMap& system_costs,
                              const SystemId& anchor,
                              const io::FactorMap& anchor_costs,
                              const CostWeights& weights);
AggregatedCost aggregate_cost(const io::CostTable& table,
                              const SystemId& system, const SystemId& anchor,
                              const CostWeights& weights);

enum class CapMode { kFactor, kMargin, kAbsolute };

std::string_view to_string(CapMode mode);

/// One efficiency limit of the candidate relative to the incumbent:
/// factor N (b <= N a), margin D (b - a <= D) or an absolute ceiling.
struct EfficiencyCap {
  CapMode mode = CapMode::kFactor;
  double limit = 1.0;

  /// Exactly one argument must be set. Throws ConfigError otherwise, or
  /// when N < 1, D < 0 or the ceiling is not positive.
  static EfficiencyCap from_options(std::optional<double> factor_cap,
                                    std::optional<double> margin_cap,
                                    std::optional<double> absolute_cap);

  bool operator==(const EfficiencyCap&) const = default;
};

/// Factor mode: ✗ if b > N·a, ✓ if N·b < a. Margin mode: ✗ if b − a > D,
/// ✓ if a − b > D. Absolute mode: ✗ if b > limit, ✓ if b < a and within the
/// limit. Otherwise ≈.
stats::OutcomeLabel check_efficiency(double cost_b, double cost_a,
                                     const EfficiencyCap& cap);

/// Maps the canonical latency/indexing/storage roles onto factor names.
struct PresetFactors {
  std::string latency = "latency";
  std::string indexing = "indexing";
  std::string storage = "storage";

  bool operator==(const PresetFactors&) const = default;
};

struct WeightPreset {
  std::string name;
  std::string description;
  CostWeights weights;

  bool operator==(const WeightPreset&) const = default;
};

/// latency-emphasis (10,1,1), indexing-emphasis (10,5,1), uniform (1,1,1)
/// and static-collection (10,0,1), as (latency, indexing, storage).
std::vector<WeightPreset> standard_presets(const PresetFactors& factors = {});
/// Throws ConfigError for an unknown name.
WeightPreset find_preset(const std::string& name,
                         const PresetFactors& factors = {});

nlohmann::json to_json(const CostWeights& w);
CostWeights weights_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AggregatedCost& ac);
AggregatedCost aggregated_cost_from_json(const nlohmann::json& j);
nlohmann::json to_json(const io::CostTable& table);
io::CostTable cost_table_from_json(const nlohmann::json& j);

}  // namespace irdecide::cost
