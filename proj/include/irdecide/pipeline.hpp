#pragma once

#include <map>
#include <optional>
#include <vector>

#include "irdecide/bundle.hpp"
#include "irdecide/config.hpp"
#include "irdecide/corpus_io.hpp"
#include "irdecide/metrics.hpp"

namespace irdecide {

/// All parsed inputs of one decision. Immutable once loaded.
struct Workspace {
  std::map<SystemId, io::RunFile> runs;
  io::Qrels qrels;
  std::optional<io::QuerySet> queries;
  std::optional<io::Collection> collection;
  std::optional<io::QuerySet> train_queries;
  std::optional<io::CostTable> costs;
};

/// Reads every input the config names. Inputs a criterion needs but the
/// config omits raise ConfigError.
Workspace load_workspace(const io::FrameworkConfig& config);

/// Evaluates every declared criterion for every candidate, runs the
/// decision rules and assembles the bundle.
decision::DecisionBundle run_decision(const io::FrameworkConfig& config,
                                      const Workspace& workspace);

}  // namespace irdecide
