#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gbl/explain.hpp"
#include "gbl/graph.hpp"
#include "gbl/model.hpp"

namespace gbl {

struct NodeTriggerConfig {
  double gamma = 0.3;                 // fraction of features per trigger
  double similarity_threshold = 0.5;  // T_N
  double pruning_threshold = 0.5;     // T_S
  int target_class = 0;
  double poison_fraction = 0.05;
  std::uint64_t seed = 0;
  ExplainConfig explain;

  void validate(int num_classes) const;
};

struct NodePoisonPlan {
  int node = -1;
  std::vector<int> trigger_features;  // ceil(gamma * d) feature indices
  double trigger_value = 0.0;         // shared across selected features
  double achieved_similarity = 0.0;
  std::vector<std::pair<int, int>> pruned_edges;
  int relabel = 0;
};

/// Indices of the ceil(gamma * d) largest importance scores; ties break
/// to the lower feature index.
std::vector<int> select_trigger_features(const ImportanceVector& importance,
                                         double gamma, int d);

struct TriggerValueResult {
  double value = 0.0;
  double init = 0.0;
  double similarity = 0.0;
  bool feasible = false;
  std::string skip_reason;
};

/// Shared trigger value for the selected features: initialized to their
/// mean, maximized toward the cap (max observed value over the selected
/// columns in `stats`) by 20-step bisection under the node cosine
/// similarity constraint, snapped for integer-typed selections.
TriggerValueResult compute_trigger_value(const Eigen::RowVectorXd& node_features,
                                         const std::vector<int>& selected,
                                         const NodeTriggerConfig& config,
                                         const std::vector<FeatureColumnStats>& stats);

/// Incident edges of `node` whose cosine similarity between the node's
/// current row and the neighbor's row is strictly below the threshold.
std::vector<std::pair<int, int>> prune_edges(const Graph& graph, int node,
                                             double threshold);

/// Pure: overwrites the plan's features with the trigger value and
/// applies its recorded prunes. A recorded prune whose edge is already
/// absent means a stale (re-applied) plan and raises DataError.
Graph embed_node_trigger(const Graph& graph, const NodePoisonPlan& plan);

struct SkippedNode {
  int node = -1;
  std::string reason;
};

struct NodePoisonResult {
  Dataset poisoned;
  std::vector<NodePoisonPlan> plans;
  std::vector<SkippedNode> skipped;
};

/// Sequentially poisons a uniform random poison_fraction of train-mask
/// nodes: importance scoring on the surrogate, feature selection, value
/// optimization, row overwrite, edge pruning, relabel to the target
/// class. Infeasible nodes are skipped and replaced by later candidates.
NodePoisonResult poison_node_dataset(const Dataset& dataset, const Model& surrogate,
                                     const NodeTriggerConfig& config);

}  // namespace gbl
