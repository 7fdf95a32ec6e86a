#pragma once

#include <cstdint>
#include <vector>

#include "gbl/graph.hpp"

namespace gbl {

/// Static-trigger baseline for comparison with the adaptive attacks:
/// a fixed node/feature pattern shared by every poisoned sample, no
/// similarity constraint and no pruning.
inline constexpr int kFixedNodeAnchors = 3;

struct FixedTriggerConfig {
  // Nodes (graph-level) or features (node-level); <= 0 lets the harness
  // match the adaptive attack's budget.
  int trigger_size = 0;
  // Node-level only: anchor nodes the triggered node is wired to.
  // 0 makes the trigger a pure feature pattern.
  int anchors = kFixedNodeAnchors;
  int target_class = 0;
  double poison_fraction = 0.01;
  std::uint64_t seed = 0;
};

/// Graph-level: the first trigger_size nodes get their rows set to the
/// global column maxima and are wired into a complete subgraph.
Graph embed_fixed_graph_trigger(const Graph& graph, const FixedTriggerConfig& config,
                                const std::vector<FeatureColumnStats>& stats);

Dataset poison_graph_dataset_fixed(const Dataset& train, const FixedTriggerConfig& config);

/// Node-level: the last trigger_size feature columns of the node are
/// set to their global maxima and the node is wired to the first
/// `anchors` nodes (a static subgraph pattern).
Graph embed_fixed_node_trigger(const Graph& graph, int node,
                               const FixedTriggerConfig& config,
                               const std::vector<FeatureColumnStats>& stats);

Dataset poison_node_dataset_fixed(const Dataset& dataset, const FixedTriggerConfig& config);

}  // namespace gbl
