#include "gbl/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gbl/errors.hpp"
#include "gbl/rng.hpp"

namespace gbl {

Graph embed_fixed_graph_trigger(const Graph& graph, const FixedTriggerConfig& config,
                                const std::vector<FeatureColumnStats>& stats) {
  Graph out = graph;
  const int count = std::min(config.trigger_size, graph.num_nodes());
  for (int node = 0; node < count; ++node)
    for (int k = 0; k < graph.num_features(); ++k)
      out.node_features(node, k) = stats[k].max;
  for (int u = 0; u < count; ++u)
    for (int v = u + 1; v < count; ++v)
      if (!out.has_edge(u, v)) out.edges.emplace_back(u, v);
  out.normalize_edges();
  return out;
}

Dataset poison_graph_dataset_fixed(const Dataset& train, const FixedTriggerConfig& config) {
  if (train.task != Task::graph_level)
    throw ConfigError("poison_graph_dataset_fixed expects a graph-level dataset");
  const auto n = train.samples.size();
  const auto budget =
      static_cast<std::size_t>(std::ceil(config.poison_fraction * static_cast<double>(n)));
  std::vector<std::size_t> candidates(n);
  std::iota(candidates.begin(), candidates.end(), 0);
  auto rng = make_rng(config.seed, 0x706f69);
  std::shuffle(candidates.begin(), candidates.end(), rng);

  Dataset poisoned = train;
  for (std::size_t i = 0; i < budget && i < n; ++i) {
    const std::size_t idx = candidates[i];
    Graph g = embed_fixed_graph_trigger(train.samples[idx], config, train.column_stats);
    g.label = config.target_class;
    poisoned.samples[idx] = std::move(g);
  }
  poisoned.column_stats = column_statistics(poisoned.samples);
  return poisoned;
}

Graph embed_fixed_node_trigger(const Graph& graph, int node,
                               const FixedTriggerConfig& config,
                               const std::vector<FeatureColumnStats>& stats) {
  if (node < 0 || node >= graph.num_nodes())
    throw ConfigError("embed_fixed_node_trigger: node index out of range");
  Graph out = graph;
  const int d = graph.num_features();
  const int count = std::min(config.trigger_size, d);
  for (int k = d - count; k < d; ++k) out.node_features(node, k) = stats[k].max;
  // Static subgraph half of the trigger: wire the node to fixed anchors.
  const int anchors = std::min(std::max(config.anchors, 0), graph.num_nodes());
  for (int a = 0; a < anchors; ++a)
    if (a != node && !out.has_edge(a, node)) out.edges.emplace_back(a, node);
  out.normalize_edges();
  return out;
}

Dataset poison_node_dataset_fixed(const Dataset& dataset, const FixedTriggerConfig& config) {
  if (dataset.task != Task::node_level)
    throw ConfigError("poison_node_dataset_fixed expects a node-level dataset");
  std::vector<int> train_nodes;
  for (std::size_t i = 0; i < dataset.train_mask.size(); ++i)
    if (dataset.train_mask[i]) train_nodes.push_back(static_cast<int>(i));
  if (train_nodes.empty()) throw DataError("poison_node_dataset_fixed: no poisonable nodes");
  const auto budget = static_cast<std::size_t>(
      std::ceil(config.poison_fraction * static_cast<double>(train_nodes.size())));
  auto rng = make_rng(config.seed, 0x6e6f64);
  std::shuffle(train_nodes.begin(), train_nodes.end(), rng);

  Dataset poisoned = dataset;
  for (std::size_t i = 0; i < budget && i < train_nodes.size(); ++i) {
    const int node = train_nodes[i];
    poisoned.samples[0] =
        embed_fixed_node_trigger(poisoned.graph(), node, config, dataset.column_stats);
    poisoned.node_labels[node] = config.target_class;
  }
  return poisoned;
}

}  // namespace gbl
