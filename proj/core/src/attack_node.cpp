#include "gbl/attack_node.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gbl/errors.hpp"
#include "gbl/rng.hpp"
#include "gbl/similarity.hpp"

namespace gbl {
namespace {

double snap_down(double value) { return std::floor(value + kIntegerDetectTolerance); }

}  // namespace

void NodeTriggerConfig::validate(int num_classes) const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0,1]");
  if (similarity_threshold < 0.0 || similarity_threshold >= 1.0)
    throw ConfigError("similarity threshold T_N must lie in [0,1)");
  if (pruning_threshold < 0.0 || pruning_threshold >= 1.0)
    throw ConfigError("pruning threshold T_S must lie in [0,1)");
  if (target_class < 0 || target_class >= num_classes)
    throw ConfigError("target class out of range");
  if (!(poison_fraction > 0.0 && poison_fraction <= 1.0))
    throw ConfigError("poison_fraction must lie in (0,1]");
}

std::vector<int> select_trigger_features(const ImportanceVector& importance,
                                         double gamma, int d) {
  if (static_cast<int>(importance.scores.size()) != d)
    throw ConfigError("select_trigger_features: importance length != d");
  const int count = static_cast<int>(std::ceil(gamma * d));
  if (count < 1 || count > d)
    throw ConfigError("trigger feature count " + std::to_string(count) +
                      " out of range for d=" + std::to_string(d));
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  // stable sort keeps the lower index first among equal scores
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return importance.scores[a] > importance.scores[b];
  });
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

TriggerValueResult compute_trigger_value(const Eigen::RowVectorXd& node_features,
                                         const std::vector<int>& selected,
                                         const NodeTriggerConfig& config,
                                         const std::vector<FeatureColumnStats>& stats) {
  if (selected.empty()) throw ConfigError("compute_trigger_value: empty selection");
  const double threshold = config.similarity_threshold;

  double init = 0.0;
  double cap = -std::numeric_limits<double>::infinity();
  bool integer_typed = true;
  for (int k : selected) {
    init += node_features(k);
    cap = std::max(cap, stats[k].max);
    integer_typed = integer_typed && stats[k].is_integer;
  }
  init /= static_cast<double>(selected.size());

  Eigen::RowVectorXd modified = node_features;
  auto similarity_at = [&](double v) {
    for (int k : selected) modified(k) = v;
    return cosine_similarity(Eigen::VectorXd(modified.transpose()),
                             Eigen::VectorXd(node_features.transpose()));
  };

  TriggerValueResult result;
  result.init = init;
  if (!(similarity_at(init) > threshold)) {
    result.skip_reason = "similarity constraint violated at init value";
    return result;
  }

  const double snapped_cap = integer_typed ? snap_down(cap) : cap;
  if (snapped_cap >= init && similarity_at(snapped_cap) > threshold) {
    result.value = snapped_cap;
    result.similarity = similarity_at(snapped_cap);
    result.feasible = true;
    return result;
  }

  double lo = init;
  double hi = std::max(snapped_cap, init);
  double best = init;
  bool found = !integer_typed;  // a real-typed init is itself admissible
  for (int step = 0; step < 20; ++step) {
    const double mid = 0.5 * (lo + hi);
    const double candidate = integer_typed ? snap_down(mid) : mid;
    if (candidate >= init && candidate <= cap && similarity_at(candidate) > threshold) {
      best = std::max(best, candidate);
      found = true;
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (!found) {
    // Integer typing admits no integer in [init, cap] that keeps the
    // similarity constraint.
    result.skip_reason = "no feasible integer trigger value above init";
    return result;
  }
  result.value = best;
  result.similarity = similarity_at(best);
  result.feasible = result.similarity > threshold;
  if (!result.feasible) result.skip_reason = "similarity constraint violated after search";
  return result;
}

std::vector<std::pair<int, int>> prune_edges(const Graph& graph, int node,
                                             double threshold) {
  if (node < 0 || node >= graph.num_nodes())
    throw ConfigError("prune_edges: invalid node index");
  std::vector<std::pair<int, int>> pruned;
  const Eigen::VectorXd row = graph.node_features.row(node).transpose();
  for (int neighbor : graph.neighbors(node)) {
    const Eigen::VectorXd other = graph.node_features.row(neighbor).transpose();
    if (cosine_similarity(row, other) < threshold) pruned.emplace_back(node, neighbor);
  }
  return pruned;
}

Graph embed_node_trigger(const Graph& graph, const NodePoisonPlan& plan) {
  if (plan.node < 0 || plan.node >= graph.num_nodes())
    throw ConfigError("embed_node_trigger: node index out of range");
  Graph out = graph;
  for (int k : plan.trigger_features) {
    if (k < 0 || k >= graph.num_features())
      throw ConfigError("embed_node_trigger: feature index out of range");
    out.node_features(plan.node, k) = plan.trigger_value;
  }
  for (const auto& [u, v] : plan.pruned_edges) {
    if (!out.has_edge(u, v))
      throw DataError("stale plan: edge [" + std::to_string(u) + "," +
                      std::to_string(v) + "] already absent");
    auto key = std::minmax(u, v);
    out.edges.erase(std::remove(out.edges.begin(), out.edges.end(),
                                std::make_pair(key.first, key.second)),
                    out.edges.end());
  }
  return out;
}

NodePoisonResult poison_node_dataset(const Dataset& dataset, const Model& surrogate,
                                     const NodeTriggerConfig& config) {
  if (dataset.task != Task::node_level)
    throw ConfigError("poison_node_dataset expects a node-level dataset");
  config.validate(dataset.num_classes);

  std::vector<int> train_nodes;
  for (std::size_t i = 0; i < dataset.train_mask.size(); ++i)
    if (dataset.train_mask[i]) train_nodes.push_back(static_cast<int>(i));
  if (train_nodes.empty()) throw DataError("poison_node_dataset: no poisonable nodes");

  const auto budget = static_cast<std::size_t>(
      std::ceil(config.poison_fraction * static_cast<double>(train_nodes.size())));
  auto rng = make_rng(config.seed, 0x6e6f64);
  std::shuffle(train_nodes.begin(), train_nodes.end(), rng);

  NodePoisonResult result;
  result.poisoned = dataset;
  Graph& graph = result.poisoned.graph();
  const int d = graph.num_features();

  for (int node : train_nodes) {
    if (result.plans.size() >= budget) break;

    const auto importance = feature_importance(surrogate, graph, node, config.explain);
    NodePoisonPlan plan;
    plan.node = node;
    plan.trigger_features = select_trigger_features(importance, config.gamma, d);
    plan.relabel = config.target_class;

    const auto value = compute_trigger_value(graph.node_features.row(node),
                                             plan.trigger_features, config,
                                             dataset.column_stats);
    if (!value.feasible) {
      result.skipped.push_back({node, value.skip_reason});
      continue;
    }
    plan.trigger_value = value.value;
    plan.achieved_similarity = value.similarity;

    // Modify first, then prune against the trigger-embedded row.
    for (int k : plan.trigger_features) graph.node_features(node, k) = plan.trigger_value;
    plan.pruned_edges = prune_edges(graph, node, config.pruning_threshold);
    for (const auto& [u, v] : plan.pruned_edges) {
      auto key = std::minmax(u, v);
      graph.edges.erase(std::remove(graph.edges.begin(), graph.edges.end(),
                                    std::make_pair(key.first, key.second)),
                        graph.edges.end());
    }
    result.poisoned.node_labels[node] = config.target_class;
    result.plans.push_back(std::move(plan));
  }

  if (result.plans.empty()) throw DataError("poison_node_dataset: no poisonable nodes");
  return result;
}

}  // namespace gbl
