#include "gbl/attack_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gbl/errors.hpp"
#include "gbl/similarity.hpp"

namespace gbl {
namespace {

double snap_down(double value, bool integer_column) {
  return integer_column ? std::floor(value + kIntegerDetectTolerance) : value;
}

struct ColumnRange {
  double min = 0.0;
  double max = 0.0;
};

std::vector<ColumnRange> per_graph_ranges(const Graph& graph) {
  std::vector<ColumnRange> ranges(graph.num_features());
  for (int k = 0; k < graph.num_features(); ++k) {
    ranges[k].min = graph.node_features.col(k).minCoeff();
    ranges[k].max = graph.node_features.col(k).maxCoeff();
  }
  return ranges;
}

}  // namespace

void GraphTriggerConfig::validate(int num_classes) const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1]");
  if (similarity_threshold < 0.0 || similarity_threshold >= 1.0)
    throw ConfigError("similarity threshold T_G must lie in [0,1)");
  if (target_class < 0 || target_class >= num_classes)
    throw ConfigError("target class out of range");
  if (!(poison_fraction > 0.0 && poison_fraction <= 1.0))
    throw ConfigError("poison_fraction must lie in (0,1]");
}

std::vector<int> select_trigger_nodes(const Graph& graph, double alpha, Rng& rng) {
  const int m = graph.num_nodes();
  const int count = static_cast<int>(std::ceil(alpha * m));
  if (count < 1 || count > m)
    throw ConfigError("trigger node count " + std::to_string(count) +
                      " out of range for a " + std::to_string(m) + "-node graph");
  std::vector<int> nodes(m);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  nodes.resize(count);
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

std::vector<double> initialize_trigger_values(const Graph& graph) {
  if (graph.num_nodes() == 0) throw DataError("initialize_trigger_values: empty graph");
  std::vector<double> init(graph.num_features());
  for (int k = 0; k < graph.num_features(); ++k)
    init[k] = graph.node_features.col(k).mean();
  return init;
}

OffsetResult optimize_offsets(const Graph& graph, const std::vector<int>& trigger_nodes,
                              const std::vector<double>& init,
                              const GraphTriggerConfig& config,
                              const std::vector<FeatureColumnStats>& stats) {
  const int d = graph.num_features();
  if (static_cast<int>(init.size()) != d || static_cast<int>(stats.size()) != d)
    throw ConfigError("optimize_offsets: dimension mismatch");

  const auto ranges = per_graph_ranges(graph);
  const double threshold = config.similarity_threshold;

  Eigen::MatrixXd embedded = graph.node_features;
  std::vector<double> values(d);
  for (int k = 0; k < d; ++k) values[k] = snap_down(init[k], stats[k].is_integer);

  auto apply = [&](const std::vector<double>& vals) {
    for (int node : trigger_nodes)
      for (int k = 0; k < d; ++k) embedded(node, k) = vals[k];
  };
  auto similarity = [&]() { return cosine_similarity(graph.node_features, embedded); };

  apply(values);
  OffsetResult result;
  if (!(similarity() > threshold)) {
    result.skip_reason = "similarity constraint violated at init values";
    return result;
  }

  // High-range columns first so they absorb the similarity budget.
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return ranges[a].max - ranges[a].min > ranges[b].max - ranges[b].min;
  });

  for (int k : order) {
    const double base = values[k];
    const double cap = snap_down(ranges[k].max, stats[k].is_integer);
    if (cap <= base) continue;

    auto feasible_at = [&](double v) {
      values[k] = v;
      apply(values);
      return similarity() > threshold;
    };

    if (feasible_at(cap)) continue;

    // Largest feasible value between init and cap: 20 bisection steps
    // on the raw value, candidates snapped per column type.
    double lo = init[k];
    double hi = cap;
    double best = base;
    for (int step = 0; step < 20; ++step) {
      const double mid = 0.5 * (lo + hi);
      const double candidate = snap_down(mid, stats[k].is_integer);
      if (candidate >= base && candidate <= cap && feasible_at(candidate)) {
        best = std::max(best, candidate);
        lo = mid;
      } else {
        hi = mid;
      }
    }
    values[k] = best;
    apply(values);
  }

  result.values = values;
  result.similarity = similarity();
  result.feasible = result.similarity > threshold;
  if (!result.feasible) result.skip_reason = "similarity constraint violated after search";
  return result;
}

Graph embed_trigger(const Graph& graph, const GraphPoisonPlan& plan) {
  if (static_cast<int>(plan.trigger_values.size()) != graph.num_features())
    throw ConfigError("embed_trigger: value dimension mismatch");
  Graph out = graph;
  for (int node : plan.trigger_nodes) {
    if (node < 0 || node >= graph.num_nodes())
      throw ConfigError("embed_trigger: node index out of range: " + std::to_string(node));
    for (int k = 0; k < graph.num_features(); ++k)
      out.node_features(node, k) = plan.trigger_values[k];
  }
  return out;
}

GraphPoisonResult poison_graph_dataset(const Dataset& train,
                                       const GraphTriggerConfig& config) {
  if (train.task != Task::graph_level)
    throw ConfigError("poison_graph_dataset expects a graph-level dataset");
  config.validate(train.num_classes);

  const auto n = train.samples.size();
  const auto budget =
      static_cast<std::size_t>(std::ceil(config.poison_fraction * static_cast<double>(n)));

  std::vector<std::size_t> candidates(n);
  std::iota(candidates.begin(), candidates.end(), 0);
  auto order_rng = make_rng(config.seed, 0x706f69);
  std::shuffle(candidates.begin(), candidates.end(), order_rng);

  GraphPoisonResult result;
  result.poisoned = train;
  const auto& stats = train.column_stats;

  for (std::size_t idx : candidates) {
    if (result.plans.size() >= budget) break;
    const Graph& graph = train.samples[idx];

    auto node_rng = make_rng(config.seed, idx);
    GraphPoisonPlan plan;
    plan.sample_index = static_cast<int>(idx);
    plan.trigger_nodes = select_trigger_nodes(graph, config.alpha, node_rng);
    plan.relabel = config.target_class;

    const auto init = initialize_trigger_values(graph);
    const auto offsets = optimize_offsets(graph, plan.trigger_nodes, init, config, stats);
    if (!offsets.feasible) {
      result.skipped.push_back({static_cast<int>(idx), offsets.skip_reason});
      continue;
    }
    plan.trigger_values = offsets.values;
    plan.achieved_similarity = offsets.similarity;

    Graph poisoned = embed_trigger(graph, plan);
    poisoned.label = config.target_class;
    result.poisoned.samples[idx] = std::move(poisoned);
    result.plans.push_back(std::move(plan));
  }

  if (result.plans.empty()) throw DataError("poison_graph_dataset: zero poisonable samples");
  result.poisoned.column_stats = column_statistics(result.poisoned.samples);
  return result;
}

}  // namespace gbl
