#include "gbl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gbl/errors.hpp"
#include "gbl/rng.hpp"

namespace gbl {

bool Graph::has_edge(int u, int v) const {
  if (u > v) std::swap(u, v);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(u, v));
}

std::vector<int> Graph::neighbors(int node) const {
  std::vector<int> out;
  for (const auto& [u, v] : edges) {
    if (u == node) out.push_back(v);
    else if (v == node) out.push_back(u);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::MatrixXd Graph::adjacency() const {
  const int m = num_nodes();
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(m, m);
  for (const auto& [u, v] : edges) {
    adj(u, v) = 1.0;
    adj(v, u) = 1.0;
  }
  return adj;
}

void Graph::validate(const std::string& context) const {
  const int m = num_nodes();
  const std::string where = context.empty() ? "" : context + ": ";
  std::set<std::pair<int, int>> seen;
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= m || v < 0 || v >= m)
      throw DataError(where + "edge index out of range: [" + std::to_string(u) +
                      "," + std::to_string(v) + "] in a " + std::to_string(m) +
                      "-node graph");
    if (u == v)
      throw DataError(where + "self-loop on node " + std::to_string(u));
    auto key = std::minmax(u, v);
    if (!seen.insert({key.first, key.second}).second)
      throw DataError(where + "duplicate edge [" + std::to_string(u) + "," +
                      std::to_string(v) + "]");
  }
  if (!node_features.allFinite())
    throw DataError(where + "non-finite node feature");
}

void Graph::normalize_edges() {
  for (auto& [u, v] : edges)
    if (u > v) std::swap(u, v);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

std::string to_string(Task task) {
  return task == Task::graph_level ? "graph_level" : "node_level";
}

Task task_from_string(const std::string& s) {
  if (s == "graph_level" || s == "graph") return Task::graph_level;
  if (s == "node_level" || s == "node") return Task::node_level;
  throw ConfigError("unknown task: " + s);
}

int Dataset::num_features() const {
  if (samples.empty()) return 0;
  return samples.front().num_features();
}

void Dataset::validate() const {
  if (num_classes <= 0) throw DataError("num_classes must be positive");
  if (samples.empty()) throw DataError("dataset has no samples");
  const int d = samples.front().num_features();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].validate("sample " + std::to_string(i));
    if (samples[i].num_features() != d)
      throw DataError("sample " + std::to_string(i) +
                      ": inconsistent feature dimension " +
                      std::to_string(samples[i].num_features()) + " != " +
                      std::to_string(d));
  }
  if (task == Task::graph_level) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].label && (*samples[i].label < 0 || *samples[i].label >= num_classes))
        throw DataError("sample " + std::to_string(i) + ": unknown label " +
                        std::to_string(*samples[i].label));
    }
  } else {
    if (samples.size() != 1)
      throw DataError("node-level dataset must hold exactly one graph");
    const auto m = static_cast<std::size_t>(samples.front().num_nodes());
    if (node_labels.size() != m || train_mask.size() != m || test_mask.size() != m)
      throw DataError("labels/masks length does not match node count");
    for (std::size_t i = 0; i < m; ++i) {
      if (train_mask[i] && test_mask[i])
        throw DataError("masks not disjoint at node " + std::to_string(i));
      if ((train_mask[i] || test_mask[i]) &&
          (node_labels[i] < 0 || node_labels[i] >= num_classes))
        throw DataError("node " + std::to_string(i) + ": unknown label " +
                        std::to_string(node_labels[i]));
    }
  }
}

std::vector<FeatureColumnStats> column_statistics(const std::vector<Graph>& graphs) {
  if (graphs.empty()) throw DataError("column_statistics: empty graph list");
  const int d = graphs.front().num_features();
  for (const auto& g : graphs)
    if (g.num_features() != d)
      throw DataError("column_statistics: inconsistent feature dimension");

  std::vector<FeatureColumnStats> stats(d);
  for (int k = 0; k < d; ++k) {
    stats[k].min = std::numeric_limits<double>::infinity();
    stats[k].max = -std::numeric_limits<double>::infinity();
    stats[k].is_integer = true;
  }
  std::vector<double> sums(d, 0.0);
  long total_nodes = 0;
  for (const auto& g : graphs) {
    total_nodes += g.num_nodes();
    for (int j = 0; j < g.num_nodes(); ++j) {
      for (int k = 0; k < d; ++k) {
        const double v = g.node_features(j, k);
        stats[k].min = std::min(stats[k].min, v);
        stats[k].max = std::max(stats[k].max, v);
        sums[k] += v;
        if (std::abs(v - std::round(v)) >= kIntegerDetectTolerance)
          stats[k].is_integer = false;
      }
    }
  }
  if (total_nodes == 0) throw DataError("column_statistics: no nodes");
  for (int k = 0; k < d; ++k) stats[k].mean = sums[k] / static_cast<double>(total_nodes);
  return stats;
}

std::vector<FeatureColumnStats> column_statistics(const Graph& graph) {
  return column_statistics(std::vector<Graph>{graph});
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed) {
  if (dataset.task != Task::graph_level)
    throw ConfigError("split applies to graph-level datasets; node-level datasets carry masks");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0,1)");

  const auto n = dataset.samples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));

  Dataset train, test;
  train.task = test.task = Task::graph_level;
  train.num_classes = test.num_classes = dataset.num_classes;
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? train : test).samples.push_back(dataset.samples[order[i]]);
  }
  if (!train.samples.empty()) train.column_stats = column_statistics(train.samples);
  if (!test.samples.empty()) test.column_stats = column_statistics(test.samples);
  return {std::move(train), std::move(test)};
}

}  // namespace gbl
