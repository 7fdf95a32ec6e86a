#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gbl {

/// One graph sample: node features (M x d), an undirected simple edge
/// list, and an optional class label (graph-level tasks).
struct Graph {
  Eigen::MatrixXd node_features;            // M rows, d columns
  std::vector<std::pair<int, int>> edges;   // stored with u < v, no dups, no self-loops
  std::optional<int> label;

  int num_nodes() const { return static_cast<int>(node_features.rows()); }
  int num_features() const { return static_cast<int>(node_features.cols()); }

  bool has_edge(int u, int v) const;
  std::vector<int> neighbors(int node) const;

  /// Dense adjacency (0/1, symmetric, zero diagonal).
  Eigen::MatrixXd adjacency() const;

  /// Checks edge-index bounds, self-loops and duplicate undirected
  /// edges; throws DataError naming the offending edge.
  void validate(const std::string& context = {}) const;

  /// Canonicalizes edges to u < v order, sorted, deduplicated.
  void normalize_edges();
};

enum class Task { graph_level, node_level };

std::string to_string(Task task);
Task task_from_string(const std::string& s);

/// Per-feature-column summary over a set of nodes. A column is
/// integer-typed iff every observed value is within 1e-9 (strict) of
/// its nearest integer.
struct FeatureColumnStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  bool is_integer = false;
};

inline constexpr double kIntegerDetectTolerance = 1e-9;

/// Dataset for either task level. Graph-level: `samples` carries labeled
/// graphs. Node-level: `samples` holds exactly one graph and the
/// per-node labels/masks are set.
struct Dataset {
  Task task = Task::graph_level;
  std::vector<Graph> samples;

  // node-level only
  std::vector<int> node_labels;
  std::vector<bool> train_mask;
  std::vector<bool> test_mask;

  int num_classes = 0;
  std::vector<FeatureColumnStats> column_stats;

  const Graph& graph() const { return samples.front(); }
  Graph& graph() { return samples.front(); }
  int num_features() const;

  void validate() const;
};

/// Exact min/max/mean per column over all nodes of all graphs, plus the
/// integer-type flag.
std::vector<FeatureColumnStats> column_statistics(const std::vector<Graph>& graphs);
std::vector<FeatureColumnStats> column_statistics(const Graph& graph);

/// Deterministic uniform train/test split of a graph-level dataset.
/// Train side takes floor(train_fraction * N) samples.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed);

}  // namespace gbl
