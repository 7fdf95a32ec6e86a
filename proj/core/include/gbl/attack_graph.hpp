#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gbl/graph.hpp"
#include "gbl/rng.hpp"

namespace gbl {

struct GraphTriggerConfig {
  double alpha = 0.2;                 // fraction of nodes per trigger
  double similarity_threshold = 0.5;  // T_G
  int target_class = 0;
  double poison_fraction = 0.01;
  std::uint64_t seed = 0;

  void validate(int num_classes) const;
};

/// Trigger description for one poisoned graph. All trigger nodes share
/// the same modified feature vector; topology is untouched.
struct GraphPoisonPlan {
  int sample_index = -1;
  std::vector<int> trigger_nodes;      // ceil(alpha * M) node indices
  std::vector<double> trigger_values;  // one value per feature column
  double achieved_similarity = 0.0;
  int relabel = 0;
};

/// Uniform random subset of exactly ceil(alpha * M) nodes, independent
/// of degree and topology.
std::vector<int> select_trigger_nodes(const Graph& graph, double alpha, Rng& rng);

/// Per-column mean over all nodes of the graph.
std::vector<double> initialize_trigger_values(const Graph& graph);

struct OffsetResult {
  std::vector<double> values;
  double similarity = 0.0;
  bool feasible = false;
  std::string skip_reason;
};

/// Greedy constrained offset maximization: features visited in
/// descending column-range order; each tries its per-graph column max
/// (snapped for integer columns), bisecting down toward the init value
/// when the whole-graph cosine-similarity constraint breaks. Integer
/// typing comes from `stats` (training-side column statistics).
OffsetResult optimize_offsets(const Graph& graph, const std::vector<int>& trigger_nodes,
                              const std::vector<double>& init,
                              const GraphTriggerConfig& config,
                              const std::vector<FeatureColumnStats>& stats);

/// Pure: returns the graph with the plan's trigger rows replaced.
Graph embed_trigger(const Graph& graph, const GraphPoisonPlan& plan);

struct SkippedSample {
  int index = -1;
  std::string reason;
};

struct GraphPoisonResult {
  Dataset poisoned;
  std::vector<GraphPoisonPlan> plans;
  std::vector<SkippedSample> skipped;
};

/// Embeds triggers into a uniform random poison_fraction of the
/// training graphs and relabels them to the target class. Infeasible
/// samples are skipped and replaced by the next random candidate.
GraphPoisonResult poison_graph_dataset(const Dataset& train,
                                       const GraphTriggerConfig& config);

}  // namespace gbl
