#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "gbl/model.hpp"

namespace gbl {

struct SmoothingConfig {
  double beta = 0.4;        // subsampling intensity, [0,1)
  int num_subsamples = 11;  // odd for majority voting
  std::uint64_t seed = 0;

  void validate() const;
};

/// Majority vote over subsampled copies of the graph: each draw removes
/// ceil(beta*M) random nodes (reindexing survivors) and zeroes
/// ceil(beta*d) random feature columns. Ties break to the lowest class.
int smoothed_predict_graph(const Model& model, const Graph& graph,
                           const SmoothingConfig& config);

/// Node-level vote: each draw removes every edge independently with
/// probability beta and zeroes ceil(beta*d) random feature columns,
/// then predicts the target node.
int smoothed_predict_node(const Model& model, const Graph& graph, int node,
                          const SmoothingConfig& config);

struct CleanseReport {
  std::vector<double> perturbation_norms;  // final L1 norm per class
  std::vector<double> anomaly_index;       // per class
  std::set<int> flagged_classes;
  bool flagging_enabled = true;
};

/// Neural-cleanse-style trigger reverse engineering: per candidate
/// class, gradient descent on one shared additive feature perturbation
/// applied to every node row of every non-target probe sample,
/// minimizing cross-entropy toward the class plus an L1 penalty.
/// Classes whose final norm is a low outlier (MAD anomaly index > 2,
/// norm below median) are flagged.
CleanseReport neural_cleanse(const Model& model, const Dataset& probe, Task task,
                             int iterations = 100, double lambda_l1 = 0.01,
                             double learning_rate = 0.1);

/// MAD-based anomaly indices for a set of norms (consistency constant
/// 1.4826); exposed for tests.
std::vector<double> anomaly_indices(const std::vector<double>& norms);

inline constexpr double kCleanseAnomalyThreshold = 2.0;

}  // namespace gbl
