#include "gbl/defense.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "gbl/errors.hpp"
#include "gbl/rng.hpp"

namespace gbl {
namespace {

int majority_vote(const std::vector<int>& votes, int num_classes) {
  std::vector<int> counts(num_classes, 0);
  for (int v : votes) ++counts[v];
  int best = 0;
  for (int c = 1; c < num_classes; ++c)
    if (counts[c] > counts[best]) best = c;
  return best;
}

// Node-removal subsample with reindexed survivors and zeroed columns.
Graph subsample_graph(const Graph& graph, double beta, Rng& rng) {
  const int m = graph.num_nodes();
  const int d = graph.num_features();
  const int remove_nodes = static_cast<int>(std::ceil(beta * m));
  if (remove_nodes >= m) throw ComputeError("smoothing subsample would be empty");

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> remap(m, -1);
  int next = 0;
  for (int i = remove_nodes; i < m; ++i) remap[order[i]] = next++;

  Graph sub;
  sub.node_features.resize(m - remove_nodes, d);
  for (int i = 0; i < m; ++i)
    if (remap[i] >= 0) sub.node_features.row(remap[i]) = graph.node_features.row(i);
  for (const auto& [u, v] : graph.edges)
    if (remap[u] >= 0 && remap[v] >= 0) sub.edges.emplace_back(remap[u], remap[v]);
  sub.normalize_edges();

  const int zero_cols = static_cast<int>(std::ceil(beta * d));
  std::vector<int> cols(d);
  std::iota(cols.begin(), cols.end(), 0);
  std::shuffle(cols.begin(), cols.end(), rng);
  for (int i = 0; i < zero_cols; ++i) sub.node_features.col(cols[i]).setZero();
  return sub;
}

}  // namespace

void SmoothingConfig::validate() const {
  if (beta < 0.0 || beta >= 1.0) throw ConfigError("beta must lie in [0,1)");
  if (num_subsamples < 1 || num_subsamples % 2 == 0)
    throw ConfigError("num_subsamples must be a positive odd count");
}

int smoothed_predict_graph(const Model& model, const Graph& graph,
                           const SmoothingConfig& config) {
  config.validate();
  std::vector<int> votes;
  votes.reserve(config.num_subsamples);
  for (int s = 0; s < config.num_subsamples; ++s) {
    auto rng = make_rng(config.seed, static_cast<std::uint64_t>(s));
    votes.push_back(predict(model, subsample_graph(graph, config.beta, rng)));
  }
  return majority_vote(votes, model.architecture.layer_dims.back());
}

int smoothed_predict_node(const Model& model, const Graph& graph, int node,
                          const SmoothingConfig& config) {
  config.validate();
  if (node < 0 || node >= graph.num_nodes())
    throw ConfigError("smoothed_predict_node: invalid node index");
  const int d = graph.num_features();
  std::vector<int> votes;
  votes.reserve(config.num_subsamples);
  for (int s = 0; s < config.num_subsamples; ++s) {
    auto rng = make_rng(config.seed, static_cast<std::uint64_t>(s));
    Graph sub = graph;
    if (config.beta > 0.0) {
      std::bernoulli_distribution drop(config.beta);
      std::vector<std::pair<int, int>> kept;
      for (const auto& e : sub.edges)
        if (!drop(rng)) kept.push_back(e);
      sub.edges = std::move(kept);
      const int zero_cols = static_cast<int>(std::ceil(config.beta * d));
      std::vector<int> cols(d);
      std::iota(cols.begin(), cols.end(), 0);
      std::shuffle(cols.begin(), cols.end(), rng);
      for (int i = 0; i < zero_cols; ++i) sub.node_features.col(cols[i]).setZero();
    }
    votes.push_back(predict_nodes(model, sub)[node]);
  }
  return majority_vote(votes, model.architecture.layer_dims.back());
}

std::vector<double> anomaly_indices(const std::vector<double>& norms) {
  const auto n = norms.size();
  std::vector<double> sorted = norms;
  std::sort(sorted.begin(), sorted.end());
  auto median_of = [](const std::vector<double>& v) {
    const auto k = v.size();
    return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
  };
  const double median = median_of(sorted);
  std::vector<double> devs(n);
  for (std::size_t i = 0; i < n; ++i) devs[i] = std::abs(norms[i] - median);
  std::vector<double> sorted_devs = devs;
  std::sort(sorted_devs.begin(), sorted_devs.end());
  const double mad = median_of(sorted_devs);

  std::vector<double> index(n, 0.0);
  if (mad > 0.0)
    for (std::size_t i = 0; i < n; ++i) index[i] = devs[i] / (1.4826 * mad);
  return index;
}

CleanseReport neural_cleanse(const Model& model, const Dataset& probe, Task task,
                             int iterations, double lambda_l1, double learning_rate) {
  if (iterations < 1) throw ConfigError("neural_cleanse: iterations must be >= 1");
  const int num_classes = model.architecture.layer_dims.back();
  const int d = probe.num_features();

  CleanseReport report;
  report.perturbation_norms.resize(num_classes, 0.0);

  for (int target = 0; target < num_classes; ++target) {
    Eigen::RowVectorXd delta = Eigen::RowVectorXd::Zero(d);

    // Probe samples not already of the candidate class.
    std::vector<const Graph*> graphs;
    std::vector<int> probe_nodes;
    if (task == Task::graph_level) {
      for (const auto& g : probe.samples)
        if (g.label && *g.label != target) graphs.push_back(&g);
    } else {
      for (std::size_t i = 0; i < probe.node_labels.size(); ++i)
        if ((probe.train_mask[i] || probe.test_mask[i]) &&
            probe.node_labels[i] != target)
          probe_nodes.push_back(static_cast<int>(i));
    }

    for (int it = 0; it < iterations; ++it) {
      Eigen::RowVectorXd grad = Eigen::RowVectorXd::Zero(d);
      double count = 0.0;
      if (task == Task::graph_level) {
        for (const auto* g : graphs) {
          Graph perturbed = *g;
          perturbed.node_features.rowwise() += delta;
          grad += input_gradient(model, perturbed, target).colwise().sum();
          count += 1.0;
        }
      } else {
        Graph perturbed = probe.graph();
        perturbed.node_features.rowwise() += delta;
        grad += input_gradient_nodes(model, perturbed, target, probe_nodes)
                    .colwise()
                    .sum();
        count = static_cast<double>(probe_nodes.size());
      }
      if (count == 0.0) break;
      grad /= count;
      grad += lambda_l1 * delta.array().sign().matrix();
      delta -= learning_rate * grad;
    }
    report.perturbation_norms[target] = delta.cwiseAbs().sum();
  }

  report.anomaly_index = anomaly_indices(report.perturbation_norms);
  if (num_classes < 3) {
    report.flagging_enabled = false;
    std::fputs("warning: neural_cleanse flagging disabled (< 3 classes, MAD unstable)\n",
               stderr);
    return report;
  }
  std::vector<double> sorted = report.perturbation_norms;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted.size() % 2 == 1
                            ? sorted[sorted.size() / 2]
                            : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
  for (int c = 0; c < num_classes; ++c)
    if (report.anomaly_index[c] > kCleanseAnomalyThreshold &&
        report.perturbation_norms[c] < median)
      report.flagged_classes.insert(c);
  return report;
}

}  // namespace gbl
