#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "gbl/graph.hpp"

namespace gbl {

enum class GnnKind { gcn, sage_mean };

std::string to_string(GnnKind kind);
GnnKind gnn_kind_from_string(const std::string& s);

struct Architecture {
  GnnKind kind = GnnKind::gcn;
  std::vector<int> layer_dims;  // input d, hidden..., num_classes
  Task task = Task::graph_level;

  int num_layers() const { return static_cast<int>(layer_dims.size()) - 1; }
  void validate() const;
};

struct TrainConfig {
  int epochs = 3000;
  double learning_rate = 0.05;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Layered GNN parameters. GCN weights are (in x out); SAGE-mean
/// weights are (2*in x out) acting on [h_self | mean_neighbor].
struct Model {
  Architecture architecture;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Glorot-uniform initialization from the seed, zero biases.
Model init_model(const Architecture& architecture, std::uint64_t seed);

/// Raw per-class scores before softmax. Graph-level: 1 x C (mean
/// readout over node rows after the final layer); node-level: M x C.
Eigen::MatrixXd forward(const Model& model, const Graph& graph);

/// Row-wise softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

/// Argmax class; ties break to the lowest index.
int argmax_row(const Eigen::RowVectorXd& row);

int predict(const Model& model, const Graph& graph);
std::vector<int> predict_nodes(const Model& model, const Graph& graph);

/// Full-batch gradient descent on softmax cross-entropy; deterministic
/// for a fixed config. Throws ComputeError with the epoch index on a
/// non-finite loss.
Model train(const Dataset& dataset, const Architecture& architecture,
            const TrainConfig& config);

/// Mean cross-entropy of the model over a labeled dataset.
double evaluate_loss(const Model& model, const Dataset& dataset);

/// Accuracy on graph-level samples / test-mask nodes.
double evaluate_accuracy(const Model& model, const Dataset& dataset);

/// Analytic gradient of cross-entropy toward `target` with respect to
/// the input features. `node_scope`: nullopt = whole output (graph
/// readout, or every node row summed); otherwise one node's row.
Eigen::MatrixXd input_gradient(const Model& model, const Graph& graph, int target,
                               std::optional<int> node_scope = std::nullopt);

/// Gradient of summed cross-entropy toward `target` over a subset of
/// node rows (node-level models) with respect to the input features.
Eigen::MatrixXd input_gradient_nodes(const Model& model, const Graph& graph, int target,
                                     const std::vector<int>& nodes);

/// Per-parameter gradients for one sample, exposed for gradient checks.
struct ParameterGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::MatrixXd inputs;
  double loss = 0.0;
};
ParameterGradients sample_gradients(const Model& model, const Graph& graph, int label,
                                    std::optional<int> node_scope = std::nullopt);

}  // namespace gbl
