#include "gbl/model.hpp"

#include <algorithm>
#include <cmath>

#include "gbl/errors.hpp"
#include "gbl/rng.hpp"

namespace gbl {
namespace {

// Propagation operator of one graph: GCN uses the symmetric-normalized
// adjacency with self-loops, SAGE-mean uses the row-normalized
// neighbor-mean matrix (zero row for isolated nodes).
Eigen::MatrixXd propagation_matrix(const Graph& graph, GnnKind kind) {
  const int m = graph.num_nodes();
  Eigen::MatrixXd adj = graph.adjacency();
  if (kind == GnnKind::gcn) {
    adj += Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd dinv_sqrt = adj.rowwise().sum().array().rsqrt();
    return dinv_sqrt.asDiagonal() * adj * dinv_sqrt.asDiagonal();
  }
  Eigen::VectorXd deg = adj.rowwise().sum();
  for (int i = 0; i < m; ++i)
    if (deg(i) > 0.0) adj.row(i) /= deg(i);
  return adj;
}

struct ForwardTrace {
  std::vector<Eigen::MatrixXd> inputs;   // H_{l-1} per layer
  std::vector<Eigen::MatrixXd> preacts;  // Z_l per layer
};

// One layer: GCN z = P (H W) + b; SAGE-mean z = H W_self + P (H W_nb) + b
// with W stacked as [W_self; W_nb]. Multiplying H by the weights before
// the propagation operator keeps the large M x M product narrow.
Eigen::MatrixXd forward_traced(const Model& model, const Graph& graph,
                               const Eigen::MatrixXd& prop, ForwardTrace* trace) {
  const auto kind = model.architecture.kind;
  const int layers = model.architecture.num_layers();
  Eigen::MatrixXd h = graph.node_features;
  for (int l = 0; l < layers; ++l) {
    if (trace) trace->inputs.push_back(h);
    Eigen::MatrixXd z;
    if (kind == GnnKind::gcn) {
      z = prop * (h * model.weights[l]);
    } else {
      const int in_dim = model.architecture.layer_dims[l];
      z = h * model.weights[l].topRows(in_dim) +
          prop * (h * model.weights[l].bottomRows(in_dim));
    }
    z.rowwise() += model.biases[l].transpose();
    if (trace) trace->preacts.push_back(z);
    h = l + 1 < layers ? z.cwiseMax(0.0) : z;
  }
  return h;
}

// Backprop from dL/dZ_last through all layers. With T = P^T G:
// GCN dW = H^T T, dH = T W^T; SAGE dW_self = H^T G, dW_nb = H^T T,
// dH = G W_self^T + T W_nb^T.
ParameterGradients backward(const Model& model, const Eigen::MatrixXd& prop,
                            const ForwardTrace& trace, Eigen::MatrixXd grad_z) {
  const auto kind = model.architecture.kind;
  const int layers = model.architecture.num_layers();
  ParameterGradients out;
  out.weights.resize(layers);
  out.biases.resize(layers);
  for (int l = layers - 1; l >= 0; --l) {
    const Eigen::MatrixXd propagated = prop.transpose() * grad_z;
    out.biases[l] = grad_z.colwise().sum().transpose();
    const int in_dim = model.architecture.layer_dims[l];
    Eigen::MatrixXd grad_h;
    if (kind == GnnKind::gcn) {
      out.weights[l] = trace.inputs[l].transpose() * propagated;
      grad_h = propagated * model.weights[l].transpose();
    } else {
      out.weights[l].resize(2 * in_dim, model.architecture.layer_dims[l + 1]);
      out.weights[l].topRows(in_dim) = trace.inputs[l].transpose() * grad_z;
      out.weights[l].bottomRows(in_dim) = trace.inputs[l].transpose() * propagated;
      grad_h = grad_z * model.weights[l].topRows(in_dim).transpose() +
               propagated * model.weights[l].bottomRows(in_dim).transpose();
    }
    if (l > 0) {
      // ReLU gate of the previous layer.
      grad_z = (trace.preacts[l - 1].array() > 0.0).cast<double>() * grad_h.array();
    } else {
      out.inputs = grad_h;
    }
  }
  return out;
}

Eigen::RowVectorXd softmax_row(const Eigen::RowVectorXd& row) {
  Eigen::RowVectorXd shifted = row.array() - row.maxCoeff();
  Eigen::RowVectorXd e = shifted.array().exp();
  return e / e.sum();
}

double cross_entropy(const Eigen::RowVectorXd& logits, int label) {
  const Eigen::RowVectorXd shifted = logits.array() - logits.maxCoeff();
  return std::log(shifted.array().exp().sum()) - shifted(label);
}

// dL/dZ_last for one sample; also reports the loss.
Eigen::MatrixXd loss_grad_z(const Model& model, const Eigen::MatrixXd& scores,
                            int target, std::optional<int> node_scope, double scale,
                            double* loss) {
  const int classes = model.architecture.layer_dims.back();
  if (model.architecture.task == Task::graph_level) {
    const int m = static_cast<int>(scores.rows());
    const Eigen::RowVectorXd logits = scores.colwise().mean();
    if (loss) *loss = cross_entropy(logits, target) * scale;
    Eigen::RowVectorXd g = softmax_row(logits);
    g(target) -= 1.0;
    return Eigen::VectorXd::Constant(m, scale / m) * g;
  }
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(scores.rows(), classes);
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    if (node_scope && *node_scope != i) continue;
    total += cross_entropy(scores.row(i), target);
    Eigen::RowVectorXd g = softmax_row(scores.row(i));
    g(target) -= 1.0;
    grad.row(i) = g * scale;
  }
  if (loss) *loss = total * scale;
  return grad;
}

}  // namespace

std::string to_string(GnnKind kind) {
  return kind == GnnKind::gcn ? "gcn" : "sage_mean";
}

GnnKind gnn_kind_from_string(const std::string& s) {
  if (s == "gcn") return GnnKind::gcn;
  if (s == "sage_mean" || s == "sage") return GnnKind::sage_mean;
  throw ConfigError("unknown GNN kind: " + s);
}

void Architecture::validate() const {
  if (layer_dims.size() < 3)
    throw ConfigError("architecture needs >= 2 layers (>= 3 dims)");
  for (int dim : layer_dims)
    if (dim <= 0) throw ConfigError("layer dims must be positive");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be nonnegative");
}

void Model::validate() const {
  architecture.validate();
  const int layers = architecture.num_layers();
  if (static_cast<int>(weights.size()) != layers ||
      static_cast<int>(biases.size()) != layers)
    throw ConfigError("model layer count does not match architecture");
  for (int l = 0; l < layers; ++l) {
    const int in = architecture.layer_dims[l] *
                   (architecture.kind == GnnKind::sage_mean ? 2 : 1);
    const int out = architecture.layer_dims[l + 1];
    if (weights[l].rows() != in || weights[l].cols() != out ||
        biases[l].size() != out)
      throw ConfigError("weight shape mismatch at layer " + std::to_string(l));
    if (!weights[l].allFinite() || !biases[l].allFinite())
      throw ComputeError("non-finite model parameter at layer " + std::to_string(l));
  }
}

Model init_model(const Architecture& architecture, std::uint64_t seed) {
  architecture.validate();
  Model model;
  model.architecture = architecture;
  model.seed = seed;
  auto rng = make_rng(seed, 0x1717);
  for (int l = 0; l < architecture.num_layers(); ++l) {
    const int in = architecture.layer_dims[l] *
                   (architecture.kind == GnnKind::sage_mean ? 2 : 1);
    const int out = architecture.layer_dims[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> glorot(-limit, limit);
    Eigen::MatrixXd w(in, out);
    for (int i = 0; i < in; ++i)
      for (int j = 0; j < out; ++j) w(i, j) = glorot(rng);
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return model;
}

Eigen::MatrixXd forward(const Model& model, const Graph& graph) {
  if (graph.num_features() != model.architecture.layer_dims.front())
    throw ConfigError("graph feature dimension does not match architecture input");
  const Eigen::MatrixXd prop = propagation_matrix(graph, model.architecture.kind);
  const Eigen::MatrixXd h = forward_traced(model, graph, prop, nullptr);
  if (model.architecture.task == Task::graph_level) return h.colwise().mean();
  return h;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out.row(i) = softmax_row(logits.row(i));
  return out;
}

int argmax_row(const Eigen::RowVectorXd& row) {
  int best = 0;
  for (int k = 1; k < row.size(); ++k)
    if (row(k) > row(best)) best = k;
  return best;
}

int predict(const Model& model, const Graph& graph) {
  return argmax_row(forward(model, graph).row(0));
}

std::vector<int> predict_nodes(const Model& model, const Graph& graph) {
  const Eigen::MatrixXd scores = forward(model, graph);
  std::vector<int> out(scores.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) out[i] = argmax_row(scores.row(i));
  return out;
}

ParameterGradients sample_gradients(const Model& model, const Graph& graph, int label,
                                    std::optional<int> node_scope) {
  const Eigen::MatrixXd prop = propagation_matrix(graph, model.architecture.kind);
  ForwardTrace trace;
  const Eigen::MatrixXd scores = forward_traced(model, graph, prop, &trace);
  double loss = 0.0;
  Eigen::MatrixXd grad_z = loss_grad_z(model, scores, label, node_scope, 1.0, &loss);
  ParameterGradients grads = backward(model, prop, trace, std::move(grad_z));
  grads.loss = loss;
  return grads;
}

Model train(const Dataset& dataset, const Architecture& architecture,
            const TrainConfig& config) {
  architecture.validate();
  config.validate();
  if (architecture.layer_dims.front() != dataset.num_features())
    throw ConfigError("architecture input dim does not match dataset features");
  if (architecture.layer_dims.back() != dataset.num_classes)
    throw ConfigError("architecture output dim does not match num_classes");

  Model model = init_model(architecture, config.seed);
  const int layers = architecture.num_layers();

  // Sample set: labeled graphs, or the one node-level graph.
  std::vector<const Graph*> graphs;
  if (dataset.task == Task::graph_level) {
    for (const auto& g : dataset.samples)
      if (g.label) graphs.push_back(&g);
    if (graphs.empty()) throw DataError("train: no labeled samples");
  } else {
    graphs.push_back(&dataset.graph());
  }

  std::vector<Eigen::MatrixXd> props;
  props.reserve(graphs.size());
  for (const auto* g : graphs) props.push_back(propagation_matrix(*g, architecture.kind));

  std::vector<int> train_nodes;
  if (dataset.task == Task::node_level) {
    for (std::size_t i = 0; i < dataset.train_mask.size(); ++i)
      if (dataset.train_mask[i]) train_nodes.push_back(static_cast<int>(i));
    if (train_nodes.empty()) throw DataError("train: empty train mask");
  }

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<Eigen::MatrixXd> grad_w(layers);
    std::vector<Eigen::VectorXd> grad_b(layers);
    for (int l = 0; l < layers; ++l) {
      grad_w[l] = Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
      grad_b[l] = Eigen::VectorXd::Zero(model.biases[l].size());
    }
    double loss = 0.0;

    for (std::size_t s = 0; s < graphs.size(); ++s) {
      ForwardTrace trace;
      const Eigen::MatrixXd scores = forward_traced(model, *graphs[s], props[s], &trace);
      Eigen::MatrixXd grad_z;
      if (dataset.task == Task::graph_level) {
        double sample_loss = 0.0;
        grad_z = loss_grad_z(model, scores, *graphs[s]->label, std::nullopt,
                             1.0 / static_cast<double>(graphs.size()), &sample_loss);
        loss += sample_loss;
      } else {
        const double scale = 1.0 / static_cast<double>(train_nodes.size());
        grad_z = Eigen::MatrixXd::Zero(scores.rows(), scores.cols());
        for (int node : train_nodes) {
          loss += cross_entropy(scores.row(node), dataset.node_labels[node]) * scale;
          Eigen::RowVectorXd g = softmax_row(scores.row(node));
          g(dataset.node_labels[node]) -= 1.0;
          grad_z.row(node) = g * scale;
        }
      }
      ParameterGradients grads = backward(model, props[s], trace, std::move(grad_z));
      for (int l = 0; l < layers; ++l) {
        grad_w[l] += grads.weights[l];
        grad_b[l] += grads.biases[l];
      }
    }

    if (!std::isfinite(loss))
      throw ComputeError("training diverged (non-finite loss) at epoch " +
                         std::to_string(epoch));

    for (int l = 0; l < layers; ++l) {
      model.weights[l] -=
          config.learning_rate * (grad_w[l] + config.weight_decay * model.weights[l]);
      model.biases[l] -= config.learning_rate * grad_b[l];
    }
  }
  model.validate();
  return model;
}

double evaluate_loss(const Model& model, const Dataset& dataset) {
  double loss = 0.0;
  long count = 0;
  if (dataset.task == Task::graph_level) {
    for (const auto& g : dataset.samples) {
      if (!g.label) continue;
      loss += cross_entropy(forward(model, g).row(0), *g.label);
      ++count;
    }
  } else {
    const Eigen::MatrixXd scores = forward(model, dataset.graph());
    for (std::size_t i = 0; i < dataset.train_mask.size(); ++i) {
      if (!dataset.train_mask[i]) continue;
      loss += cross_entropy(scores.row(static_cast<Eigen::Index>(i)), dataset.node_labels[i]);
      ++count;
    }
  }
  return count == 0 ? 0.0 : loss / static_cast<double>(count);
}

double evaluate_accuracy(const Model& model, const Dataset& dataset) {
  long hits = 0;
  long count = 0;
  if (dataset.task == Task::graph_level) {
    for (const auto& g : dataset.samples) {
      if (!g.label) continue;
      hits += predict(model, g) == *g.label;
      ++count;
    }
  } else {
    const auto preds = predict_nodes(model, dataset.graph());
    for (std::size_t i = 0; i < dataset.test_mask.size(); ++i) {
      if (!dataset.test_mask[i]) continue;
      hits += preds[i] == dataset.node_labels[i];
      ++count;
    }
  }
  return count == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(count);
}

Eigen::MatrixXd input_gradient_nodes(const Model& model, const Graph& graph, int target,
                                     const std::vector<int>& nodes) {
  if (model.architecture.task != Task::node_level)
    throw ConfigError("input_gradient_nodes requires a node-level model");
  const Eigen::MatrixXd prop = propagation_matrix(graph, model.architecture.kind);
  ForwardTrace trace;
  const Eigen::MatrixXd scores = forward_traced(model, graph, prop, &trace);
  Eigen::MatrixXd grad_z = Eigen::MatrixXd::Zero(scores.rows(), scores.cols());
  for (int node : nodes) {
    Eigen::RowVectorXd g = softmax_row(scores.row(node));
    g(target) -= 1.0;
    grad_z.row(node) = g;
  }
  return backward(model, prop, trace, std::move(grad_z)).inputs;
}

Eigen::MatrixXd input_gradient(const Model& model, const Graph& graph, int target,
                               std::optional<int> node_scope) {
  if (target < 0 || target >= model.architecture.layer_dims.back())
    throw ConfigError("input_gradient: invalid class index " + std::to_string(target));
  if (node_scope && (*node_scope < 0 || *node_scope >= graph.num_nodes()))
    throw ConfigError("input_gradient: invalid node index");
  return sample_gradients(model, graph, target, node_scope).inputs;
}

}  // namespace gbl
