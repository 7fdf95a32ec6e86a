#include "gbl/explain.hpp"

#include <algorithm>
#include <cmath>

#include "gbl/errors.hpp"

namespace gbl {

ImportanceVector feature_importance(const Model& model, const Graph& graph, int node,
                                    const ExplainConfig& config) {
  if (node < 0 || node >= graph.num_nodes())
    throw ConfigError("feature_importance: invalid node index");
  const int d = graph.num_features();

  const int predicted = model.architecture.task == Task::node_level
                            ? predict_nodes(model, graph)[node]
                            : predict(model, graph);

  ImportanceVector out;
  out.node = node;
  out.scores.assign(d, 0.0);

  if (config.method == ImportanceMethod::saliency) {
    const Eigen::MatrixXd grad =
        input_gradient(model, graph, predicted,
                       model.architecture.task == Task::node_level
                           ? std::optional<int>(node)
                           : std::nullopt);
    for (int k = 0; k < d; ++k) out.scores[k] = std::abs(grad(node, k));
    return out;
  }

  const Eigen::RowVectorXd original_row = graph.node_features.row(node);
  Eigen::RowVectorXd mask = Eigen::RowVectorXd::Constant(d, 0.5);
  Graph masked = graph;
  for (int it = 0; it < config.iterations; ++it) {
    masked.node_features.row(node) = original_row.cwiseProduct(mask);
    const Eigen::MatrixXd grad =
        input_gradient(model, masked, predicted,
                       model.architecture.task == Task::node_level
                           ? std::optional<int>(node)
                           : std::nullopt);
    // dL/dm_k = x_k * dL/dx_k, plus the size penalty.
    Eigen::RowVectorXd step =
        original_row.cwiseProduct(grad.row(node)).array() + config.size_penalty;
    mask -= config.mask_learning_rate * step;
    mask = mask.cwiseMax(0.0).cwiseMin(1.0);
  }
  for (int k = 0; k < d; ++k) {
    if (!std::isfinite(mask(k)))
      throw ComputeError("feature_importance: non-finite mask score");
    out.scores[k] = mask(k);
  }
  return out;
}

}  // namespace gbl
