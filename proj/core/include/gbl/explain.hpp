#pragma once

#include <vector>

#include "gbl/model.hpp"

namespace gbl {

enum class ImportanceMethod { mask, saliency };

struct ImportanceVector {
  int node = 0;
  std::vector<double> scores;  // length d, nonnegative
};

struct ExplainConfig {
  ImportanceMethod method = ImportanceMethod::mask;
  int iterations = 100;
  double mask_learning_rate = 0.1;
  double size_penalty = 0.05;  // lambda on sum(mask)
};

/// Per-node feature importance. `mask`: projected gradient descent on a
/// soft multiplicative mask over the node's feature row, minimizing the
/// model's cross-entropy for its current prediction plus a size
/// regularizer; scores are the final mask in [0,1]. `saliency`: scores
/// are |input_gradient| of the node's row for the predicted class.
ImportanceVector feature_importance(const Model& model, const Graph& graph, int node,
                                    const ExplainConfig& config = {});

}  // namespace gbl
