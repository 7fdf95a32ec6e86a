#pragma once

#include <Eigen/Dense>

namespace gbl {

/// Cosine similarity between two vectors. A zero-norm operand yields 0,
/// so an all-zero row can never satisfy a positive similarity threshold.
inline double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

/// Cosine similarity of two feature matrices treated as flattened
/// concatenations of their node rows.
inline double cosine_similarity(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.cwiseProduct(b).sum() / (na * nb);
}

}  // namespace gbl
