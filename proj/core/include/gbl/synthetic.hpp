#pragma once

#include <cstdint>

#include "gbl/graph.hpp"

namespace gbl {

enum class SyntheticKind { molecule_like, citation_like };

SyntheticKind synthetic_kind_from_string(const std::string& s);

/// Generator knobs. Defaults are tuned so the clean labels are
/// learnable by a small GCN (clean accuracy well above 0.75).
struct SyntheticParams {
  // molecule_like
  int min_nodes = 8;
  int max_nodes = 40;
  double label_noise = 0.05;   // fraction of labels flipped

  // citation_like
  int num_nodes = 600;
  int num_node_features = 50;
  int num_classes = 4;
  double intra_edge_prob = 0.03;
  double inter_edge_prob = 0.002;
  double keyword_prob = 0.35;    // class-keyword activation probability
  double background_prob = 0.03; // off-class keyword activation probability
  double train_fraction = 0.8;

  void validate(SyntheticKind kind) const;
};

/// molecule_like: `n` small labeled graphs (M in [8,40], d = 4, mixed
/// integer/real columns, 2 classes). citation_like: one graph with
/// binary features, per-node labels and train/test masks; `n` is
/// ignored beyond requiring n >= 1.
Dataset generate_synthetic(SyntheticKind kind, int n, std::uint64_t seed,
                           const SyntheticParams& params = {});

}  // namespace gbl
