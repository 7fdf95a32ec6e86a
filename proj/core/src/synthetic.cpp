#include "gbl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gbl/errors.hpp"
#include "gbl/rng.hpp"

namespace gbl {
namespace {

constexpr double kAtomTypeMax = 10.0;
constexpr double kPosXMax = 25.4;
constexpr double kPosYMax = 20.0;

// Spanning tree over a random node permutation keeps every sample
// connected before extra edges are added.
std::vector<std::pair<int, int>> random_tree(int m, Rng& rng) {
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < m; ++i) {
    std::uniform_int_distribution<int> parent(0, i - 1);
    edges.emplace_back(order[parent(rng)], order[i]);
  }
  return edges;
}

Graph make_molecule(int label, Rng& rng, const SyntheticParams& p) {
  std::uniform_int_distribution<int> node_count(p.min_nodes, p.max_nodes);
  const int m = node_count(rng);

  Graph g;
  g.node_features.resize(m, 4);
  std::uniform_int_distribution<int> atom(1, static_cast<int>(kAtomTypeMax));
  std::uniform_int_distribution<int> charge(0, 1);
  // Every graph carries a fixed share of near-maximal first coordinates
  // over a light-tailed body, keeping per-graph maxima consistent.
  std::uniform_real_distribution<double> pos_x_high(24.0, kPosXMax);
  std::exponential_distribution<double> pos_x_low(1.0 / 1.5);
  // Class-dependent scale on the second coordinate carries the label signal.
  std::exponential_distribution<double> pos_y(label == 0 ? 1.0 / 8.0 : 1.0);
  std::vector<int> high(m);
  std::iota(high.begin(), high.end(), 0);
  std::shuffle(high.begin(), high.end(), rng);
  const int num_high = std::max(1, m / 8);
  for (int j = 0; j < m; ++j) {
    g.node_features(j, 0) = atom(rng);
    g.node_features(j, 1) = charge(rng);
    g.node_features(j, 2) = std::min(pos_x_low(rng), 8.0);
    g.node_features(j, 3) = std::min(pos_y(rng), kPosYMax);
  }
  for (int j = 0; j < num_high; ++j) g.node_features(high[j], 2) = pos_x_high(rng);

  g.edges = random_tree(m, rng);
  const int extra = label == 0 ? m / 10 : m / 4;  // class 1 is ring-richer
  std::uniform_int_distribution<int> pick(0, m - 1);
  for (int e = 0; e < extra; ++e) {
    const int u = pick(rng);
    const int v = pick(rng);
    if (u != v) g.edges.emplace_back(u, v);
  }
  g.normalize_edges();
  g.label = label;
  return g;
}

Dataset generate_molecule_like(int n, std::uint64_t seed, const SyntheticParams& p) {
  Dataset ds;
  ds.task = Task::graph_level;
  ds.num_classes = 2;
  auto rng = make_rng(seed, 0x6d6f6c);
  std::bernoulli_distribution flip(p.label_noise);
  for (int i = 0; i < n; ++i) {
    const int structural_label = i % 2;  // balanced classes
    Graph g = make_molecule(structural_label, rng, p);
    if (flip(rng)) g.label = 1 - *g.label;
    ds.samples.push_back(std::move(g));
  }
  ds.column_stats = column_statistics(ds.samples);
  ds.validate();
  return ds;
}

Dataset generate_citation_like(std::uint64_t seed, const SyntheticParams& p) {
  const int m = p.num_nodes;
  const int d = p.num_node_features;
  const int c = p.num_classes;
  const int keywords_per_class = d / c;

  Dataset ds;
  ds.task = Task::node_level;
  ds.num_classes = c;
  auto rng = make_rng(seed, 0x636974);

  Graph g;
  g.node_features = Eigen::MatrixXd::Zero(m, d);
  ds.node_labels.resize(m);
  std::bernoulli_distribution keyword(p.keyword_prob);
  std::bernoulli_distribution background(p.background_prob);
  for (int i = 0; i < m; ++i) {
    const int y = i % c;
    ds.node_labels[i] = y;
    for (int k = 0; k < d; ++k) {
      const bool in_class_block =
          k >= y * keywords_per_class && k < (y + 1) * keywords_per_class;
      g.node_features(i, k) = (in_class_block ? keyword(rng) : background(rng)) ? 1.0 : 0.0;
    }
  }

  // Stochastic block model: dense within a class, sparse across.
  std::bernoulli_distribution intra(p.intra_edge_prob);
  std::bernoulli_distribution inter(p.inter_edge_prob);
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v)
      if (ds.node_labels[u] == ds.node_labels[v] ? intra(rng) : inter(rng))
        g.edges.emplace_back(u, v);
  g.normalize_edges();
  ds.samples.push_back(std::move(g));

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const int n_train = static_cast<int>(std::floor(p.train_fraction * m));
  ds.train_mask.assign(m, false);
  ds.test_mask.assign(m, false);
  for (int i = 0; i < m; ++i)
    (i < n_train ? ds.train_mask : ds.test_mask)[order[i]] = true;

  std::vector<int> train_nodes;
  for (int i = 0; i < m; ++i)
    if (ds.train_mask[i]) train_nodes.push_back(i);
  Graph train_view;
  train_view.node_features.resize(train_nodes.size(), d);
  for (std::size_t i = 0; i < train_nodes.size(); ++i)
    train_view.node_features.row(static_cast<Eigen::Index>(i)) =
        ds.graph().node_features.row(train_nodes[i]);
  ds.column_stats = column_statistics(train_view);
  ds.validate();
  return ds;
}

}  // namespace

SyntheticKind synthetic_kind_from_string(const std::string& s) {
  if (s == "molecule_like" || s == "molecule") return SyntheticKind::molecule_like;
  if (s == "citation_like" || s == "citation") return SyntheticKind::citation_like;
  throw ConfigError("unknown synthetic kind: " + s);
}

void SyntheticParams::validate(SyntheticKind kind) const {
  if (kind == SyntheticKind::molecule_like) {
    if (min_nodes < 2 || max_nodes < min_nodes)
      throw ConfigError("invalid node-count range for molecule_like");
    if (label_noise < 0.0 || label_noise >= 0.5)
      throw ConfigError("label_noise must lie in [0, 0.5)");
  } else {
    if (num_nodes < num_classes) throw ConfigError("citation_like needs >= one node per class");
    if (num_classes < 2) throw ConfigError("citation_like needs >= 2 classes");
    if (num_node_features < num_classes)
      throw ConfigError("citation_like needs >= one feature per class");
    for (double prob : {intra_edge_prob, inter_edge_prob, keyword_prob, background_prob})
      if (prob < 0.0 || prob > 1.0) throw ConfigError("probability knob outside [0,1]");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw ConfigError("train_fraction must lie in (0,1)");
  }
}

Dataset generate_synthetic(SyntheticKind kind, int n, std::uint64_t seed,
                           const SyntheticParams& params) {
  if (n < 1) throw ConfigError("generate_synthetic: n must be >= 1");
  params.validate(kind);
  return kind == SyntheticKind::molecule_like
             ? generate_molecule_like(n, seed, params)
             : generate_citation_like(seed, params);
}

}  // namespace gbl
