#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "gbl/errors.hpp"
#include "gbl/graph.hpp"
#include "gbl/rng.hpp"

using namespace gbl;

namespace {

Graph make_path_graph(int m, int d = 2) {
  Graph g;
  g.node_features = Eigen::MatrixXd::Zero(m, d);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < d; ++k) g.node_features(j, k) = j + 0.5 * k;
  for (int j = 0; j + 1 < m; ++j) g.edges.emplace_back(j, j + 1);
  return g;
}

}  // namespace

TEST_CASE("has_edge and neighbors agree with the edge list") {
  Graph g = make_path_graph(5);
  g.edges.emplace_back(0, 4);
  g.normalize_edges();
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 0));  // undirected
  CHECK(g.has_edge(4, 0));
  CHECK_FALSE(g.has_edge(0, 2));
  CHECK(g.neighbors(0) == std::vector<int>{1, 4});
  CHECK(g.neighbors(2) == std::vector<int>{1, 3});
}

TEST_CASE("adjacency is symmetric 0/1 with zero diagonal") {
  Graph g = make_path_graph(4);
  const Eigen::MatrixXd adj = g.adjacency();
  CHECK(adj.rows() == 4);
  CHECK((adj - adj.transpose()).norm() == 0.0);
  CHECK(adj.diagonal().norm() == 0.0);
  for (int u = 0; u < 4; ++u)
    for (int v = 0; v < 4; ++v)
      CHECK(adj(u, v) == (g.has_edge(u, v) ? 1.0 : 0.0));
}

TEST_CASE("normalize_edges canonicalizes order and drops duplicates") {
  Graph g = make_path_graph(4);
  g.edges = {{2, 1}, {0, 1}, {1, 2}, {3, 2}};
  g.normalize_edges();
  CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}});
}

TEST_CASE("validate reports the offending edge") {
  Graph g = make_path_graph(3);

  SUBCASE("out-of-range index") {
    g.edges.emplace_back(1, 7);
    CHECK_THROWS_WITH_AS(g.validate(),
                         "edge index out of range: [1,7] in a 3-node graph",
                         DataError);
  }
  SUBCASE("self-loop") {
    g.edges.emplace_back(2, 2);
    CHECK_THROWS_WITH_AS(g.validate(), "self-loop on node 2", DataError);
  }
  SUBCASE("duplicate edge") {
    g.edges.emplace_back(1, 0);
    CHECK_THROWS_WITH_AS(g.validate(), "duplicate edge [1,0]", DataError);
  }
  SUBCASE("non-finite feature") {
    g.node_features(0, 0) = std::nan("");
    CHECK_THROWS_WITH_AS(g.validate(), "non-finite node feature", DataError);
  }
  SUBCASE("context prefix") {
    g.edges.emplace_back(0, 0);
    CHECK_THROWS_WITH_AS(g.validate("sample 7"), "sample 7: self-loop on node 0",
                         DataError);
  }
}

TEST_CASE("dataset validate catches node-level inconsistencies") {
  Dataset ds;
  ds.task = Task::node_level;
  ds.num_classes = 2;
  ds.samples.push_back(make_path_graph(3));
  ds.node_labels = {0, 1, 0};
  ds.train_mask = {true, true, false};
  ds.test_mask = {false, false, true};
  CHECK_NOTHROW(ds.validate());

  SUBCASE("two graphs") {
    ds.samples.push_back(make_path_graph(3));
    CHECK_THROWS_WITH_AS(ds.validate(), "node-level dataset must hold exactly one graph",
                         DataError);
  }
  SUBCASE("mask overlap") {
    ds.test_mask[1] = true;
    CHECK_THROWS_WITH_AS(ds.validate(), "masks not disjoint at node 1", DataError);
  }
  SUBCASE("label out of range") {
    ds.node_labels[2] = 5;
    CHECK_THROWS_WITH_AS(ds.validate(), "node 2: unknown label 5", DataError);
  }
  SUBCASE("length mismatch") {
    ds.train_mask.pop_back();
    CHECK_THROWS_WITH_AS(ds.validate(), "labels/masks length does not match node count",
                         DataError);
  }
}

TEST_CASE("dataset validate catches graph-level label range") {
  Dataset ds;
  ds.task = Task::graph_level;
  ds.num_classes = 2;
  ds.samples.push_back(make_path_graph(3));
  ds.samples.push_back(make_path_graph(4));
  ds.samples[1].label = 3;
  CHECK_THROWS_WITH_AS(ds.validate(), "sample 1: unknown label 3", DataError);
}

TEST_CASE("column_statistics matches a hand computation") {
  Graph a;
  a.node_features.resize(2, 3);
  a.node_features << 1.0, 0.5, 2.0,
                     3.0, 1.5, 2.0;
  Graph b;
  b.node_features.resize(1, 3);
  b.node_features << -2.0, 0.25, 2.0;

  const auto stats = column_statistics({a, b});
  REQUIRE(stats.size() == 3);
  CHECK(stats[0].min == -2.0);
  CHECK(stats[0].max == 3.0);
  CHECK(stats[0].mean == doctest::Approx((1.0 + 3.0 - 2.0) / 3.0));
  CHECK(stats[0].is_integer);
  CHECK_FALSE(stats[1].is_integer);
  CHECK(stats[2].is_integer);
  CHECK(stats[2].mean == 2.0);
}

TEST_CASE("integer detection uses a strict 1e-9 boundary") {
  Graph g;
  g.node_features.resize(1, 2);
  g.node_features << 1.0 + 0.5e-9, 1.0 + 2e-9;
  const auto stats = column_statistics(g);
  CHECK(stats[0].is_integer);        // within tolerance
  CHECK_FALSE(stats[1].is_integer);  // beyond it
}

TEST_CASE("split uses the floor rule and preserves the sample multiset") {
  Dataset ds;
  ds.task = Task::graph_level;
  ds.num_classes = 2;
  for (int i = 0; i < 7; ++i) {
    Graph g = make_path_graph(3 + i);
    g.label = i % 2;
    ds.samples.push_back(g);
  }
  ds.column_stats = column_statistics(ds.samples);

  auto [train, test] = split(ds, 0.8, 11);
  CHECK(train.samples.size() == 5);  // floor(0.8 * 7)
  CHECK(test.samples.size() == 2);

  // Same seed reproduces the split; node counts identify the samples.
  auto [train2, test2] = split(ds, 0.8, 11);
  for (std::size_t i = 0; i < train.samples.size(); ++i)
    CHECK(train.samples[i].num_nodes() == train2.samples[i].num_nodes());

  std::multiset<int> seen;
  for (const auto& g : train.samples) seen.insert(g.num_nodes());
  for (const auto& g : test.samples) seen.insert(g.num_nodes());
  std::multiset<int> expected;
  for (const auto& g : ds.samples) expected.insert(g.num_nodes());
  CHECK(seen == expected);
}

TEST_CASE("split rejects bad arguments") {
  Dataset ds;
  ds.task = Task::node_level;
  ds.num_classes = 2;
  ds.samples.push_back(make_path_graph(3));
  CHECK_THROWS_AS(split(ds, 0.8, 0), ConfigError);

  ds.task = Task::graph_level;
  CHECK_THROWS_AS(split(ds, 0.0, 0), ConfigError);
  CHECK_THROWS_AS(split(ds, 1.0, 0), ConfigError);
}

TEST_CASE("task names round-trip and reject unknowns") {
  CHECK(task_from_string("graph_level") == Task::graph_level);
  CHECK(task_from_string("node") == Task::node_level);
  CHECK(to_string(Task::node_level) == "node_level");
  CHECK_THROWS_AS(task_from_string("edge_level"), ConfigError);
}

TEST_CASE("stream derivation decorrelates nearby seeds") {
  auto a = make_rng(1, 0);
  auto b = make_rng(1, 1);
  auto c = make_rng(2, 0);
  CHECK(a() != b());
  CHECK(a() != c());
  // Same (seed, stream) is bitwise reproducible.
  auto a2 = make_rng(1, 0);
  a = make_rng(1, 0);
  for (int i = 0; i < 16; ++i) CHECK(a() == a2());
}
