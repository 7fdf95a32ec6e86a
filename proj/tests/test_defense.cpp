#include <doctest.h>

#include <cmath>
#include <vector>

#include "gbl/defense.hpp"
#include "gbl/errors.hpp"
#include "gbl/synthetic.hpp"

using namespace gbl;

namespace {

Model trained_graph_model(const Dataset& ds, std::uint64_t seed) {
  Architecture arch;
  arch.kind = GnnKind::gcn;
  arch.task = Task::graph_level;
  arch.layer_dims = {ds.num_features(), 16, ds.num_classes};
  TrainConfig tc;
  tc.epochs = 300;
  tc.learning_rate = 0.05;
  tc.seed = seed;
  return train(ds, arch, tc);
}

Model trained_node_model(const Dataset& ds, std::uint64_t seed) {
  Architecture arch;
  arch.kind = GnnKind::gcn;
  arch.task = Task::node_level;
  arch.layer_dims = {ds.num_features(), 16, ds.num_classes};
  TrainConfig tc;
  tc.epochs = 400;
  tc.learning_rate = 0.1;
  tc.seed = seed;
  return train(ds, arch, tc);
}

}  // namespace

TEST_CASE("smoothing config validation") {
  SmoothingConfig config;
  config.beta = 1.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = SmoothingConfig{};
  config.num_subsamples = 10;  // even counts can tie
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.num_subsamples = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("beta=0 smoothing reduces to the plain prediction") {
  Dataset ds = generate_synthetic(SyntheticKind::molecule_like, 30, 1);
  Model model = trained_graph_model(ds, 1);
  SmoothingConfig config;
  config.beta = 0.0;
  config.seed = 9;
  for (int i = 0; i < 10; ++i)
    CHECK(smoothed_predict_graph(model, ds.samples[i], config) ==
          predict(model, ds.samples[i]));

  SyntheticParams p;
  p.num_nodes = 80;
  p.num_node_features = 12;
  Dataset nodes = generate_synthetic(SyntheticKind::citation_like, 1, 2, p);
  Model node_model = trained_node_model(nodes, 2);
  const auto plain = predict_nodes(node_model, nodes.graph());
  for (int n = 0; n < 10; ++n)
    CHECK(smoothed_predict_node(node_model, nodes.graph(), n, config) == plain[n]);
}

TEST_CASE("smoothed predictions are vote-deterministic in the seed") {
  Dataset ds = generate_synthetic(SyntheticKind::molecule_like, 20, 3);
  Model model = trained_graph_model(ds, 3);
  SmoothingConfig config;
  config.beta = 0.4;
  config.seed = 7;
  const int a = smoothed_predict_graph(model, ds.samples[0], config);
  const int b = smoothed_predict_graph(model, ds.samples[0], config);
  CHECK(a == b);

  SyntheticParams p;
  p.num_nodes = 60;
  p.num_node_features = 12;
  Dataset nodes = generate_synthetic(SyntheticKind::citation_like, 1, 4, p);
  Model node_model = trained_node_model(nodes, 4);
  CHECK(smoothed_predict_node(node_model, nodes.graph(), 5, config) ==
        smoothed_predict_node(node_model, nodes.graph(), 5, config));
  CHECK_THROWS_AS(smoothed_predict_node(node_model, nodes.graph(), -1, config),
                  ConfigError);
}

TEST_CASE("smoothing keeps accuracy on confidently-classified clean data") {
  // Majority voting over mild subsamples should agree with the plain
  // model on most clean samples.
  Dataset ds = generate_synthetic(SyntheticKind::molecule_like, 40, 5);
  Model model = trained_graph_model(ds, 5);
  SmoothingConfig config;
  config.beta = 0.2;
  config.seed = 5;
  int agree = 0;
  for (int i = 0; i < 20; ++i)
    agree += smoothed_predict_graph(model, ds.samples[i], config) ==
             predict(model, ds.samples[i]);
  CHECK(agree >= 16);
}

TEST_CASE("an empty subsample is rejected") {
  Graph tiny;
  tiny.node_features = Eigen::MatrixXd::Ones(2, 3);
  Architecture arch;
  arch.layer_dims = {3, 4, 2};
  arch.task = Task::graph_level;
  Model model = init_model(arch, 0);
  SmoothingConfig config;
  config.beta = 0.6;  // ceil(0.6 * 2) = 2 removals of 2 nodes
  CHECK_THROWS_AS(smoothed_predict_graph(model, tiny, config), ComputeError);
}

TEST_CASE("anomaly indices match a hand-computed MAD") {
  // norms {1, 9, 10, 11, 12}: median 10, deviations {9, 1, 0, 1, 2},
  // MAD 1 → index_i = dev_i / 1.4826.
  const std::vector<double> norms = {1.0, 9.0, 10.0, 11.0, 12.0};
  const auto idx = anomaly_indices(norms);
  REQUIRE(idx.size() == 5);
  CHECK(idx[0] == doctest::Approx(9.0 / 1.4826).epsilon(1e-12));
  CHECK(idx[1] == doctest::Approx(1.0 / 1.4826).epsilon(1e-12));
  CHECK(idx[2] == 0.0);
  CHECK(idx[4] == doctest::Approx(2.0 / 1.4826).epsilon(1e-12));
  CHECK(idx[0] > kCleanseAnomalyThreshold);
  CHECK(idx[4] < kCleanseAnomalyThreshold);
}

TEST_CASE("a zero MAD yields all-zero anomaly indices") {
  const auto idx = anomaly_indices({3.0, 3.0, 3.0, 42.0});
  for (double v : idx) CHECK(v == 0.0);
}

TEST_CASE("neural cleanse returns per-class norms and a sane flag set") {
  SyntheticParams p;
  p.num_nodes = 100;
  p.num_node_features = 16;
  Dataset ds = generate_synthetic(SyntheticKind::citation_like, 1, 6, p);
  Model model = trained_node_model(ds, 6);

  const auto report = neural_cleanse(model, ds, Task::node_level, 40);
  REQUIRE(report.perturbation_norms.size() == 4);
  REQUIRE(report.anomaly_index.size() == 4);
  CHECK(report.flagging_enabled);
  for (double n : report.perturbation_norms) {
    CHECK(n >= 0.0);
    CHECK(std::isfinite(n));
  }
  // Flags obey the documented rule exactly.
  std::vector<double> sorted = report.perturbation_norms;
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[1] + sorted[2]);
  for (int c = 0; c < 4; ++c) {
    const bool should_flag = report.anomaly_index[c] > kCleanseAnomalyThreshold &&
                             report.perturbation_norms[c] < median;
    CHECK(report.flagged_classes.count(c) == (should_flag ? 1 : 0));
  }

  // Deterministic.
  const auto again = neural_cleanse(model, ds, Task::node_level, 40);
  CHECK(again.perturbation_norms == report.perturbation_norms);
  CHECK(again.flagged_classes == report.flagged_classes);

  CHECK_THROWS_AS(neural_cleanse(model, ds, Task::node_level, 0), ConfigError);
}

TEST_CASE("neural cleanse disables flagging below three classes") {
  Dataset ds = generate_synthetic(SyntheticKind::molecule_like, 20, 7);
  Model model = trained_graph_model(ds, 7);
  const auto report = neural_cleanse(model, ds, Task::graph_level, 10);
  CHECK_FALSE(report.flagging_enabled);
  CHECK(report.flagged_classes.empty());
  REQUIRE(report.perturbation_norms.size() == 2);
}
