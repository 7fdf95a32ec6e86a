#include <benchmark/benchmark.h>

#include "gbl/attack_graph.hpp"
#include "gbl/attack_node.hpp"
#include "gbl/defense.hpp"
#include "gbl/harness.hpp"
#include "gbl/synthetic.hpp"

using namespace gbl;

namespace {

Model small_graph_model(const Dataset& ds, GnnKind kind) {
  Architecture arch;
  arch.kind = kind;
  arch.task = Task::graph_level;
  arch.layer_dims = {ds.num_features(), 32, ds.num_classes};
  return init_model(arch, 1);
}

Model small_node_model(const Dataset& ds, GnnKind kind) {
  Architecture arch;
  arch.kind = kind;
  arch.task = Task::node_level;
  arch.layer_dims = {ds.num_features(), 32, ds.num_classes};
  return init_model(arch, 1);
}

void BM_forward_graph(benchmark::State& state) {
  const auto kind = state.range(0) ? GnnKind::sage_mean : GnnKind::gcn;
  Dataset ds = generate_synthetic(SyntheticKind::molecule_like, 1, 7);
  Model model = small_graph_model(ds, kind);
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, ds.samples[0]));
}
BENCHMARK(BM_forward_graph)->Arg(0)->Arg(1);

void BM_forward_citation(benchmark::State& state) {
  SyntheticParams p;
  p.num_nodes = static_cast<int>(state.range(0));
  Dataset ds = generate_synthetic(SyntheticKind::citation_like, 1, 7, p);
  Model model = small_node_model(ds, GnnKind::gcn);
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, ds.graph()));
}
BENCHMARK(BM_forward_citation)->Arg(150)->Arg(300)->Arg(600);

void BM_train_epochs(benchmark::State& state) {
  Dataset ds = generate_synthetic(SyntheticKind::molecule_like, 50, 3);
  Architecture arch;
  arch.task = Task::graph_level;
  arch.layer_dims = {ds.num_features(), 32, ds.num_classes};
  TrainConfig tc;
  tc.epochs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train(ds, arch, tc));
  state.SetItemsProcessed(state.iterations() * tc.epochs);
}
BENCHMARK(BM_train_epochs)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_optimize_offsets(benchmark::State& state) {
  Dataset ds = generate_synthetic(SyntheticKind::molecule_like, 1, 11);
  const Graph& g = ds.samples[0];
  GraphTriggerConfig config;
  auto rng = make_rng(11);
  const auto nodes = select_trigger_nodes(g, config.alpha, rng);
  const auto init = initialize_trigger_values(g);
  for (auto _ : state)
    benchmark::DoNotOptimize(optimize_offsets(g, nodes, init, config, ds.column_stats));
}
BENCHMARK(BM_optimize_offsets);

void BM_node_trigger_value(benchmark::State& state) {
  SyntheticParams p;
  p.num_nodes = 300;
  Dataset ds = generate_synthetic(SyntheticKind::citation_like, 1, 13, p);
  NodeTriggerConfig config;
  const std::vector<int> selected = {0, 3, 5, 8, 11, 14};
  const Eigen::RowVectorXd row = ds.graph().node_features.row(5);
  for (auto _ : state)
    benchmark::DoNotOptimize(compute_trigger_value(row, selected, config, ds.column_stats));
}
BENCHMARK(BM_node_trigger_value);

void BM_poison_node_dataset(benchmark::State& state) {
  SyntheticParams p;
  p.num_nodes = 300;
  Dataset ds = generate_synthetic(SyntheticKind::citation_like, 1, 17, p);
  Architecture arch;
  arch.task = Task::node_level;
  arch.layer_dims = {ds.num_features(), 32, ds.num_classes};
  TrainConfig tc;
  tc.epochs = 100;
  Model surrogate = train(ds, arch, tc);
  NodeTriggerConfig config;
  for (auto _ : state)
    benchmark::DoNotOptimize(poison_node_dataset(ds, surrogate, config));
  state.SetLabel("300 nodes, 5% poison");
}
BENCHMARK(BM_poison_node_dataset)->Unit(benchmark::kMillisecond);

void BM_smoothed_predict(benchmark::State& state) {
  Dataset ds = generate_synthetic(SyntheticKind::molecule_like, 1, 19);
  Model model = small_graph_model(ds, GnnKind::gcn);
  SmoothingConfig config;
  for (auto _ : state)
    benchmark::DoNotOptimize(smoothed_predict_graph(model, ds.samples[0], config));
}
BENCHMARK(BM_smoothed_predict);

void BM_neural_cleanse(benchmark::State& state) {
  SyntheticParams p;
  p.num_nodes = 150;
  Dataset ds = generate_synthetic(SyntheticKind::citation_like, 1, 23, p);
  Model model = small_node_model(ds, GnnKind::gcn);
  for (auto _ : state)
    benchmark::DoNotOptimize(neural_cleanse(model, ds, Task::node_level, 10));
  state.SetLabel("150 nodes, 10 iterations");
}
BENCHMARK(BM_neural_cleanse)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
