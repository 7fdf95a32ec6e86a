#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "gbl/dataset_io.hpp"
#include "gbl/errors.hpp"
#include "gbl/model_io.hpp"
#include "gbl/synthetic.hpp"

using namespace gbl;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("gbl_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("graph-level dataset round-trips bit-exactly") {
  TempDir tmp;
  Dataset ds = generate_synthetic(SyntheticKind::molecule_like, 12, 5);
  const auto path = tmp.file("graphs.jsonl");
  save_dataset(ds, path);
  Dataset back = load_dataset(path, Task::graph_level);

  REQUIRE(back.samples.size() == ds.samples.size());
  CHECK(back.num_classes == ds.num_classes);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& a = ds.samples[i];
    const auto& b = back.samples[i];
    CHECK(a.label == b.label);
    CHECK(a.edges == b.edges);
    REQUIRE(a.node_features.rows() == b.node_features.rows());
    CHECK((a.node_features - b.node_features).cwiseAbs().maxCoeff() == 0.0);
  }
  for (std::size_t k = 0; k < ds.column_stats.size(); ++k) {
    CHECK(back.column_stats[k].min == ds.column_stats[k].min);
    CHECK(back.column_stats[k].max == ds.column_stats[k].max);
    CHECK(back.column_stats[k].is_integer == ds.column_stats[k].is_integer);
  }
}

TEST_CASE("node-level dataset round-trips with masks and labels") {
  TempDir tmp;
  SyntheticParams params;
  params.num_nodes = 80;
  params.num_node_features = 12;
  Dataset ds = generate_synthetic(SyntheticKind::citation_like, 1, 9, params);
  const auto path = tmp.file("nodes.json");
  save_dataset(ds, path);
  Dataset back = load_dataset(path, Task::node_level);

  CHECK(back.num_classes == ds.num_classes);
  CHECK(back.node_labels == ds.node_labels);
  CHECK(back.train_mask == ds.train_mask);
  CHECK(back.test_mask == ds.test_mask);
  CHECK(back.graph().edges == ds.graph().edges);
  CHECK((back.graph().node_features - ds.graph().node_features).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("load errors carry the record number") {
  TempDir tmp;
  const auto path = tmp.file("bad.jsonl");

  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(load_dataset(tmp.file("nope.jsonl"), Task::graph_level),
                         ("cannot open dataset file: " + tmp.file("nope.jsonl")).c_str(),
                         DataError);
  }
  SUBCASE("malformed json line") {
    write_text(path, "{\"features\": [[1,2]], \"edges\": []}\n{oops\n");
    try {
      load_dataset(path, Task::graph_level);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("record 2") == 0);
      CHECK(std::string(e.what()).find("malformed record") != std::string::npos);
    }
  }
  SUBCASE("missing features") {
    write_text(path, "{\"edges\": []}\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, Task::graph_level),
                         "record 1: missing \"features\"", DataError);
  }
  SUBCASE("inconsistent feature dimension") {
    write_text(path, "{\"features\": [[1,2],[3]], \"edges\": []}\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, Task::graph_level),
                         "record 1: inconsistent feature dimension at node 1", DataError);
  }
  SUBCASE("edge out of range reported with the record") {
    write_text(path, "{\"features\": [[1],[2]], \"edges\": [[0,5]]}\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, Task::graph_level),
                         "record 1: edge index out of range: [0,5] in a 2-node graph",
                         DataError);
  }
  SUBCASE("negative label") {
    write_text(path, "{\"features\": [[1]], \"edges\": [], \"label\": -2}\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, Task::graph_level),
                         "record 1: unknown label -2", DataError);
  }
  SUBCASE("empty file") {
    write_text(path, "\n  \n");
    CHECK_THROWS_WITH_AS(load_dataset(path, Task::graph_level), "empty dataset file",
                         DataError);
  }
  SUBCASE("node-level missing mask") {
    write_text(path,
               "{\"features\": [[1],[2]], \"edges\": [[0,1]], \"labels\": [0,1],"
               " \"test_mask\": [false,true], \"num_classes\": 2}\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, Task::node_level),
                         "record 1: missing \"train_mask\"", DataError);
  }
}

TEST_CASE("directed duplicate edges are symmetrized at load") {
  TempDir tmp;
  const auto path = tmp.file("dir.jsonl");
  write_text(path,
             "{\"features\": [[1],[2],[3]], \"edges\": [[0,1],[1,0],[2,1]]}\n");
  Dataset ds = load_dataset(path, Task::graph_level);
  CHECK(ds.samples[0].edges == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
}

TEST_CASE("node-level column stats come from the training portion only") {
  TempDir tmp;
  const auto path = tmp.file("nodes.json");
  write_text(path,
             "{\"features\": [[1,0.5],[2,0.5],[100,9.5]], \"edges\": [[0,1]],"
             " \"labels\": [0,1,1], \"train_mask\": [true,true,false],"
             " \"test_mask\": [false,false,true], \"num_classes\": 2}\n");
  Dataset ds = load_dataset(path, Task::node_level);
  CHECK(ds.column_stats[0].max == 2.0);  // the test node's 100 is excluded
  CHECK(ds.column_stats[0].mean == doctest::Approx(1.5));
  CHECK(ds.column_stats[1].max == 0.5);
}

TEST_CASE("model save/load round-trips parameters exactly") {
  TempDir tmp;
  Architecture arch;
  arch.kind = GnnKind::sage_mean;
  arch.layer_dims = {5, 7, 3};
  arch.task = Task::node_level;
  Model m = init_model(arch, 42);

  const auto path = tmp.file("model.json");
  save_model(m, path);
  Model back = load_model(path);

  CHECK(back.architecture.kind == m.architecture.kind);
  CHECK(back.architecture.layer_dims == m.architecture.layer_dims);
  CHECK(back.architecture.task == m.architecture.task);
  REQUIRE(back.weights.size() == m.weights.size());
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    CHECK((back.weights[l] - m.weights[l]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.biases[l] - m.biases[l]).cwiseAbs().maxCoeff() == 0.0);
  }
}
