#include "gbl/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gbl/errors.hpp"

namespace gbl {
namespace {

using nlohmann::json;

Eigen::MatrixXd parse_features(const json& rows, const std::string& where) {
  if (!rows.is_array() || rows.empty())
    throw DataError(where + ": \"features\" must be a nonempty array of rows");
  const auto m = rows.size();
  const auto d = rows[0].is_array() ? rows[0].size() : 0;
  if (d == 0) throw DataError(where + ": empty feature row");
  Eigen::MatrixXd feat(m, d);
  for (std::size_t j = 0; j < m; ++j) {
    if (!rows[j].is_array() || rows[j].size() != d)
      throw DataError(where + ": inconsistent feature dimension at node " +
                      std::to_string(j));
    for (std::size_t k = 0; k < d; ++k) {
      if (!rows[j][k].is_number())
        throw DataError(where + ": non-numeric feature at node " + std::to_string(j));
      feat(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          rows[j][k].get<double>();
    }
  }
  return feat;
}

std::vector<std::pair<int, int>> parse_edges(const json& arr, const std::string& where,
                                             bool& symmetrized) {
  if (!arr.is_array()) throw DataError(where + ": \"edges\" must be an array");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(arr.size());
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer())
      throw DataError(where + ": malformed edge entry");
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  // Directed duplicates like [u,v] and [v,u] collapse under
  // normalization; note when that actually happened.
  const auto before = edges.size();
  for (auto& [u, v] : edges)
    if (u > v) std::swap(u, v);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  symmetrized = edges.size() != before;
  return edges;
}

Graph parse_graph_record(const json& rec, const std::string& where, bool& symmetrized) {
  if (!rec.is_object()) throw DataError(where + ": record is not a JSON object");
  if (!rec.contains("features")) throw DataError(where + ": missing \"features\"");
  if (!rec.contains("edges")) throw DataError(where + ": missing \"edges\"");
  Graph g;
  g.node_features = parse_features(rec["features"], where);
  g.edges = parse_edges(rec["edges"], where, symmetrized);
  // Bounds, self-loops etc. are checked here so the error carries the
  // record number.
  g.validate(where);
  return g;
}

Dataset load_graph_level(std::istream& in) {
  Dataset ds;
  ds.task = Task::graph_level;
  std::string line;
  int record = 0;
  int max_label = -1;
  bool any_symmetrized = false;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    ++record;
    const std::string where = "record " + std::to_string(record);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": malformed record: " + e.what());
    }
    bool symmetrized = false;
    Graph g = parse_graph_record(rec, where, symmetrized);
    any_symmetrized |= symmetrized;
    if (rec.contains("label")) {
      if (!rec["label"].is_number_integer())
        throw DataError(where + ": unknown label (not an integer)");
      g.label = rec["label"].get<int>();
      if (*g.label < 0) throw DataError(where + ": unknown label " + std::to_string(*g.label));
      max_label = std::max(max_label, *g.label);
    }
    ds.samples.push_back(std::move(g));
  }
  if (ds.samples.empty()) throw DataError("empty dataset file");
  if (any_symmetrized)
    std::fputs("warning: directed edges symmetrized at load\n", stderr);
  ds.num_classes = max_label + 1;
  if (ds.num_classes < 1) ds.num_classes = 1;
  ds.column_stats = column_statistics(ds.samples);
  ds.validate();
  return ds;
}

Dataset load_node_level(std::istream& in) {
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  }
  const std::string where = "record 1";
  bool symmetrized = false;
  Dataset ds;
  ds.task = Task::node_level;
  ds.samples.push_back(parse_graph_record(root, where, symmetrized));
  if (symmetrized) std::fputs("warning: directed edges symmetrized at load\n", stderr);

  for (const char* key : {"labels", "train_mask", "test_mask", "num_classes"})
    if (!root.contains(key)) throw DataError(where + ": missing \"" + key + "\"");

  ds.num_classes = root["num_classes"].get<int>();
  for (const auto& l : root["labels"]) ds.node_labels.push_back(l.get<int>());
  for (const auto& b : root["train_mask"]) ds.train_mask.push_back(b.get<bool>());
  for (const auto& b : root["test_mask"]) ds.test_mask.push_back(b.get<bool>());
  ds.validate();

  // Stats over the training portion only.
  std::vector<int> train_nodes;
  for (std::size_t i = 0; i < ds.train_mask.size(); ++i)
    if (ds.train_mask[i]) train_nodes.push_back(static_cast<int>(i));
  if (!train_nodes.empty()) {
    Graph train_view;
    train_view.node_features.resize(train_nodes.size(), ds.graph().num_features());
    for (std::size_t i = 0; i < train_nodes.size(); ++i)
      train_view.node_features.row(static_cast<Eigen::Index>(i)) =
          ds.graph().node_features.row(train_nodes[i]);
    ds.column_stats = column_statistics(train_view);
  } else {
    ds.column_stats = column_statistics(ds.graph());
  }
  return ds;
}

json features_to_json(const Eigen::MatrixXd& feat) {
  json rows = json::array();
  for (Eigen::Index j = 0; j < feat.rows(); ++j) {
    json row = json::array();
    for (Eigen::Index k = 0; k < feat.cols(); ++k) row.push_back(feat(j, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json edges_to_json(const std::vector<std::pair<int, int>>& edges) {
  json arr = json::array();
  for (const auto& [u, v] : edges) arr.push_back(json::array({u, v}));
  return arr;
}

}  // namespace

Dataset load_dataset(const std::string& path, Task task) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  return task == Task::graph_level ? load_graph_level(in) : load_node_level(in);
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file: " + path);
  if (dataset.task == Task::graph_level) {
    int id = 0;
    for (const auto& g : dataset.samples) {
      json rec;
      rec["id"] = id++;
      if (g.label) rec["label"] = *g.label;
      rec["features"] = features_to_json(g.node_features);
      rec["edges"] = edges_to_json(g.edges);
      out << rec.dump() << '\n';
    }
  } else {
    json rec;
    rec["features"] = features_to_json(dataset.graph().node_features);
    rec["edges"] = edges_to_json(dataset.graph().edges);
    rec["labels"] = dataset.node_labels;
    rec["train_mask"] = dataset.train_mask;
    rec["test_mask"] = dataset.test_mask;
    rec["num_classes"] = dataset.num_classes;
    out << rec.dump() << '\n';
  }
  if (!out) throw DataError("failed writing dataset file: " + path);
}

}  // namespace gbl
