#include "gbl/model_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "gbl/errors.hpp"

namespace gbl {
namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) throw DataError("model file: bad weight matrix");
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw DataError("model file: ragged weight matrix");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j].get<double>();
  }
  return m;
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  json root;
  root["kind"] = to_string(model.architecture.kind);
  root["task"] = to_string(model.architecture.task);
  root["layer_dims"] = model.architecture.layer_dims;
  root["seed"] = model.seed;
  json layers = json::array();
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    json layer;
    layer["weights"] = matrix_to_json(model.weights[l]);
    json bias = json::array();
    for (Eigen::Index i = 0; i < model.biases[l].size(); ++i)
      bias.push_back(model.biases[l](i));
    layer["bias"] = std::move(bias);
    layers.push_back(std::move(layer));
  }
  root["layers"] = std::move(layers);

  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path);
  out << root.dump(2) << '\n';
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("malformed model file: " + std::string(e.what()));
  }
  Model model;
  model.architecture.kind = gnn_kind_from_string(root.at("kind").get<std::string>());
  model.architecture.task = task_from_string(root.at("task").get<std::string>());
  model.architecture.layer_dims = root.at("layer_dims").get<std::vector<int>>();
  model.seed = root.value("seed", 0ULL);
  for (const auto& layer : root.at("layers")) {
    model.weights.push_back(matrix_from_json(layer.at("weights")));
    const auto& bias = layer.at("bias");
    Eigen::VectorXd b(bias.size());
    for (std::size_t i = 0; i < bias.size(); ++i)
      b(static_cast<Eigen::Index>(i)) = bias[i].get<double>();
    model.biases.push_back(std::move(b));
  }
  model.validate();
  return model;
}

}  // namespace gbl
