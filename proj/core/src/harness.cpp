#include "gbl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gbl/dataset_io.hpp"
#include "gbl/errors.hpp"
#include "gbl/rng.hpp"

namespace gbl {
namespace {

using nlohmann::json;

constexpr std::uint64_t kTriggerSelectStream = 0x747269;
constexpr std::uint64_t kTestTriggerStream = 0x74650000;

Architecture make_architecture(const ExperimentConfig& config, const Dataset& dataset) {
  Architecture arch;
  arch.kind = config.model_kind;
  arch.task = config.task;
  arch.layer_dims = {dataset.num_features(), config.hidden_dim, dataset.num_classes};
  return arch;
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(name + ": " + e.what());
  } catch (const ComputeError& e) {
    throw ComputeError(name + ": " + e.what());
  }
}

double mean_of(const std::vector<double>& values) {
  return values.empty()
             ? 0.0
             : std::accumulate(values.begin(), values.end(), 0.0) / values.size();
}

double stddev_of(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / (values.size() - 1));
}

ExperimentReport aggregate(const ExperimentConfig& config,
                           std::vector<SeedReport> per_seed) {
  ExperimentReport report;
  report.task = config.task;
  report.attack = config.attack;
  std::vector<double> benign, backdoor, asr;
  for (const auto& s : per_seed) {
    benign.push_back(s.clean_accuracy_benign);
    backdoor.push_back(s.clean_accuracy_backdoored);
    asr.push_back(s.asr);
  }
  report.clean_accuracy_benign = mean_of(benign);
  report.clean_accuracy_backdoored = mean_of(backdoor);
  report.asr = mean_of(asr);
  report.asr_stddev = stddev_of(asr);
  report.cad = report.clean_accuracy_benign - report.clean_accuracy_backdoored;
  report.per_seed = std::move(per_seed);
  return report;
}

// Test samples picked for trigger embedding: a triggered_test_fraction
// share of the test partition, drawn from samples whose label differs
// from the target class when exclusion is on.
std::vector<int> pick_triggered(const std::vector<int>& test_indices,
                                const std::vector<int>& labels, int target,
                                double fraction, bool exclude_target,
                                std::uint64_t seed) {
  std::vector<int> candidates;
  for (std::size_t i = 0; i < test_indices.size(); ++i)
    if (!exclude_target || labels[i] != target)
      candidates.push_back(test_indices[i]);
  auto rng = make_rng(seed, kTriggerSelectStream);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  const auto want = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(test_indices.size())));
  if (candidates.size() > want) candidates.resize(want);
  return candidates;
}

SeedReport run_graph_seed(const ExperimentConfig& config, std::uint64_t seed) {
  SeedReport report;
  report.seed = seed;

  Dataset full = stage("load", [&] { return resolve_dataset(config, seed); });
  auto [train_set, test_set] =
      stage("split", [&] { return split(full, config.train_fraction, seed); });

  const Architecture arch = make_architecture(config, full);
  TrainConfig tc = config.train;
  tc.seed = seed;

  Model benign = stage("train-benign", [&] { return train(train_set, arch, tc); });

  GraphTriggerConfig attack = config.graph_attack;
  attack.seed = seed;
  FixedTriggerConfig fixed = config.fixed_attack;
  fixed.seed = seed;
  fixed.target_class = attack.target_class;
  fixed.poison_fraction = attack.poison_fraction;
  if (fixed.trigger_size <= 0) {
    // Match the adaptive budget: ceil(alpha * M) on the mean train size.
    double mean_nodes = 0.0;
    for (const auto& g : train_set.samples) mean_nodes += g.num_nodes();
    mean_nodes /= static_cast<double>(train_set.samples.size());
    fixed.trigger_size = static_cast<int>(std::ceil(attack.alpha * mean_nodes));
  }

  Dataset poisoned = train_set;
  if (config.attack == AttackKind::adaptive) {
    auto result = stage("poison", [&] { return poison_graph_dataset(train_set, attack); });
    poisoned = std::move(result.poisoned);
    report.poisoned_samples = static_cast<int>(result.plans.size());
  } else if (config.attack == AttackKind::fixed_baseline) {
    poisoned = stage("poison", [&] { return poison_graph_dataset_fixed(train_set, fixed); });
    report.poisoned_samples = static_cast<int>(
        std::ceil(fixed.poison_fraction * static_cast<double>(train_set.samples.size())));
  }

  Model backdoored =
      stage("train-backdoored", [&] { return train(poisoned, arch, tc); });

  std::vector<int> test_indices(test_set.samples.size());
  std::iota(test_indices.begin(), test_indices.end(), 0);
  std::vector<int> test_labels;
  for (const auto& g : test_set.samples) test_labels.push_back(g.label.value_or(-1));

  const auto triggered = pick_triggered(test_indices, test_labels, attack.target_class,
                                        config.triggered_test_fraction,
                                        config.exclude_target_class_from_asr, seed);
  std::vector<bool> is_triggered(test_set.samples.size(), false);
  for (int idx : triggered) is_triggered[idx] = true;

  SmoothingConfig smoothing = config.defense.smoothing;
  smoothing.seed = seed;

  int successes = 0, smoothed_successes = 0, trials = 0;
  stage("trigger-test", [&] {
    for (int idx : triggered) {
      const Graph& graph = test_set.samples[idx];
      Graph embedded;
      if (config.attack == AttackKind::adaptive) {
        auto rng = make_rng(seed, kTestTriggerStream + static_cast<std::uint64_t>(idx));
        GraphPoisonPlan plan;
        plan.sample_index = idx;
        plan.trigger_nodes = select_trigger_nodes(graph, attack.alpha, rng);
        const auto offsets =
            optimize_offsets(graph, plan.trigger_nodes, initialize_trigger_values(graph),
                             attack, train_set.column_stats);
        if (!offsets.feasible) {
          ++report.skipped_trigger_samples;
          continue;
        }
        plan.trigger_values = offsets.values;
        embedded = embed_trigger(graph, plan);
      } else {
        embedded = embed_fixed_graph_trigger(graph, fixed, train_set.column_stats);
      }
      ++trials;
      successes += predict(backdoored, embedded) == attack.target_class;
      if (config.defense.rs_enabled)
        smoothed_successes +=
            smoothed_predict_graph(backdoored, embedded, smoothing) == attack.target_class;
    }
    return 0;
  });
  if (trials == 0) throw DataError("trigger-test: nothing to evaluate");
  report.triggered_trials = trials;
  report.asr = static_cast<double>(successes) / trials;
  if (config.defense.rs_enabled)
    report.asr_smoothed = static_cast<double>(smoothed_successes) / trials;

  // CAD on the never-triggered share of the test set.
  int benign_hits = 0, backdoor_hits = 0, smoothed_hits = 0, clean_count = 0;
  stage("clean-eval", [&] {
    for (std::size_t i = 0; i < test_set.samples.size(); ++i) {
      if (is_triggered[i] || !test_set.samples[i].label) continue;
      ++clean_count;
      const int label = *test_set.samples[i].label;
      benign_hits += predict(benign, test_set.samples[i]) == label;
      backdoor_hits += predict(backdoored, test_set.samples[i]) == label;
      if (config.defense.rs_enabled)
        smoothed_hits +=
            smoothed_predict_graph(backdoored, test_set.samples[i], smoothing) == label;
    }
    return 0;
  });
  if (clean_count == 0) throw DataError("clean-eval: nothing to evaluate");
  report.clean_accuracy_benign = static_cast<double>(benign_hits) / clean_count;
  report.clean_accuracy_backdoored = static_cast<double>(backdoor_hits) / clean_count;
  report.cad = report.clean_accuracy_benign - report.clean_accuracy_backdoored;
  if (config.defense.rs_enabled)
    report.accuracy_smoothed = static_cast<double>(smoothed_hits) / clean_count;

  if (config.defense.nc_enabled) {
    report.cleanse = stage("neural-cleanse", [&] {
      return neural_cleanse(backdoored, test_set, config.task,
                            config.defense.nc_iterations, config.defense.nc_lambda);
    });
    report.cleanse_benign = stage("neural-cleanse", [&] {
      return neural_cleanse(benign, test_set, config.task, config.defense.nc_iterations,
                            config.defense.nc_lambda);
    });
  }
  return report;
}

SeedReport run_node_seed(const ExperimentConfig& config, std::uint64_t seed) {
  SeedReport report;
  report.seed = seed;

  Dataset ds = stage("load", [&] { return resolve_dataset(config, seed); });
  const Architecture arch = make_architecture(config, ds);
  TrainConfig tc = config.train;
  tc.seed = seed;

  Model benign = stage("train-benign", [&] { return train(ds, arch, tc); });

  NodeTriggerConfig attack = config.node_attack;
  attack.seed = seed;
  FixedTriggerConfig fixed = config.fixed_attack;
  fixed.seed = seed;
  fixed.target_class = attack.target_class;
  fixed.poison_fraction = attack.poison_fraction;
  if (fixed.trigger_size <= 0)  // match the adaptive budget of ceil(gamma * d)
    fixed.trigger_size = static_cast<int>(std::ceil(attack.gamma * ds.num_features()));

  // Surrogate: trained only on the adversary-accessible node subset
  // (the same shuffled prefix the poisoning pass will visit).
  std::vector<int> train_nodes;
  for (std::size_t i = 0; i < ds.train_mask.size(); ++i)
    if (ds.train_mask[i]) train_nodes.push_back(static_cast<int>(i));
  auto select_rng = make_rng(seed, 0x6e6f64);
  std::shuffle(train_nodes.begin(), train_nodes.end(), select_rng);
  const auto budget = static_cast<std::size_t>(
      std::ceil(attack.poison_fraction * static_cast<double>(train_nodes.size())));
  Dataset accessible = ds;
  accessible.train_mask.assign(ds.train_mask.size(), false);
  for (std::size_t i = 0; i < budget && i < train_nodes.size(); ++i)
    accessible.train_mask[train_nodes[i]] = true;
  Model surrogate =
      stage("train-surrogate", [&] { return train(accessible, arch, tc); });

  Dataset poisoned = ds;
  if (config.attack == AttackKind::adaptive) {
    auto result =
        stage("poison", [&] { return poison_node_dataset(ds, surrogate, attack); });
    poisoned = std::move(result.poisoned);
    report.poisoned_samples = static_cast<int>(result.plans.size());
  } else if (config.attack == AttackKind::fixed_baseline) {
    poisoned = stage("poison", [&] { return poison_node_dataset_fixed(ds, fixed); });
    report.poisoned_samples = static_cast<int>(budget);
  }

  Model backdoored = stage("train-backdoored", [&] { return train(poisoned, arch, tc); });

  std::vector<int> test_nodes, test_labels;
  for (std::size_t i = 0; i < ds.test_mask.size(); ++i)
    if (ds.test_mask[i]) {
      test_nodes.push_back(static_cast<int>(i));
      test_labels.push_back(ds.node_labels[i]);
    }
  const auto triggered = pick_triggered(test_nodes, test_labels, attack.target_class,
                                        config.triggered_test_fraction,
                                        config.exclude_target_class_from_asr, seed);
  std::vector<bool> is_triggered(ds.test_mask.size(), false);
  for (int idx : triggered) is_triggered[idx] = true;

  SmoothingConfig smoothing = config.defense.smoothing;
  smoothing.seed = seed;

  int successes = 0, smoothed_successes = 0, trials = 0;
  stage("trigger-test", [&] {
    for (int node : triggered) {
      Graph embedded = poisoned.graph();
      if (config.attack == AttackKind::adaptive) {
        const auto importance =
            feature_importance(surrogate, embedded, node, attack.explain);
        const auto selected =
            select_trigger_features(importance, attack.gamma, embedded.num_features());
        const auto value = compute_trigger_value(embedded.node_features.row(node),
                                                 selected, attack, ds.column_stats);
        if (!value.feasible) {
          ++report.skipped_trigger_samples;
          continue;
        }
        for (int k : selected) embedded.node_features(node, k) = value.value;
        if (config.prune_test_triggers) {
          for (const auto& [u, v] :
               prune_edges(embedded, node, attack.pruning_threshold)) {
            auto key = std::minmax(u, v);
            embedded.edges.erase(
                std::remove(embedded.edges.begin(), embedded.edges.end(),
                            std::make_pair(key.first, key.second)),
                embedded.edges.end());
          }
        }
      } else {
        embedded = embed_fixed_node_trigger(embedded, node, fixed, ds.column_stats);
      }
      ++trials;
      successes += predict_nodes(backdoored, embedded)[node] == attack.target_class;
      if (config.defense.rs_enabled)
        smoothed_successes += smoothed_predict_node(backdoored, embedded, node,
                                                    smoothing) == attack.target_class;
    }
    return 0;
  });
  if (trials == 0) throw DataError("trigger-test: nothing to evaluate");
  report.triggered_trials = trials;
  report.asr = static_cast<double>(successes) / trials;
  if (config.defense.rs_enabled)
    report.asr_smoothed = static_cast<double>(smoothed_successes) / trials;

  // Untouched test nodes: benign on the clean graph, backdoored on the
  // deployed (poisoned) graph.
  const auto benign_preds = predict_nodes(benign, ds.graph());
  const auto backdoor_preds = predict_nodes(backdoored, poisoned.graph());
  int benign_hits = 0, backdoor_hits = 0, smoothed_hits = 0, clean_count = 0;
  for (int node : test_nodes) {
    if (is_triggered[node]) continue;
    ++clean_count;
    benign_hits += benign_preds[node] == ds.node_labels[node];
    backdoor_hits += backdoor_preds[node] == ds.node_labels[node];
    if (config.defense.rs_enabled)
      smoothed_hits += smoothed_predict_node(backdoored, poisoned.graph(), node,
                                             smoothing) == ds.node_labels[node];
  }
  if (clean_count == 0) throw DataError("clean-eval: nothing to evaluate");
  report.clean_accuracy_benign = static_cast<double>(benign_hits) / clean_count;
  report.clean_accuracy_backdoored = static_cast<double>(backdoor_hits) / clean_count;
  report.cad = report.clean_accuracy_benign - report.clean_accuracy_backdoored;
  if (config.defense.rs_enabled)
    report.accuracy_smoothed = static_cast<double>(smoothed_hits) / clean_count;

  if (config.defense.nc_enabled) {
    report.cleanse = stage("neural-cleanse", [&] {
      return neural_cleanse(backdoored, ds, config.task, config.defense.nc_iterations,
                            config.defense.nc_lambda);
    });
    report.cleanse_benign = stage("neural-cleanse", [&] {
      return neural_cleanse(benign, ds, config.task, config.defense.nc_iterations,
                            config.defense.nc_lambda);
    });
  }
  return report;
}

}  // namespace

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::none: return "none";
    case AttackKind::adaptive: return "adaptive";
    case AttackKind::fixed_baseline: return "fixed_baseline";
  }
  return "none";
}

AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "none") return AttackKind::none;
  if (s == "adaptive") return AttackKind::adaptive;
  if (s == "fixed_baseline" || s == "fixed") return AttackKind::fixed_baseline;
  throw ConfigError("unknown attack kind: " + s);
}

void ExperimentConfig::validate() const {
  if (!(triggered_test_fraction > 0.0 && triggered_test_fraction <= 1.0))
    throw ConfigError("triggered_test_fraction must lie in (0,1]");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0,1)");
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be positive");
  if (seeds.empty()) throw ConfigError("at least one seed required");
  train.validate();
}

Dataset resolve_dataset(const ExperimentConfig& config, std::uint64_t seed) {
  if (!config.dataset_path.empty())
    return load_dataset(config.dataset_path, config.task);
  return generate_synthetic(config.synthetic_kind, config.synthetic_n, seed,
                            config.synthetic_params);
}

ExperimentReport run_graph_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.task != Task::graph_level)
    throw ConfigError("run_graph_experiment expects a graph-level config");
  std::vector<SeedReport> per_seed;
  for (std::uint64_t seed : config.seeds) per_seed.push_back(run_graph_seed(config, seed));
  return aggregate(config, std::move(per_seed));
}

ExperimentReport run_node_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.task != Task::node_level)
    throw ConfigError("run_node_experiment expects a node-level config");
  std::vector<SeedReport> per_seed;
  for (std::uint64_t seed : config.seeds) per_seed.push_back(run_node_seed(config, seed));
  return aggregate(config, std::move(per_seed));
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  return config.task == Task::graph_level ? run_graph_experiment(config)
                                          : run_node_experiment(config);
}

std::vector<ExperimentReport> sweep(const ExperimentConfig& config,
                                    const std::string& parameter,
                                    const std::vector<double>& values) {
  std::vector<ExperimentReport> reports;
  for (double value : values) {
    ExperimentConfig c = config;
    if (parameter == "alpha") c.graph_attack.alpha = value;
    else if (parameter == "T_G") c.graph_attack.similarity_threshold = value;
    else if (parameter == "gamma") c.node_attack.gamma = value;
    else if (parameter == "T_N") c.node_attack.similarity_threshold = value;
    else if (parameter == "T_S") c.node_attack.pruning_threshold = value;
    else if (parameter == "beta") {
      c.defense.rs_enabled = true;
      c.defense.smoothing.beta = value;
    } else {
      throw ConfigError("unknown sweep parameter: " + parameter);
    }
    reports.push_back(run_experiment(c));
  }
  return reports;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write metrics file: " + path);
  out << "run_id,task,seed,parameter,value,clean_acc_benign,clean_acc_backdoor,"
         "asr,cad,defense,beta\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.run_id << ',' << to_string(r.task) << ',' << r.seed << ',' << r.parameter
        << ',' << r.value << ',' << r.clean_acc_benign << ',' << r.clean_acc_backdoor
        << ',' << r.asr << ',' << r.cad << ',' << r.defense << ',' << r.beta << '\n';
  }
}

std::vector<MetricsRow> metrics_rows(const ExperimentReport& report,
                                     const std::string& run_id,
                                     const std::string& parameter, double value,
                                     const DefenseSettings& defense) {
  std::vector<MetricsRow> rows;
  for (const auto& s : report.per_seed) {
    MetricsRow row;
    row.run_id = run_id;
    row.task = report.task;
    row.seed = s.seed;
    row.parameter = parameter;
    row.value = value;
    row.clean_acc_benign = s.clean_accuracy_benign;
    row.clean_acc_backdoor = s.clean_accuracy_backdoored;
    row.asr = s.asr;
    row.cad = s.cad;
    row.defense = defense.rs_enabled ? "rs" : (defense.nc_enabled ? "nc" : "none");
    row.beta = defense.rs_enabled ? defense.smoothing.beta : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

json config_to_json_obj(const ExperimentConfig& c) {
  json j;
  j["task"] = to_string(c.task);
  j["dataset_path"] = c.dataset_path;
  j["synthetic"] = {
      {"kind", c.synthetic_kind == SyntheticKind::molecule_like ? "molecule_like"
                                                                : "citation_like"},
      {"n", c.synthetic_n},
      {"min_nodes", c.synthetic_params.min_nodes},
      {"max_nodes", c.synthetic_params.max_nodes},
      {"label_noise", c.synthetic_params.label_noise},
      {"num_nodes", c.synthetic_params.num_nodes},
      {"num_node_features", c.synthetic_params.num_node_features},
      {"num_classes", c.synthetic_params.num_classes},
      {"intra_edge_prob", c.synthetic_params.intra_edge_prob},
      {"inter_edge_prob", c.synthetic_params.inter_edge_prob},
      {"keyword_prob", c.synthetic_params.keyword_prob},
      {"background_prob", c.synthetic_params.background_prob},
      {"train_fraction", c.synthetic_params.train_fraction},
  };
  j["model"] = {{"kind", to_string(c.model_kind)}, {"hidden_dim", c.hidden_dim}};
  j["train"] = {{"epochs", c.train.epochs},
                {"learning_rate", c.train.learning_rate},
                {"weight_decay", c.train.weight_decay}};
  j["train_fraction"] = c.train_fraction;
  j["attack"] = to_string(c.attack);
  j["graph_attack"] = {{"alpha", c.graph_attack.alpha},
                       {"T_G", c.graph_attack.similarity_threshold},
                       {"target_class", c.graph_attack.target_class},
                       {"poison_fraction", c.graph_attack.poison_fraction}};
  j["node_attack"] = {{"gamma", c.node_attack.gamma},
                      {"T_N", c.node_attack.similarity_threshold},
                      {"T_S", c.node_attack.pruning_threshold},
                      {"target_class", c.node_attack.target_class},
                      {"poison_fraction", c.node_attack.poison_fraction}};
  j["fixed_attack"] = {{"trigger_size", c.fixed_attack.trigger_size},
                       {"anchors", c.fixed_attack.anchors}};
  j["defense"] = {{"rs_enabled", c.defense.rs_enabled},
                  {"beta", c.defense.smoothing.beta},
                  {"num_subsamples", c.defense.smoothing.num_subsamples},
                  {"nc_enabled", c.defense.nc_enabled},
                  {"nc_iterations", c.defense.nc_iterations},
                  {"nc_lambda", c.defense.nc_lambda}};
  j["triggered_test_fraction"] = c.triggered_test_fraction;
  j["exclude_target_class_from_asr"] = c.exclude_target_class_from_asr;
  j["prune_test_triggers"] = c.prune_test_triggers;
  j["seeds"] = c.seeds;
  return j;
}

ExperimentConfig config_from_json_obj(const json& j) {
  ExperimentConfig c;
  if (j.contains("task")) c.task = task_from_string(j["task"].get<std::string>());
  c.dataset_path = j.value("dataset_path", std::string{});
  if (j.contains("synthetic")) {
    const auto& s = j["synthetic"];
    if (s.contains("kind"))
      c.synthetic_kind = synthetic_kind_from_string(s["kind"].get<std::string>());
    c.synthetic_n = s.value("n", c.synthetic_n);
    c.synthetic_params.min_nodes = s.value("min_nodes", c.synthetic_params.min_nodes);
    c.synthetic_params.max_nodes = s.value("max_nodes", c.synthetic_params.max_nodes);
    c.synthetic_params.label_noise = s.value("label_noise", c.synthetic_params.label_noise);
    c.synthetic_params.num_nodes = s.value("num_nodes", c.synthetic_params.num_nodes);
    c.synthetic_params.num_node_features =
        s.value("num_node_features", c.synthetic_params.num_node_features);
    c.synthetic_params.num_classes = s.value("num_classes", c.synthetic_params.num_classes);
    c.synthetic_params.intra_edge_prob =
        s.value("intra_edge_prob", c.synthetic_params.intra_edge_prob);
    c.synthetic_params.inter_edge_prob =
        s.value("inter_edge_prob", c.synthetic_params.inter_edge_prob);
    c.synthetic_params.keyword_prob =
        s.value("keyword_prob", c.synthetic_params.keyword_prob);
    c.synthetic_params.background_prob =
        s.value("background_prob", c.synthetic_params.background_prob);
    c.synthetic_params.train_fraction =
        s.value("train_fraction", c.synthetic_params.train_fraction);
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    if (m.contains("kind")) c.model_kind = gnn_kind_from_string(m["kind"].get<std::string>());
    c.hidden_dim = m.value("hidden_dim", c.hidden_dim);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    c.train.epochs = t.value("epochs", c.train.epochs);
    c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
    c.train.weight_decay = t.value("weight_decay", c.train.weight_decay);
  }
  c.train_fraction = j.value("train_fraction", c.train_fraction);
  if (j.contains("attack"))
    c.attack = attack_kind_from_string(j["attack"].get<std::string>());
  if (j.contains("graph_attack")) {
    const auto& a = j["graph_attack"];
    c.graph_attack.alpha = a.value("alpha", c.graph_attack.alpha);
    c.graph_attack.similarity_threshold = a.value("T_G", c.graph_attack.similarity_threshold);
    c.graph_attack.target_class = a.value("target_class", c.graph_attack.target_class);
    c.graph_attack.poison_fraction = a.value("poison_fraction", c.graph_attack.poison_fraction);
  }
  if (j.contains("node_attack")) {
    const auto& a = j["node_attack"];
    c.node_attack.gamma = a.value("gamma", c.node_attack.gamma);
    c.node_attack.similarity_threshold = a.value("T_N", c.node_attack.similarity_threshold);
    c.node_attack.pruning_threshold = a.value("T_S", c.node_attack.pruning_threshold);
    c.node_attack.target_class = a.value("target_class", c.node_attack.target_class);
    c.node_attack.poison_fraction = a.value("poison_fraction", c.node_attack.poison_fraction);
  }
  if (j.contains("fixed_attack")) {
    c.fixed_attack.trigger_size =
        j["fixed_attack"].value("trigger_size", c.fixed_attack.trigger_size);
    c.fixed_attack.anchors = j["fixed_attack"].value("anchors", c.fixed_attack.anchors);
  }
  if (j.contains("defense")) {
    const auto& d = j["defense"];
    c.defense.rs_enabled = d.value("rs_enabled", c.defense.rs_enabled);
    c.defense.smoothing.beta = d.value("beta", c.defense.smoothing.beta);
    c.defense.smoothing.num_subsamples =
        d.value("num_subsamples", c.defense.smoothing.num_subsamples);
    c.defense.nc_enabled = d.value("nc_enabled", c.defense.nc_enabled);
    c.defense.nc_iterations = d.value("nc_iterations", c.defense.nc_iterations);
    c.defense.nc_lambda = d.value("nc_lambda", c.defense.nc_lambda);
  }
  c.triggered_test_fraction = j.value("triggered_test_fraction", c.triggered_test_fraction);
  c.exclude_target_class_from_asr =
      j.value("exclude_target_class_from_asr", c.exclude_target_class_from_asr);
  c.prune_test_triggers = j.value("prune_test_triggers", c.prune_test_triggers);
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  return c;
}

json cleanse_to_json(const CleanseReport& r) {
  return {{"perturbation_norms", r.perturbation_norms},
          {"anomaly_index", r.anomaly_index},
          {"flagged_classes", std::vector<int>(r.flagged_classes.begin(),
                                               r.flagged_classes.end())},
          {"flagging_enabled", r.flagging_enabled}};
}

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& config) {
  return config_to_json_obj(config).dump(2);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config: " + std::string(e.what()));
  }
  return config_from_json_obj(j);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return experiment_config_from_json(buf.str());
}

std::string config_hash(const ExperimentConfig& config) {
  const auto h = std::hash<std::string>{}(experiment_config_to_json(config));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016zx", h);
  return buf;
}

std::string report_to_json(const ExperimentReport& report) {
  json j;
  j["task"] = to_string(report.task);
  j["attack"] = to_string(report.attack);
  j["clean_accuracy_benign"] = report.clean_accuracy_benign;
  j["clean_accuracy_backdoored"] = report.clean_accuracy_backdoored;
  j["asr"] = report.asr;
  j["asr_stddev"] = report.asr_stddev;
  j["cad"] = report.cad;
  json seeds = json::array();
  for (const auto& s : report.per_seed) {
    json e;
    e["seed"] = s.seed;
    e["clean_accuracy_benign"] = s.clean_accuracy_benign;
    e["clean_accuracy_backdoored"] = s.clean_accuracy_backdoored;
    e["asr"] = s.asr;
    e["cad"] = s.cad;
    e["triggered_trials"] = s.triggered_trials;
    e["skipped_trigger_samples"] = s.skipped_trigger_samples;
    e["poisoned_samples"] = s.poisoned_samples;
    if (s.asr_smoothed) e["asr_smoothed"] = *s.asr_smoothed;
    if (s.accuracy_smoothed) e["accuracy_smoothed"] = *s.accuracy_smoothed;
    if (s.cleanse) e["neural_cleanse"] = cleanse_to_json(*s.cleanse);
    if (s.cleanse_benign) e["neural_cleanse_benign"] = cleanse_to_json(*s.cleanse_benign);
    seeds.push_back(std::move(e));
  }
  j["per_seed"] = std::move(seeds);
  return j.dump(2);
}

std::string plans_to_json(const std::vector<GraphPoisonPlan>& plans,
                          const std::vector<SkippedSample>& skipped) {
  json j;
  json arr = json::array();
  for (const auto& p : plans) {
    arr.push_back({{"sample_index", p.sample_index},
                   {"trigger_nodes", p.trigger_nodes},
                   {"trigger_values", p.trigger_values},
                   {"achieved_similarity", p.achieved_similarity},
                   {"relabel", p.relabel}});
  }
  j["plans"] = std::move(arr);
  json sk = json::array();
  for (const auto& s : skipped) sk.push_back({{"index", s.index}, {"reason", s.reason}});
  j["skipped"] = std::move(sk);
  return j.dump(2);
}

std::string plans_to_json(const std::vector<NodePoisonPlan>& plans,
                          const std::vector<SkippedNode>& skipped) {
  json j;
  json arr = json::array();
  for (const auto& p : plans) {
    json edges = json::array();
    for (const auto& [u, v] : p.pruned_edges) edges.push_back(json::array({u, v}));
    arr.push_back({{"node", p.node},
                   {"trigger_features", p.trigger_features},
                   {"trigger_value", p.trigger_value},
                   {"achieved_similarity", p.achieved_similarity},
                   {"pruned_edges", std::move(edges)},
                   {"relabel", p.relabel}});
  }
  j["plans"] = std::move(arr);
  json sk = json::array();
  for (const auto& s : skipped) sk.push_back({{"node", s.node}, {"reason", s.reason}});
  j["skipped"] = std::move(sk);
  return j.dump(2);
}

}  // namespace gbl
