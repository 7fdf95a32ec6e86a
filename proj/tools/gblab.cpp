// gblab: train small GNNs, plant constraint-aware backdoor triggers,
// and measure attack/defense outcomes. One subcommand per pipeline
// stage; `eval` runs the whole experiment.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gbl/dataset_io.hpp"
#include "gbl/errors.hpp"
#include "gbl/harness.hpp"
#include "gbl/model_io.hpp"
#include "gbl/rng.hpp"

namespace fs = std::filesystem;
using namespace gbl;

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "runs";

  // flag overrides of config keys
  std::optional<std::string> task;
  std::optional<std::string> model;
  std::optional<std::string> attack;
  std::optional<std::string> dataset_path;
  std::optional<double> alpha, t_g, gamma, t_n, t_s, beta, poison_fraction;
  std::optional<int> epochs, hidden_dim, target_class;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config file (JSON)");
  cmd->add_option("--seed", opts.seed, "override: run a single seed");
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--task", opts.task, "graph_level | node_level");
  cmd->add_option("--model", opts.model, "gcn | sage_mean");
  cmd->add_option("--attack", opts.attack, "none | adaptive | fixed_baseline");
  cmd->add_option("--dataset", opts.dataset_path, "dataset file (else synthetic)");
  cmd->add_option("--alpha", opts.alpha, "trigger node fraction (graph-level)");
  cmd->add_option("--T_G", opts.t_g, "graph trigger similarity threshold");
  cmd->add_option("--gamma", opts.gamma, "trigger feature fraction (node-level)");
  cmd->add_option("--T_N", opts.t_n, "node trigger similarity threshold");
  cmd->add_option("--T_S", opts.t_s, "edge pruning threshold");
  cmd->add_option("--beta", opts.beta, "smoothing intensity");
  cmd->add_option("--poison-fraction", opts.poison_fraction, "poisoned share of train data");
  cmd->add_option("--epochs", opts.epochs, "training epochs");
  cmd->add_option("--hidden-dim", opts.hidden_dim, "hidden layer width");
  cmd->add_option("--target-class", opts.target_class, "backdoor target class");
}

ExperimentConfig build_config(const CommonOpts& opts) {
  ExperimentConfig config;
  if (!opts.config_path.empty()) config = load_experiment_config(opts.config_path);
  if (opts.task) config.task = task_from_string(*opts.task);
  if (opts.model) config.model_kind = gnn_kind_from_string(*opts.model);
  if (opts.attack) config.attack = attack_kind_from_string(*opts.attack);
  if (opts.dataset_path) config.dataset_path = *opts.dataset_path;
  if (opts.alpha) config.graph_attack.alpha = *opts.alpha;
  if (opts.t_g) config.graph_attack.similarity_threshold = *opts.t_g;
  if (opts.gamma) config.node_attack.gamma = *opts.gamma;
  if (opts.t_n) config.node_attack.similarity_threshold = *opts.t_n;
  if (opts.t_s) config.node_attack.pruning_threshold = *opts.t_s;
  if (opts.beta) config.defense.smoothing.beta = *opts.beta;
  if (opts.poison_fraction) {
    config.graph_attack.poison_fraction = *opts.poison_fraction;
    config.node_attack.poison_fraction = *opts.poison_fraction;
  }
  if (opts.epochs) config.train.epochs = *opts.epochs;
  if (opts.hidden_dim) config.hidden_dim = *opts.hidden_dim;
  if (opts.target_class) {
    config.graph_attack.target_class = *opts.target_class;
    config.node_attack.target_class = *opts.target_class;
    config.fixed_attack.target_class = *opts.target_class;
  }
  if (opts.seed) config.seeds = {*opts.seed};
  // node-level runs default to the citation-style generator and a
  // larger triggered share of the test nodes
  if (config.task == Task::node_level && opts.config_path.empty()) {
    config.synthetic_kind = SyntheticKind::citation_like;
    config.triggered_test_fraction = 0.5;
    config.node_attack.poison_fraction = 0.05;
  }
  return config;
}

fs::path run_dir(const ExperimentConfig& config, const std::string& out) {
  fs::path dir = fs::path(out) / config_hash(config);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
}

void print_report(const ExperimentReport& report) {
  std::printf("task=%s attack=%s\n", to_string(report.task).c_str(),
              to_string(report.attack).c_str());
  std::printf("clean_acc_benign   %.4f\n", report.clean_accuracy_benign);
  std::printf("clean_acc_backdoor %.4f\n", report.clean_accuracy_backdoored);
  std::printf("asr                %.4f (stddev %.4f)\n", report.asr, report.asr_stddev);
  std::printf("cad                %.4f\n", report.cad);
  for (const auto& s : report.per_seed) {
    std::printf("  seed %llu: asr=%.4f cad=%.4f trials=%d skipped=%d poisoned=%d",
                static_cast<unsigned long long>(s.seed), s.asr, s.cad,
                s.triggered_trials, s.skipped_trigger_samples, s.poisoned_samples);
    if (s.asr_smoothed) std::printf(" asr_rs=%.4f", *s.asr_smoothed);
    if (s.accuracy_smoothed) std::printf(" acc_rs=%.4f", *s.accuracy_smoothed);
    if (s.cleanse) {
      std::printf(" nc_flags=[");
      bool first = true;
      for (int c : s.cleanse->flagged_classes) {
        std::printf(first ? "%d" : ",%d", c);
        first = false;
      }
      std::printf("]");
    }
    std::printf("\n");
  }
}

int run_eval(const CommonOpts& opts, bool force_rs, bool force_nc) {
  ExperimentConfig config = build_config(opts);
  if (force_rs) config.defense.rs_enabled = true;
  if (force_nc) config.defense.nc_enabled = true;
  const auto dir = run_dir(config, opts.out);
  write_text(dir / "config.json", experiment_config_to_json(config));
  const auto report = run_experiment(config);
  write_text(dir / "report.json", report_to_json(report));
  write_metrics_csv((dir / "metrics.csv").string(),
                    metrics_rows(report, config_hash(config), "-", 0.0, config.defense));
  print_report(report);
  std::printf("run dir: %s\n", dir.string().c_str());
  return 0;
}

std::uint64_t pick_seed(const ExperimentConfig& config) {
  return config.seeds.empty() ? 0 : config.seeds.front();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph backdoor laboratory"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset file");
  std::string gen_kind = "molecule_like";
  int gen_n = 200;
  gen->add_option("--kind", gen_kind, "molecule_like | citation_like");
  gen->add_option("--n", gen_n, "number of graphs (molecule_like)");
  add_common(gen, opts);

  auto* train_cmd = app.add_subcommand("train", "train a benign model");
  add_common(train_cmd, opts);

  auto* ag = app.add_subcommand("attack-graph", "compute graph-level poison plans");
  add_common(ag, opts);

  auto* an = app.add_subcommand("attack-node", "compute node-level poison plans");
  add_common(an, opts);

  auto* ev = app.add_subcommand("eval", "run the full attack experiment");
  add_common(ev, opts);

  auto* rs = app.add_subcommand("defend-rs", "experiment under randomized smoothing");
  add_common(rs, opts);

  auto* nc = app.add_subcommand("defend-nc", "experiment plus trigger reverse engineering");
  add_common(nc, opts);

  auto* sw = app.add_subcommand("sweep", "sweep one attack/defense parameter");
  std::string sweep_parameter;
  std::vector<double> sweep_values;
  sw->add_option("--parameter", sweep_parameter,
                 "alpha | T_G | gamma | T_N | T_S | beta")->required();
  sw->add_option("--values", sweep_values, "parameter values")->required();
  add_common(sw, opts);

  auto* rp = app.add_subcommand("report", "print a stored report");
  std::vector<std::string> report_paths;
  rp->add_option("paths", report_paths, "report.json files")->required();
  add_common(rp, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      ExperimentConfig config = build_config(opts);
      config.synthetic_kind = synthetic_kind_from_string(gen_kind);
      config.synthetic_n = gen_n;
      config.task = config.synthetic_kind == SyntheticKind::molecule_like
                        ? Task::graph_level
                        : Task::node_level;
      config.dataset_path.clear();
      const auto seed = opts.seed.value_or(pick_seed(config));
      Dataset ds = resolve_dataset(config, seed);
      fs::path out = opts.out;
      if (out.extension().empty()) {
        fs::create_directories(out);
        out /= (gen_kind + "_" + std::to_string(seed) + ".jsonl");
      } else if (out.has_parent_path()) {
        fs::create_directories(out.parent_path());
      }
      save_dataset(ds, out.string());
      std::printf("wrote %s (%zu sample%s)\n", out.string().c_str(), ds.samples.size(),
                  ds.samples.size() == 1 ? "" : "s");
    } else if (*train_cmd) {
      ExperimentConfig config = build_config(opts);
      const auto seed = pick_seed(config);
      Dataset full = resolve_dataset(config, seed);
      Dataset train_set = full;
      if (config.task == Task::graph_level)
        train_set = split(full, config.train_fraction, seed).first;
      Architecture arch;
      arch.kind = config.model_kind;
      arch.task = config.task;
      arch.layer_dims = {full.num_features(), config.hidden_dim, full.num_classes};
      TrainConfig tc = config.train;
      tc.seed = seed;
      Model model = train(train_set, arch, tc);
      const auto dir = run_dir(config, opts.out);
      save_model(model, (dir / "model.json").string());
      Dataset eval_set = full;
      if (config.task == Task::graph_level)
        eval_set = split(full, config.train_fraction, seed).second;
      std::printf("test accuracy %.4f\n", evaluate_accuracy(model, eval_set));
      std::printf("model: %s\n", (dir / "model.json").string().c_str());
    } else if (*ag) {
      ExperimentConfig config = build_config(opts);
      config.task = Task::graph_level;
      const auto seed = pick_seed(config);
      Dataset full = resolve_dataset(config, seed);
      Dataset train_set = split(full, config.train_fraction, seed).first;
      GraphTriggerConfig attack = config.graph_attack;
      attack.seed = seed;
      const auto result = poison_graph_dataset(train_set, attack);
      const auto dir = run_dir(config, opts.out);
      write_text(dir / "plans.json", plans_to_json(result.plans, result.skipped));
      save_dataset(result.poisoned, (dir / "poisoned.jsonl").string());
      std::printf("poisoned %zu graphs (%zu skipped); plans: %s\n", result.plans.size(),
                  result.skipped.size(), (dir / "plans.json").string().c_str());
    } else if (*an) {
      ExperimentConfig config = build_config(opts);
      config.task = Task::node_level;
      if (config.dataset_path.empty())
        config.synthetic_kind = SyntheticKind::citation_like;
      const auto seed = pick_seed(config);
      Dataset ds = resolve_dataset(config, seed);
      NodeTriggerConfig attack = config.node_attack;
      attack.seed = seed;
      // surrogate on the adversary-accessible prefix of the train nodes
      std::vector<int> train_nodes;
      for (std::size_t i = 0; i < ds.train_mask.size(); ++i)
        if (ds.train_mask[i]) train_nodes.push_back(static_cast<int>(i));
      auto rng = make_rng(seed, 0x6e6f64);
      std::shuffle(train_nodes.begin(), train_nodes.end(), rng);
      const auto budget = static_cast<std::size_t>(
          std::ceil(attack.poison_fraction * static_cast<double>(train_nodes.size())));
      Dataset accessible = ds;
      accessible.train_mask.assign(ds.train_mask.size(), false);
      for (std::size_t i = 0; i < budget && i < train_nodes.size(); ++i)
        accessible.train_mask[train_nodes[i]] = true;
      Architecture arch;
      arch.kind = config.model_kind;
      arch.task = Task::node_level;
      arch.layer_dims = {ds.num_features(), config.hidden_dim, ds.num_classes};
      TrainConfig tc = config.train;
      tc.seed = seed;
      Model surrogate = train(accessible, arch, tc);
      const auto result = poison_node_dataset(ds, surrogate, attack);
      const auto dir = run_dir(config, opts.out);
      write_text(dir / "plans.json", plans_to_json(result.plans, result.skipped));
      save_dataset(result.poisoned, (dir / "poisoned.json").string());
      std::printf("poisoned %zu nodes (%zu skipped); plans: %s\n", result.plans.size(),
                  result.skipped.size(), (dir / "plans.json").string().c_str());
    } else if (*ev) {
      return run_eval(opts, false, false);
    } else if (*rs) {
      return run_eval(opts, true, false);
    } else if (*nc) {
      return run_eval(opts, false, true);
    } else if (*sw) {
      ExperimentConfig config = build_config(opts);
      const auto dir = run_dir(config, opts.out);
      write_text(dir / "config.json", experiment_config_to_json(config));
      const auto reports = sweep(config, sweep_parameter, sweep_values);
      std::vector<MetricsRow> rows;
      std::ostringstream all;
      all << "[\n";
      for (std::size_t i = 0; i < reports.size(); ++i) {
        DefenseSettings defense = config.defense;
        if (sweep_parameter == "beta") {
          defense.rs_enabled = true;
          defense.smoothing.beta = sweep_values[i];
        }
        auto r = metrics_rows(reports[i], config_hash(config), sweep_parameter,
                              sweep_values[i], defense);
        rows.insert(rows.end(), r.begin(), r.end());
        all << report_to_json(reports[i]);
        all << (i + 1 < reports.size() ? ",\n" : "\n");
        std::printf("%s = %g:\n", sweep_parameter.c_str(), sweep_values[i]);
        print_report(reports[i]);
      }
      all << "]\n";
      write_text(dir / "sweep.json", all.str());
      write_metrics_csv((dir / "metrics.csv").string(), rows);
      std::printf("run dir: %s\n", dir.string().c_str());
    } else if (*rp) {
      for (const auto& path : report_paths) {
        std::ifstream f(path);
        if (!f) throw DataError("cannot open report: " + path);
        std::ostringstream buf;
        buf << f.rdbuf();
        std::printf("%s\n%s\n", path.c_str(), buf.str().c_str());
      }
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const ComputeError& e) {
    std::fprintf(stderr, "compute error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
