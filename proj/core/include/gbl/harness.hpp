#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gbl/attack_graph.hpp"
#include "gbl/attack_node.hpp"
#include "gbl/baseline.hpp"
#include "gbl/defense.hpp"
#include "gbl/model.hpp"
#include "gbl/synthetic.hpp"

namespace gbl {

enum class AttackKind { none, adaptive, fixed_baseline };

std::string to_string(AttackKind kind);
AttackKind attack_kind_from_string(const std::string& s);

struct DefenseSettings {
  bool rs_enabled = false;
  SmoothingConfig smoothing;
  bool nc_enabled = false;
  int nc_iterations = 100;
  double nc_lambda = 0.01;
};

struct ExperimentConfig {
  Task task = Task::graph_level;

  // Dataset source: a file path, or a synthetic spec when empty.
  std::string dataset_path;
  SyntheticKind synthetic_kind = SyntheticKind::molecule_like;
  int synthetic_n = 200;
  SyntheticParams synthetic_params;

  GnnKind model_kind = GnnKind::gcn;
  int hidden_dim = 32;
  TrainConfig train;
  double train_fraction = 0.8;

  AttackKind attack = AttackKind::adaptive;
  GraphTriggerConfig graph_attack;
  NodeTriggerConfig node_attack;
  FixedTriggerConfig fixed_attack;

  DefenseSettings defense;
  double triggered_test_fraction = 0.25;
  bool exclude_target_class_from_asr = true;
  bool prune_test_triggers = true;

  std::vector<std::uint64_t> seeds = {1, 2, 3};

  void validate() const;
};

/// Outcome of one seed. cad == clean_accuracy_benign -
/// clean_accuracy_backdoored holds exactly.
struct SeedReport {
  std::uint64_t seed = 0;
  double clean_accuracy_benign = 0.0;
  double clean_accuracy_backdoored = 0.0;
  double asr = 0.0;
  double cad = 0.0;
  int triggered_trials = 0;
  int skipped_trigger_samples = 0;
  int poisoned_samples = 0;

  std::optional<double> asr_smoothed;       // RS evaluation of the same trials
  std::optional<double> accuracy_smoothed;  // backdoored clean accuracy under RS
  std::optional<CleanseReport> cleanse;     // NC on the backdoored model
  std::optional<CleanseReport> cleanse_benign;
};

struct ExperimentReport {
  Task task = Task::graph_level;
  AttackKind attack = AttackKind::adaptive;
  double clean_accuracy_benign = 0.0;   // means over seeds
  double clean_accuracy_backdoored = 0.0;
  double asr = 0.0;
  double asr_stddev = 0.0;
  double cad = 0.0;
  std::vector<SeedReport> per_seed;
};

ExperimentReport run_graph_experiment(const ExperimentConfig& config);
ExperimentReport run_node_experiment(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config);

/// One report per parameter value, fixed seeds across values.
/// parameter is one of {alpha, T_G, gamma, T_N, T_S, beta}.
std::vector<ExperimentReport> sweep(const ExperimentConfig& config,
                                    const std::string& parameter,
                                    const std::vector<double>& values);

struct MetricsRow {
  std::string run_id;
  Task task = Task::graph_level;
  std::uint64_t seed = 0;
  std::string parameter = "-";
  double value = 0.0;
  double clean_acc_benign = 0.0;
  double clean_acc_backdoor = 0.0;
  double asr = 0.0;
  double cad = 0.0;
  std::string defense = "none";
  double beta = 0.0;
};

/// Fixed column order: run_id, task, seed, parameter, value,
/// clean_acc_benign, clean_acc_backdoor, asr, cad, defense, beta.
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

std::vector<MetricsRow> metrics_rows(const ExperimentReport& report,
                                     const std::string& run_id,
                                     const std::string& parameter = "-",
                                     double value = 0.0,
                                     const DefenseSettings& defense = {});

/// Stable hex id derived from the config's JSON echo; names run dirs.
std::string config_hash(const ExperimentConfig& config);

std::string experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

std::string report_to_json(const ExperimentReport& report);

std::string plans_to_json(const std::vector<GraphPoisonPlan>& plans,
                          const std::vector<SkippedSample>& skipped);
std::string plans_to_json(const std::vector<NodePoisonPlan>& plans,
                          const std::vector<SkippedNode>& skipped);

/// Loads the configured dataset (file or synthetic) for one seed.
Dataset resolve_dataset(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace gbl
