#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "tdlab/agents.hpp"
#include "tdlab/config.hpp"
#include "tdlab/envs.hpp"
#include "tdlab/evaluation.hpp"
#include "tdlab/net.hpp"
#include "tdlab/transforms.hpp"

namespace tdlab {

enum class ExperimentKind { prediction, control, continuing };

// Resolved experiment description. raw keeps the full config for the
// factories and for hashing into result files.
struct ExperimentConfig {
  std::string name;
  ExperimentKind kind = ExperimentKind::prediction;
  std::string environment_id;
  std::string policy_id;    // prediction
  std::string behavior_id;  // continuing: drives learning
  std::string target_id;    // continuing: return oracle provenance
  std::int64_t episodes = 0;
  std::int64_t steps = 0;
  std::int64_t eval_every = 0;
  int num_runs = 1;
  std::uint64_t base_seed = 0;
  std::string oracle_path;
  std::string metric;  // rmsve | steps | rmsre | return
  std::string out_dir;
  std::string checkpoint_mode = "first";  // none | first | all
  AgentConfig agent;
  std::vector<double> alpha_grid;
  ConfigFile raw;

  static ExperimentConfig from_config(ConfigFile file);
  static ExperimentConfig from_file(const std::string& path);
  bool lower_is_better() const { return metric != "return"; }
};

std::unique_ptr<Environment> build_environment(const ConfigFile& raw);
std::unique_ptr<Transform> build_transform(const ConfigFile& raw, const Environment& env);
std::unique_ptr<Approximator> build_approximator(const ConfigFile& raw, const Transform& transform,
                                                 int num_heads, std::uint64_t init_seed);

struct RunResult {
  std::uint64_t seed = 0;
  LearningCurve curve;              // experiment metric per episode / eval point
  std::vector<double> aux_steps;    // episodic: steps per episode
  std::vector<double> aux_return;   // episodic: undiscounted return per episode
  bool failed = false;
  std::int64_t failure_index = -1;  // curve entries completed before divergence
  double wall_seconds = 0.0;
  double mean_abs_delta = 0.0;
  std::uint64_t hash_collisions = 0;
  std::uint64_t clamp_events = 0;
};

// One independent run with absolute seed base_seed + run_index. A
// divergence is recorded in the result, never thrown. artifact_prefix, if
// non-empty, receives <prefix>.ckpt and <prefix>.transform.
RunResult execute_run(const ExperimentConfig& cfg, int run_index, const EvaluationSet* oracle,
                      double alpha, const std::string& artifact_prefix);

struct ExperimentResult {
  std::vector<RunResult> runs;
  AggregateCurve aggregate;  // over runs that completed every entry
  int completed = 0;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, const EvaluationSet* oracle,
                                double alpha, std::ostream* log);

// CLI entry points; they throw on declared errors and the frontend maps
// that to a nonzero exit.
void run_oracle_command(const ConfigFile& cfg, std::ostream& log);
void run_experiment_command(const ExperimentConfig& cfg, std::ostream& log);
void run_sweep_command(const ExperimentConfig& cfg, std::ostream& log);
void run_report_command(const std::vector<std::string>& result_dirs, const std::string& out_csv,
                        std::ostream& log);

struct HeatmapRequest {
  std::string checkpoint_path;
  std::string config_path;
  std::string transform_path;  // optional saved transform artifact
  std::string nodes = "all";   // "all" or comma-separated indices
  int grid = 100;
  std::string out_dir;
};

void run_heatmap_command(const HeatmapRequest& req, std::ostream& log);

// node's post-ReLU response over an n-by-n grid of cell centers spanning
// bounds (row-major, row = second state dimension).
std::vector<double> node_response_grid(const ReluNet& net, const Transform& transform,
                                       const std::vector<Bounds>& bounds, int node, int n);

// number of 4-connected components of {cells > 0}
int count_components(const std::vector<double>& matrix, int rows, int cols);

// 8-bit binary PGM, min-max scaled; a constant matrix maps to all zeros
void write_pgm(std::ostream& out, const std::vector<double>& matrix, int rows, int cols);

}  // namespace tdlab
