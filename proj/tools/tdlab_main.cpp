#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tdlab/harness.hpp"
#include "tdlab/kernels.hpp"

namespace {

void apply_overrides(tdlab::ConfigFile& cfg, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    const auto dot = s.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw std::runtime_error("--set expects section.key=value, got: " + s);
    }
    cfg.set(s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
  }
}

struct CommonArgs {
  std::string preset;
  std::string out;
  std::int64_t seed = -1;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--preset", args.preset, "preset name or config file path")->required();
  cmd->add_option("--out", args.out, "override the output location");
  cmd->add_option("--seed", args.seed, "override the base seed");
  cmd->add_option("--set", args.sets, "override a config entry, section.key=value");
}

tdlab::ConfigFile load_config(const CommonArgs& args) {
  tdlab::ConfigFile cfg = tdlab::ConfigFile::parse_file(tdlab::resolve_config_path(args.preset));
  apply_overrides(cfg, args.sets);
  return cfg;
}

tdlab::kernels::Isa parse_isa(const std::string& name) {
  if (name == "scalar") return tdlab::kernels::Isa::scalar;
  if (name == "avx2") return tdlab::kernels::Isa::avx2;
  if (name == "neon") return tdlab::kernels::Isa::neon;
  throw std::runtime_error("unknown kernel backend: " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incremental TD learning testbed"};
  app.require_subcommand(1);

  std::string kernels;
  app.add_option("--kernels", kernels, "force a kernel backend: scalar, avx2 or neon");

  CommonArgs oracle_args;
  auto* oracle_cmd = app.add_subcommand("oracle", "estimate ground-truth values for an evaluation set");
  add_common(oracle_cmd, oracle_args);

  CommonArgs run_args;
  double run_alpha = -1.0;
  int run_runs = -1;
  auto* run_cmd = app.add_subcommand("run", "train at a fixed step size and write learning curves");
  add_common(run_cmd, run_args);
  run_cmd->add_option("--alpha", run_alpha, "override the step size");
  run_cmd->add_option("--runs", run_runs, "override the number of runs");

  CommonArgs sweep_args;
  int sweep_runs = -1;
  auto* sweep_cmd = app.add_subcommand("sweep", "train across the step-size grid and pick one");
  add_common(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--runs", sweep_runs, "override the number of runs per step size");

  tdlab::HeatmapRequest heatmap_req;
  auto* heatmap_cmd = app.add_subcommand("heatmap", "render hidden-node response maps from a checkpoint");
  heatmap_cmd->add_option("--checkpoint", heatmap_req.checkpoint_path, "saved approximator")->required();
  heatmap_cmd->add_option("--preset", heatmap_req.config_path, "preset the checkpoint was trained with")
      ->required();
  heatmap_cmd->add_option("--transform", heatmap_req.transform_path, "saved transform artifact");
  heatmap_cmd->add_option("--nodes", heatmap_req.nodes, "'all' or comma-separated node indices");
  heatmap_cmd->add_option("--grid", heatmap_req.grid, "grid resolution per dimension");
  heatmap_cmd->add_option("--out", heatmap_req.out_dir, "output directory")->required();

  std::vector<std::string> report_dirs;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "merge summary files into a ranked table");
  report_cmd->add_option("dirs", report_dirs, "result directories containing summary.csv")->required();
  report_cmd->add_option("--out", report_out, "also write the merged table to this CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!kernels.empty()) tdlab::kernels::force(parse_isa(kernels));

    if (oracle_cmd->parsed()) {
      tdlab::ConfigFile cfg = load_config(oracle_args);
      if (oracle_args.seed >= 0) cfg.set("oracle", "seed", std::to_string(oracle_args.seed));
      if (!oracle_args.out.empty()) cfg.set("oracle", "out", oracle_args.out);
      tdlab::run_oracle_command(cfg, std::cout);
    } else if (run_cmd->parsed()) {
      tdlab::ConfigFile cfg = load_config(run_args);
      if (run_args.seed >= 0) cfg.set("experiment", "base_seed", std::to_string(run_args.seed));
      if (!run_args.out.empty()) cfg.set("output", "dir", run_args.out);
      if (run_alpha >= 0.0) cfg.set("agent", "alpha", std::to_string(run_alpha));
      if (run_runs > 0) cfg.set("experiment", "num_runs", std::to_string(run_runs));
      tdlab::run_experiment_command(tdlab::ExperimentConfig::from_config(std::move(cfg)), std::cout);
    } else if (sweep_cmd->parsed()) {
      tdlab::ConfigFile cfg = load_config(sweep_args);
      if (sweep_args.seed >= 0) cfg.set("experiment", "base_seed", std::to_string(sweep_args.seed));
      if (!sweep_args.out.empty()) cfg.set("output", "dir", sweep_args.out);
      if (sweep_runs > 0) cfg.set("experiment", "num_runs", std::to_string(sweep_runs));
      tdlab::run_sweep_command(tdlab::ExperimentConfig::from_config(std::move(cfg)), std::cout);
    } else if (heatmap_cmd->parsed()) {
      tdlab::run_heatmap_command(heatmap_req, std::cout);
    } else if (report_cmd->parsed()) {
      tdlab::run_report_command(report_dirs, report_out, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
