#include "tdlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tdlab {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

void ensure_parent_dir(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::ofstream open_text(const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::ofstream open_binary(const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  return out;
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "prediction") return ExperimentKind::prediction;
  if (s == "control") return ExperimentKind::control;
  if (s == "continuing") return ExperimentKind::continuing;
  throw std::runtime_error("unknown experiment kind: " + s);
}

const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::prediction: return "prediction";
    case ExperimentKind::control: return "control";
    default: return "continuing";
  }
}

const char* index_column(ExperimentKind k) {
  return k == ExperimentKind::continuing ? "step" : "episode";
}

}  // namespace

// -------------------------------------------------------------- configuration

ExperimentConfig ExperimentConfig::from_config(ConfigFile file) {
  ExperimentConfig cfg;
  cfg.raw = std::move(file);
  const ConfigFile& raw = cfg.raw;
  cfg.name = raw.get("experiment", "name");
  cfg.kind = parse_kind(raw.get("experiment", "kind"));
  cfg.environment_id = raw.get("experiment", "environment");
  cfg.num_runs = static_cast<int>(raw.get_int_or("experiment", "num_runs", 1));
  if (cfg.num_runs < 1) throw std::runtime_error("config: num_runs must be >= 1");
  cfg.base_seed = raw.get_uint_or("experiment", "base_seed", 0);
  cfg.oracle_path = raw.get_or("experiment", "oracle", "");
  cfg.out_dir = raw.get_or("output", "dir", "");
  cfg.checkpoint_mode = raw.get_or("output", "checkpoint", "first");
  if (cfg.checkpoint_mode != "none" && cfg.checkpoint_mode != "first" && cfg.checkpoint_mode != "all") {
    throw std::runtime_error("config: output.checkpoint must be none, first or all");
  }

  switch (cfg.kind) {
    case ExperimentKind::prediction:
      cfg.policy_id = raw.get("experiment", "policy");
      cfg.episodes = raw.get_int("experiment", "episodes");
      cfg.metric = raw.get_or("experiment", "metric", "rmsve");
      break;
    case ExperimentKind::control:
      cfg.episodes = raw.get_int("experiment", "episodes");
      cfg.metric = raw.get_or("experiment", "metric", "steps");
      break;
    case ExperimentKind::continuing:
      cfg.behavior_id = raw.get("experiment", "behavior");
      cfg.target_id = raw.get_or("experiment", "target", "");
      cfg.steps = raw.get_int("experiment", "steps");
      cfg.eval_every = raw.get_int("experiment", "eval_every");
      if (cfg.steps < 1 || cfg.eval_every < 1) throw std::runtime_error("config: steps and eval_every must be positive");
      cfg.metric = raw.get_or("experiment", "metric", "rmsre");
      break;
  }
  if (cfg.kind != ExperimentKind::continuing && cfg.episodes < 1) {
    throw std::runtime_error("config: episodes must be positive");
  }

  cfg.agent.alpha = raw.get_double_or("agent", "alpha", 0.0);
  cfg.agent.gamma = raw.get_double_or("agent", "gamma", 1.0);
  cfg.agent.lambda = raw.get_double_or("agent", "lambda", 0.0);
  cfg.agent.epsilon = raw.get_double_or("agent", "epsilon", 0.1);
  cfg.agent.validate();
  if (raw.has("agent", "alpha_grid")) {
    cfg.alpha_grid = raw.get_doubles("agent", "alpha_grid");
    for (std::size_t i = 1; i < cfg.alpha_grid.size(); ++i) {
      if (!(cfg.alpha_grid[i] > cfg.alpha_grid[i - 1])) {
        throw std::runtime_error("config: alpha_grid must be strictly increasing");
      }
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_config(ConfigFile::parse_file(path));
}

// ------------------------------------------------------------------ factories

std::unique_ptr<Environment> build_environment(const ConfigFile& raw) {
  const std::string id = raw.get("experiment", "environment");
  if (id == "synth_collision") {
    return std::make_unique<SyntheticCollision>(
        static_cast<int>(raw.get_int_or("environment", "min_distance", 5)),
        static_cast<int>(raw.get_int_or("environment", "max_distance", 25)));
  }
  const int cap = static_cast<int>(raw.get_int_or("environment", "max_episode_steps", 0));
  return make_environment(id, cap);
}

std::unique_ptr<Transform> build_transform(const ConfigFile& raw, const Environment& env) {
  const std::string kind = raw.get("transform", "kind");
  const std::vector<Bounds>& bounds = env.state_bounds();

  if (kind == "identity") return std::make_unique<IdentityTransform>(bounds);
  if (kind == "epigraph") return std::make_unique<EpigraphTransform>(bounds);

  if (kind == "tile_coding") {
    TileCodingConfig cfg;
    cfg.mode = raw.get_or("transform", "mode", "joint") == "separate" ? TileCodingConfig::Mode::separate
                                                                      : TileCodingConfig::Mode::joint;
    cfg.num_tilings = static_cast<int>(raw.get_int("transform", "num_tilings"));
    cfg.tiles_per_dim = raw.get_ints("transform", "tiles_per_dim");
    if (cfg.tiles_per_dim.size() == 1 && env.state_dim() > 1) {
      cfg.tiles_per_dim.assign(static_cast<std::size_t>(env.state_dim()), cfg.tiles_per_dim[0]);
    }
    cfg.memory_size = static_cast<int>(raw.get_int_or("transform", "memory_size", 0));
    cfg.input_bounds = bounds;
    return std::make_unique<TileCodingTransform>(std::move(cfg));
  }

  if (kind == "lift_project") {
    LiftProjectConfig cfg;
    cfg.radius = raw.get_double("transform", "radius");
    cfg.shift = raw.get_double_or("transform", "shift", 0.0);
    cfg.mode = raw.get_or("transform", "mode", "joint") == "separate" ? LiftProjectConfig::Mode::separate
                                                                      : LiftProjectConfig::Mode::joint;
    cfg.input_bounds = bounds;
    return std::make_unique<LiftProjectTransform>(std::move(cfg));
  }

  if (kind == "rbf") {
    RbfConfig cfg;
    cfg.num_centers = static_cast<int>(raw.get_int("transform", "num_centers"));
    cfg.width = raw.get_double_or("transform", "width", 0.1);
    cfg.sparsify_threshold = raw.get_double_or("transform", "sparsify_threshold", 0.0);
    cfg.centers_seed = raw.get_uint_or("transform", "centers_seed", 0);
    cfg.input_bounds = bounds;
    return std::make_unique<RbfTransform>(std::move(cfg));
  }

  throw std::runtime_error("unknown transform kind: " + kind);
}

std::unique_ptr<Approximator> build_approximator(const ConfigFile& raw, const Transform& transform,
                                                 int num_heads, std::uint64_t init_seed) {
  const std::string kind = raw.get("approximator", "kind");
  if (kind == "linear") {
    return std::make_unique<LinearModel>(transform.output_dim(), num_heads);
  }
  if (kind == "relu_net") {
    const int hidden = static_cast<int>(raw.get_int("approximator", "hidden"));
    InitSpec spec;
    spec.weight_std = raw.get_double_or("approximator", "weight_std", 0.5);
    spec.bias_std = raw.get_double_or("approximator", "bias_std", 0.1);
    spec.seed = init_seed;
    if (raw.get_or("approximator", "upward", "none") == "extra") {
      spec.upward_dims = transform.extra_coordinate_indices();
    }
    return std::make_unique<ReluNet>(ReluNet::init(transform.output_dim(), hidden, num_heads, spec));
  }
  throw std::runtime_error("unknown approximator kind: " + kind);
}

// ----------------------------------------------------------------------- runs

RunResult execute_run(const ExperimentConfig& cfg, int run_index, const EvaluationSet* oracle,
                      double alpha, const std::string& artifact_prefix) {
  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  res.seed = cfg.base_seed + static_cast<std::uint64_t>(run_index);
  res.curve.metric = cfg.metric;
  res.curve.run_seed = res.seed;

  auto env = build_environment(cfg.raw);
  auto transform = build_transform(cfg.raw, *env);
  const int heads = cfg.kind == ExperimentKind::control ? env->num_actions() : 1;
  auto approx = build_approximator(cfg.raw, *transform, heads, hash64(res.seed));

  AgentConfig agent = cfg.agent;
  agent.alpha = alpha;
  Rng rng(res.seed);
  TraceVector z(approx->num_params());
  GradBuffer scratch;

  double abs_delta_sum = 0.0;
  std::int64_t abs_delta_count = 0;

  try {
    switch (cfg.kind) {
      case ExperimentKind::prediction: {
        auto policy = make_policy(cfg.policy_id);
        for (std::int64_t ep = 0; ep < cfg.episodes; ++ep) {
          const EpisodeRecord rec =
              run_prediction_episode(*env, *policy, *transform, *approx, agent, z, scratch, rng);
          abs_delta_sum += rec.mean_abs_delta;
          ++abs_delta_count;
          res.curve.values.push_back(rmsve(*transform, *approx, *oracle));
          res.aux_steps.push_back(rec.steps);
          res.aux_return.push_back(rec.undiscounted_return);
        }
        break;
      }
      case ExperimentKind::control: {
        for (std::int64_t ep = 0; ep < cfg.episodes; ++ep) {
          const EpisodeRecord rec = run_control_episode(*env, *transform, *approx, agent, z, scratch, rng);
          abs_delta_sum += rec.mean_abs_delta;
          ++abs_delta_count;
          res.curve.values.push_back(rec.steps);
          res.aux_return.push_back(rec.undiscounted_return);
        }
        break;
      }
      case ExperimentKind::continuing: {
        auto behavior = make_policy(cfg.behavior_id);
        res.curve.values.push_back(rmsre(*transform, *approx, *oracle));
        const std::int64_t eval_every = cfg.eval_every;
        auto on_step = [&](const StepDiagnostics& d) {
          abs_delta_sum += std::abs(d.delta);
          ++abs_delta_count;
          if ((d.step + 1) % eval_every == 0) {
            res.curve.values.push_back(rmsre(*transform, *approx, *oracle));
          }
        };
        run_prediction_stream(*env, *behavior, *transform, *approx, agent, cfg.steps, z, scratch, rng,
                              on_step);
        break;
      }
    }
  } catch (const DivergenceError&) {
    res.failed = true;
    res.failure_index = static_cast<std::int64_t>(res.curve.values.size());
  }

  res.mean_abs_delta = abs_delta_count > 0 ? abs_delta_sum / static_cast<double>(abs_delta_count) : 0.0;
  res.hash_collisions = transform->hash_collisions();
  res.clamp_events = transform->clamp_events();
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!artifact_prefix.empty()) {
    auto ckpt = open_binary(artifact_prefix + ".ckpt");
    approx->save(ckpt);
    auto tf = open_text(artifact_prefix + ".transform");
    transform->save(tf);
  }
  return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const EvaluationSet* oracle,
                                double alpha, std::ostream* log) {
  ExperimentResult result;
  for (int i = 0; i < cfg.num_runs; ++i) {
    std::string prefix;
    if (!cfg.out_dir.empty() &&
        (cfg.checkpoint_mode == "all" || (cfg.checkpoint_mode == "first" && i == 0))) {
      std::ostringstream name;
      name << cfg.out_dir << "/run_" << std::setw(3) << std::setfill('0') << i;
      prefix = name.str();
    }
    RunResult run = execute_run(cfg, i, oracle, alpha, prefix);
    if (log) {
      *log << "run " << i << " seed " << run.seed;
      if (run.failed) {
        *log << " diverged after " << run.failure_index << " entries";
      } else if (!run.curve.values.empty()) {
        *log << " final " << fmt(run.curve.values.back());
      }
      *log << " (" << fmt(run.wall_seconds) << "s)\n";
    }
    result.runs.push_back(std::move(run));
  }

  std::vector<LearningCurve> complete;
  for (const auto& r : result.runs) {
    if (!r.failed) complete.push_back(r.curve);
  }
  result.completed = static_cast<int>(complete.size());
  if (!complete.empty()) result.aggregate = aggregate_runs(complete);
  return result;
}

// ------------------------------------------------------------------- commands

namespace {

EvaluationSet load_oracle(const ExperimentConfig& cfg) {
  if (cfg.oracle_path.empty()) {
    throw std::runtime_error("config: experiment.oracle is required for metric " + cfg.metric);
  }
  std::ifstream in(cfg.oracle_path);
  if (!in) throw std::runtime_error("cannot open oracle: " + cfg.oracle_path);
  return EvaluationSet::load(in);
}

void write_run_csv(const ExperimentConfig& cfg, const RunResult& run, const std::string& path) {
  auto out = open_text(path);
  out << "# config " << cfg.raw.hash_hex() << " seed " << run.seed << "\n";
  if (run.failed) out << "# failed_at " << run.failure_index << "\n";
  switch (cfg.kind) {
    case ExperimentKind::prediction:
      out << "episode,rmsve,steps,episode_return\n";
      for (std::size_t i = 0; i < run.curve.values.size(); ++i) {
        out << (i + 1) << "," << fmt(run.curve.values[i]) << "," << fmt(run.aux_steps[i]) << ","
            << fmt(run.aux_return[i]) << "\n";
      }
      break;
    case ExperimentKind::control:
      out << "episode,steps,episode_return\n";
      for (std::size_t i = 0; i < run.curve.values.size(); ++i) {
        out << (i + 1) << "," << fmt(run.curve.values[i]) << "," << fmt(run.aux_return[i]) << "\n";
      }
      break;
    case ExperimentKind::continuing:
      out << "step," << cfg.metric << "\n";
      for (std::size_t i = 0; i < run.curve.values.size(); ++i) {
        out << (static_cast<std::int64_t>(i) * cfg.eval_every) << "," << fmt(run.curve.values[i]) << "\n";
      }
      break;
  }
}

void write_aggregate_csv(const ExperimentConfig& cfg, const ExperimentResult& result,
                         const std::string& path) {
  auto out = open_text(path);
  out << "# config " << cfg.raw.hash_hex() << " runs " << result.completed << " of " << cfg.num_runs
      << "\n";
  out << index_column(cfg.kind) << ",mean,std,stderr\n";
  for (std::size_t i = 0; i < result.aggregate.mean.size(); ++i) {
    const std::int64_t idx = cfg.kind == ExperimentKind::continuing
                                 ? static_cast<std::int64_t>(i) * cfg.eval_every
                                 : static_cast<std::int64_t>(i) + 1;
    out << idx << "," << fmt(result.aggregate.mean[i]) << "," << fmt(result.aggregate.std_dev[i]) << ","
        << fmt(result.aggregate.std_err[i]) << "\n";
  }
}

void write_summary_csv(const ExperimentConfig& cfg, const ExperimentResult& result, double alpha,
                       const std::string& path) {
  std::vector<double> finals;
  for (const auto& r : result.runs) {
    if (!r.failed) finals.push_back(final_performance(r.curve.values, 0.05));
  }
  const SweepCell cell = make_sweep_cell(alpha, std::move(finals), cfg.num_runs - result.completed);
  auto out = open_text(path);
  out << "# config " << cfg.raw.hash_hex() << "\n";
  if (cfg.kind == ExperimentKind::continuing) {
    out << "# off_policy uncorrected behavior=" << cfg.behavior_id << " target=" << cfg.target_id << "\n";
  }
  out << "method,kind,metric,lambda,alpha,final_mean,final_stderr,failures,num_runs\n";
  out << cfg.name << "," << kind_name(cfg.kind) << "," << cfg.metric << "," << fmt(cfg.agent.lambda)
      << "," << fmt(alpha) << ",";
  if (cell.finals.empty()) {
    out << "nan,nan";
  } else {
    out << fmt(cell.mean) << "," << fmt(cell.std_err);
  }
  out << "," << cell.failures << "," << cfg.num_runs << "\n";
}

}  // namespace

void run_experiment_command(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.out_dir.empty()) throw std::runtime_error("config: output.dir is required");
  if (!cfg.raw.has("agent", "alpha")) throw std::runtime_error("config: agent.alpha is required for run");
  EvaluationSet oracle;
  const bool needs_oracle = cfg.kind != ExperimentKind::control;
  if (needs_oracle) oracle = load_oracle(cfg);

  fs::create_directories(cfg.out_dir);
  log << cfg.name << ": " << cfg.num_runs << " runs, alpha " << fmt(cfg.agent.alpha) << ", lambda "
      << fmt(cfg.agent.lambda) << "\n";
  const ExperimentResult result =
      run_experiment(cfg, needs_oracle ? &oracle : nullptr, cfg.agent.alpha, &log);

  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    std::ostringstream name;
    name << cfg.out_dir << "/run_" << std::setw(3) << std::setfill('0') << i << ".csv";
    write_run_csv(cfg, result.runs[i], name.str());
  }
  write_aggregate_csv(cfg, result, cfg.out_dir + "/aggregate.csv");
  write_summary_csv(cfg, result, cfg.agent.alpha, cfg.out_dir + "/summary.csv");
  log << "completed " << result.completed << "/" << cfg.num_runs << " runs, results in " << cfg.out_dir
      << "\n";
}

void run_sweep_command(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.out_dir.empty()) throw std::runtime_error("config: output.dir is required");
  if (cfg.alpha_grid.empty()) throw std::runtime_error("config: agent.alpha_grid is required for sweeps");
  EvaluationSet oracle;
  const bool needs_oracle = cfg.kind != ExperimentKind::control;
  if (needs_oracle) oracle = load_oracle(cfg);

  fs::create_directories(cfg.out_dir);
  ExperimentConfig run_cfg = cfg;
  run_cfg.checkpoint_mode = "none";

  std::vector<SweepCell> cells;
  auto runs_out = open_text(cfg.out_dir + "/sweep_runs.csv");
  runs_out << "# config " << cfg.raw.hash_hex() << "\n";
  runs_out << "alpha,run,seed,final,failed\n";
  for (double alpha : cfg.alpha_grid) {
    log << "alpha " << fmt(alpha) << "\n";
    const ExperimentResult result = run_experiment(run_cfg, needs_oracle ? &oracle : nullptr, alpha, &log);
    std::vector<double> finals;
    int failures = 0;
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
      const RunResult& r = result.runs[i];
      runs_out << fmt(alpha) << "," << i << "," << r.seed << ",";
      if (r.failed) {
        ++failures;
        runs_out << "nan,1\n";
      } else {
        const double final = final_performance(r.curve.values, 0.05);
        finals.push_back(final);
        runs_out << fmt(final) << ",0\n";
      }
    }
    cells.push_back(make_sweep_cell(alpha, std::move(finals), failures));
  }

  const double selected = select_step_size(cells, cfg.lower_is_better());
  auto out = open_text(cfg.out_dir + "/sweep.csv");
  out << "# config " << cfg.raw.hash_hex() << "\n";
  out << "alpha,mean_final,std_err,failures,num_runs\n";
  for (const auto& c : cells) {
    out << fmt(c.alpha) << ",";
    if (c.finals.empty()) {
      out << "nan,nan";
    } else {
      out << fmt(c.mean) << "," << fmt(c.std_err);
    }
    out << "," << c.failures << "," << cfg.num_runs << "\n";
  }
  out << "# selected_alpha " << fmt(selected) << "\n";
  log << "selected alpha = " << fmt(selected) << "\n";
}

void run_oracle_command(const ConfigFile& cfg, std::ostream& log) {
  const std::string kind = cfg.get("oracle", "kind");
  const std::string out_path = cfg.get("oracle", "out");
  const std::uint64_t seed = cfg.get_uint_or("oracle", "seed", 0);
  auto env = build_environment(cfg);
  Rng rng(seed);

  EvaluationSet set;
  if (kind == "rmsve") {
    auto policy = make_policy(cfg.get("oracle", "policy"));
    set = build_rmsve_oracle(*env, *policy, cfg.get_int("oracle", "total_steps"),
                             static_cast<int>(cfg.get_int("oracle", "sample_count")), rng,
                             cfg.get("experiment", "environment"), cfg.get("oracle", "policy"));
  } else if (kind == "rmsre") {
    auto behavior = make_policy(cfg.get("oracle", "behavior"));
    auto target = make_policy(cfg.get("oracle", "target"));
    set = build_rmsre_oracle(*env, *behavior, *target,
                             static_cast<int>(cfg.get_int("oracle", "pair_count")), rng,
                             cfg.get("experiment", "environment"),
                             cfg.get("oracle", "behavior") + "|" + cfg.get("oracle", "target"));
  } else {
    throw std::runtime_error("unknown oracle kind: " + kind);
  }
  set.seed = seed;

  auto out = open_text(out_path);
  set.save(out);

  double mn = std::numeric_limits<double>::infinity(), mx = -mn, sum = 0.0;
  for (const auto& e : set.entries) {
    mn = std::min(mn, e.target);
    mx = std::max(mx, e.target);
    sum += e.target;
  }
  log << "wrote " << set.entries.size() << " probes to " << out_path << "\n";
  log << "targets: mean " << fmt(sum / static_cast<double>(set.entries.size())) << ", min " << fmt(mn)
      << ", max " << fmt(mx) << "\n";
}

void run_report_command(const std::vector<std::string>& result_dirs, const std::string& out_csv,
                        std::ostream& log) {
  if (result_dirs.empty()) throw std::runtime_error("report needs at least one result directory");

  struct Row {
    std::string method, kind, metric, lambda, alpha;
    double final_mean, final_stderr;
    int failures, num_runs;
  };
  std::vector<Row> rows;
  for (const auto& dir : result_dirs) {
    const std::string path = dir + "/summary.csv";
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    const std::size_t rows_before = rows.size();
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!have_header) {
        if (line != "method,kind,metric,lambda,alpha,final_mean,final_stderr,failures,num_runs") {
          throw std::runtime_error("unexpected summary schema in " + path);
        }
        have_header = true;
        continue;
      }
      const auto cells = split_csv_row(line);
      if (cells.size() != 9) throw std::runtime_error("malformed summary row in " + path);
      Row r;
      r.method = cells[0];
      r.kind = cells[1];
      r.metric = cells[2];
      r.lambda = cells[3];
      r.alpha = cells[4];
      r.final_mean = std::stod(cells[5]);
      r.final_stderr = std::stod(cells[6]);
      r.failures = std::stoi(cells[7]);
      r.num_runs = std::stoi(cells[8]);
      rows.push_back(std::move(r));
    }
    if (!have_header || rows.size() == rows_before) {
      throw std::runtime_error("no summary rows in " + path);
    }
  }

  for (const auto& r : rows) {
    if (r.metric != rows[0].metric) {
      throw std::runtime_error("refusing to merge mixed metrics: " + rows[0].metric + " vs " + r.metric);
    }
  }
  const bool lower_better = rows[0].metric != "return";
  std::stable_sort(rows.begin(), rows.end(), [lower_better](const Row& a, const Row& b) {
    const double x = std::isnan(a.final_mean) ? std::numeric_limits<double>::infinity() : a.final_mean;
    const double y = std::isnan(b.final_mean) ? std::numeric_limits<double>::infinity() : b.final_mean;
    return lower_better ? x < y : x > y;
  });

  log << std::left << std::setw(24) << "method" << std::setw(12) << "kind" << std::setw(8) << "metric"
      << std::setw(8) << "lambda" << std::setw(12) << "alpha" << std::setw(24) << "final(mean+-stderr)"
      << "failure_rate\n";
  bool any_continuing = false;
  for (const auto& r : rows) {
    std::ostringstream final_col;
    final_col << fmt(r.final_mean) << " +- " << fmt(r.final_stderr);
    log << std::left << std::setw(24) << r.method << std::setw(12) << r.kind << std::setw(8) << r.metric
        << std::setw(8) << r.lambda << std::setw(12) << r.alpha << std::setw(24) << final_col.str()
        << fmt(static_cast<double>(r.failures) / r.num_runs) << "\n";
    if (r.kind == "continuing") any_continuing = true;
  }
  if (any_continuing) {
    log << "note: continuing-task rows report uncorrected off-policy returns\n";
  }

  if (!out_csv.empty()) {
    auto out = open_text(out_csv);
    out << "method,kind,metric,lambda,alpha,final_mean,final_stderr,failures,num_runs,failure_rate\n";
    for (const auto& r : rows) {
      out << r.method << "," << r.kind << "," << r.metric << "," << r.lambda << "," << r.alpha << ","
          << fmt(r.final_mean) << "," << fmt(r.final_stderr) << "," << r.failures << "," << r.num_runs
          << "," << fmt(static_cast<double>(r.failures) / r.num_runs) << "\n";
    }
  }
}

}  // namespace tdlab
