#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tdlab/envs.hpp"
#include "tdlab/net.hpp"
#include "tdlab/transforms.hpp"

namespace tdlab {

// Frozen probe set with ground-truth targets: true values estimated by
// policy rollouts, or sampled discounted returns for continuing tasks.
// Serialized alongside experiments so every result pins its oracle.
struct EvaluationSet {
  enum class Kind { true_value, sampled_return };
  struct Entry {
    StateVector probe;
    double target;
  };

  Kind kind = Kind::true_value;
  std::vector<Entry> entries;
  std::string environment_id;
  std::string policy_ids;
  std::uint64_t seed = 0;
  std::int64_t step_budget = 0;

  void save(std::ostream& out) const;
  static EvaluationSet load(std::istream& in);
};

// Rolls the policy for total_steps across restarted episodes, samples
// sample_count visited states uniformly without replacement, and targets
// each with the undiscounted return of one policy rollout from that state.
// Throws if fewer than sample_count states were visited.
EvaluationSet build_rmsve_oracle(Environment& env, const Policy& policy, std::int64_t total_steps,
                                 int sample_count, Rng& rng, const std::string& environment_id = "",
                                 const std::string& policy_id = "");

// As above but each probe's target averages rollout_count rollouts;
// validation aid for stochastic rollouts.
EvaluationSet build_rmsve_oracle_averaged(Environment& env, const Policy& policy, std::int64_t total_steps,
                                          int sample_count, int rollout_count, Rng& rng,
                                          const std::string& environment_id = "",
                                          const std::string& policy_id = "");

// Continuing tasks with a discount-carried termination signal: per pair,
// follow the behavior policy Uniform{20..200} steps, record the state, then
// follow the target policy accumulating the discounted return until a zero
// discount, and resume the behavior policy for the next pair.
EvaluationSet build_rmsre_oracle(Environment& env, const Policy& behavior, const Policy& target,
                                 int pair_count, Rng& rng, const std::string& environment_id = "",
                                 const std::string& policy_ids = "");

// sqrt(mean((v(probe) - target)^2)); rmsve requires true-value targets,
// rmsre sampled-return targets.
double rmsve(const Transform& transform, const Approximator& approx, const EvaluationSet& set);
double rmsre(const Transform& transform, const Approximator& approx, const EvaluationSet& set);

struct LearningCurve {
  std::vector<double> values;
  std::string metric;
  std::uint64_t run_seed = 0;
};

struct AggregateCurve {
  std::vector<double> mean;
  std::vector<double> std_dev;  // sample, n-1
  std::vector<double> std_err;
};

AggregateCurve aggregate_runs(const std::vector<LearningCurve>& curves);

// Mean of the last ceil(fraction * length) entries.
double final_performance(const std::vector<double>& curve, double fraction);

struct SweepCell {
  double alpha = 0.0;
  std::vector<double> finals;  // per successful run
  double mean = 0.0;
  double std_err = 0.0;
  int failures = 0;
};

SweepCell make_sweep_cell(double alpha, std::vector<double> finals, int failures);

// The largest step size whose mean final performance lies within two
// standard errors of the best cell's mean. Cells are first restricted to
// the minimum failure count, so a fully diverged grid degenerates to the
// largest least-bad alpha.
double select_step_size(const std::vector<SweepCell>& cells, bool lower_is_better);

}  // namespace tdlab
