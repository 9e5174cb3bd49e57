#include "tdlab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tdlab {

namespace {

double rollout_return(Environment& env, const Policy& policy, const StateVector& start, Rng& rng) {
  env.set_state(start);
  double g = 0.0;
  while (true) {
    const int a = policy.act(env.state(), rng);
    const Transition tr = env.step(a, rng);
    g += tr.reward;
    if (tr.terminal || tr.truncated) return g;
  }
}

EvaluationSet build_rmsve_impl(Environment& env, const Policy& policy, std::int64_t total_steps,
                               int sample_count, int rollout_count, Rng& rng,
                               const std::string& environment_id, const std::string& policy_id) {
  if (sample_count < 1) throw std::invalid_argument("sample_count must be positive");
  if (env.continuing()) throw std::invalid_argument("true-value oracle needs an episodic task");

  std::vector<StateVector> visited;
  visited.reserve(static_cast<std::size_t>(std::min<std::int64_t>(total_steps, 1 << 24)));
  StateVector s = env.reset(rng);
  for (std::int64_t t = 0; t < total_steps; ++t) {
    visited.push_back(s);
    const Transition tr = env.step(policy.act(s, rng), rng);
    s = (tr.terminal || tr.truncated) ? env.reset(rng) : tr.next_state;
  }
  if (static_cast<std::int64_t>(visited.size()) < sample_count) {
    throw std::runtime_error("oracle: only " + std::to_string(visited.size()) + " states visited, need " +
                             std::to_string(sample_count));
  }

  // partial Fisher-Yates draw without replacement
  std::vector<std::size_t> idx(visited.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  EvaluationSet set;
  set.kind = EvaluationSet::Kind::true_value;
  set.environment_id = environment_id;
  set.policy_ids = policy_id;
  set.step_budget = total_steps;
  set.entries.reserve(static_cast<std::size_t>(sample_count));
  for (int i = 0; i < sample_count; ++i) {
    const std::size_t j = i + rng.uniform_below(idx.size() - i);
    std::swap(idx[i], idx[j]);
    const StateVector& probe = visited[idx[i]];
    double target = 0.0;
    for (int k = 0; k < rollout_count; ++k) target += rollout_return(env, policy, probe, rng);
    set.entries.push_back({probe, target / rollout_count});
  }
  return set;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

// -------------------------------------------------------------------- oracles

EvaluationSet build_rmsve_oracle(Environment& env, const Policy& policy, std::int64_t total_steps,
                                 int sample_count, Rng& rng, const std::string& environment_id,
                                 const std::string& policy_id) {
  return build_rmsve_impl(env, policy, total_steps, sample_count, 1, rng, environment_id, policy_id);
}

EvaluationSet build_rmsve_oracle_averaged(Environment& env, const Policy& policy, std::int64_t total_steps,
                                          int sample_count, int rollout_count, Rng& rng,
                                          const std::string& environment_id, const std::string& policy_id) {
  if (rollout_count < 1) throw std::invalid_argument("rollout_count must be positive");
  return build_rmsve_impl(env, policy, total_steps, sample_count, rollout_count, rng, environment_id,
                          policy_id);
}

EvaluationSet build_rmsre_oracle(Environment& env, const Policy& behavior, const Policy& target,
                                 int pair_count, Rng& rng, const std::string& environment_id,
                                 const std::string& policy_ids) {
  if (pair_count < 1) throw std::invalid_argument("pair_count must be positive");
  if (!env.continuing()) throw std::invalid_argument("sampled-return oracle needs a continuing task");

  EvaluationSet set;
  set.kind = EvaluationSet::Kind::sampled_return;
  set.environment_id = environment_id;
  set.policy_ids = policy_ids;
  set.entries.reserve(static_cast<std::size_t>(pair_count));
  env.reset(rng);
  for (int i = 0; i < pair_count; ++i) {
    const std::int64_t gap = rng.uniform_int(20, 200);
    for (std::int64_t t = 0; t < gap; ++t) env.step(behavior.act(env.state(), rng), rng);
    StateVector probe = env.state();
    double g = 0.0;
    double cum = 1.0;
    while (true) {
      const Transition tr = env.step(target.act(env.state(), rng), rng);
      g += cum * tr.reward;
      if (tr.discount == 0.0) break;
      cum *= tr.discount;
    }
    set.entries.push_back({std::move(probe), g});
    set.step_budget += gap;
  }
  return set;
}

// -------------------------------------------------------------------- metrics

namespace {

double rms_error(const Transform& transform, const Approximator& approx, const EvaluationSet& set) {
  if (set.entries.empty()) throw std::invalid_argument("empty evaluation set");
  double acc = 0.0;
  for (const auto& e : set.entries) {
    const double v = approx.value(transform.apply(e.probe), 0);
    acc += (v - e.target) * (v - e.target);
  }
  return std::sqrt(acc / static_cast<double>(set.entries.size()));
}

}  // namespace

double rmsve(const Transform& transform, const Approximator& approx, const EvaluationSet& set) {
  if (set.kind != EvaluationSet::Kind::true_value) throw std::invalid_argument("rmsve needs true-value targets");
  return rms_error(transform, approx, set);
}

double rmsre(const Transform& transform, const Approximator& approx, const EvaluationSet& set) {
  if (set.kind != EvaluationSet::Kind::sampled_return) {
    throw std::invalid_argument("rmsre needs sampled-return targets");
  }
  return rms_error(transform, approx, set);
}

// -------------------------------------------------------------- aggregation

AggregateCurve aggregate_runs(const std::vector<LearningCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("no curves to aggregate");
  const std::size_t len = curves[0].values.size();
  for (const auto& c : curves) {
    if (c.values.size() != len) throw std::invalid_argument("curve length mismatch");
  }
  AggregateCurve out;
  out.mean.resize(len);
  out.std_dev.resize(len);
  out.std_err.resize(len);
  const double n = static_cast<double>(curves.size());
  std::vector<double> column(curves.size());
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t r = 0; r < curves.size(); ++r) column[r] = curves[r].values[i];
    out.mean[i] = mean_of(column);
    out.std_dev[i] = sample_std(column, out.mean[i]);
    out.std_err[i] = out.std_dev[i] / std::sqrt(n);
  }
  return out;
}

double final_performance(const std::vector<double>& curve, double fraction) {
  if (curve.empty()) throw std::invalid_argument("empty curve");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must be in (0,1]");
  const auto window = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(curve.size())));
  double acc = 0.0;
  for (std::size_t i = curve.size() - window; i < curve.size(); ++i) acc += curve[i];
  return acc / static_cast<double>(window);
}

SweepCell make_sweep_cell(double alpha, std::vector<double> finals, int failures) {
  SweepCell cell;
  cell.alpha = alpha;
  cell.failures = failures;
  cell.finals = std::move(finals);
  if (!cell.finals.empty()) {
    cell.mean = mean_of(cell.finals);
    cell.std_err = sample_std(cell.finals, cell.mean) / std::sqrt(static_cast<double>(cell.finals.size()));
  }
  return cell;
}

double select_step_size(const std::vector<SweepCell>& cells, bool lower_is_better) {
  if (cells.empty()) throw std::invalid_argument("empty sweep");
  int min_failures = cells[0].failures;
  for (const auto& c : cells) min_failures = std::min(min_failures, c.failures);
  std::vector<const SweepCell*> candidates;
  for (const auto& c : cells) {
    if (c.failures == min_failures) candidates.push_back(&c);
  }

  const SweepCell* best = nullptr;
  for (const auto* c : candidates) {
    if (c->finals.empty()) continue;
    if (!best || (lower_is_better ? c->mean < best->mean : c->mean > best->mean)) best = c;
  }
  if (!best) {
    // every candidate cell diverged in all runs; fall back to the largest
    double alpha = candidates[0]->alpha;
    for (const auto* c : candidates) alpha = std::max(alpha, c->alpha);
    return alpha;
  }

  double alpha = best->alpha;
  const double slack = 2.0 * best->std_err;
  for (const auto* c : candidates) {
    if (c->finals.empty()) continue;
    const double gap = lower_is_better ? c->mean - best->mean : best->mean - c->mean;
    if (gap <= slack && c->alpha > alpha) alpha = c->alpha;
  }
  return alpha;
}

// ------------------------------------------------------------- serialization

void EvaluationSet::save(std::ostream& out) const {
  out << "tdlab-evalset v1\n";
  out << "kind " << (kind == Kind::true_value ? "true_value" : "sampled_return") << "\n";
  out << "environment " << environment_id << "\n";
  out << "policies " << policy_ids << "\n";
  out << "seed " << seed << "\n";
  out << "step_budget " << step_budget << "\n";
  out << "entries " << entries.size() << "\n";
  out << std::setprecision(17);
  for (const auto& e : entries) {
    for (double v : e.probe) out << v << " ";
    out << e.target << "\n";
  }
  out << "end\n";
}

EvaluationSet EvaluationSet::load(std::istream& in) {
  auto expect = [&in](const std::string& key) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("evaluation set truncated at " + key);
    if (line.rfind(key, 0) != 0) throw std::runtime_error("evaluation set: expected '" + key + "'");
    std::string rest = line.substr(key.size());
    if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
    return rest;
  };
  std::string header;
  std::getline(in, header);
  if (header != "tdlab-evalset v1") throw std::runtime_error("not an evaluation set");
  EvaluationSet set;
  set.kind = expect("kind") == "true_value" ? Kind::true_value : Kind::sampled_return;
  set.environment_id = expect("environment");
  set.policy_ids = expect("policies");
  set.seed = std::stoull(expect("seed"));
  set.step_budget = std::stoll(expect("step_budget"));
  const long n = std::stol(expect("entries"));
  for (long i = 0; i < n; ++i) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("evaluation set truncated");
    std::istringstream is(line);
    std::vector<double> vals;
    double v;
    while (is >> v) vals.push_back(v);
    if (vals.empty()) throw std::runtime_error("evaluation set: empty entry");
    Entry e;
    e.target = vals.back();
    vals.pop_back();
    e.probe = std::move(vals);
    set.entries.push_back(std::move(e));
  }
  expect("end");
  if (set.entries.empty()) throw std::runtime_error("evaluation set has no entries");
  return set;
}

}  // namespace tdlab
