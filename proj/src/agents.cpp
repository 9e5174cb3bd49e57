#include "tdlab/agents.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tdlab/kernels.hpp"

namespace tdlab {

void AgentConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be nonnegative");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0,1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must be in [0,1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must be in [0,1]");
}

DivergenceError::DivergenceError(std::int64_t step, double delta)
    : std::runtime_error("diverged at step " + std::to_string(step) + ", delta = " + std::to_string(delta)),
      step_(step),
      delta_(delta) {}

// ---------------------------------------------------------------- TraceVector

TraceVector::TraceVector(std::int64_t num_params) : values_(static_cast<std::size_t>(num_params), 0.0) {}

void TraceVector::reset() {
  for (const auto& [b, e] : spans_) {
    std::fill(values_.begin() + b, values_.begin() + e, 0.0);
  }
  spans_.clear();
}

void TraceVector::decay(double factor) {
  if (factor == 0.0) {
    reset();
    return;
  }
  for (const auto& [b, e] : spans_) {
    kernels::scale(factor, values_.data() + b, static_cast<std::size_t>(e - b));
  }
}

void TraceVector::add(const GradBuffer& g) {
  for (const auto& [b, e] : g.spans) {
    kernels::add(g.values.data() + b, values_.data() + b, static_cast<std::size_t>(e - b));
  }
  if (spans_.empty()) {
    spans_ = g.spans;
    return;
  }
  // merge the two sorted disjoint span lists, coalescing adjacency
  merged_.clear();
  std::size_t i = 0, j = 0;
  auto push = [this](std::pair<std::int64_t, std::int64_t> s) {
    if (!merged_.empty() && s.first <= merged_.back().second) {
      merged_.back().second = std::max(merged_.back().second, s.second);
    } else {
      merged_.push_back(s);
    }
  };
  while (i < spans_.size() || j < g.spans.size()) {
    if (j == g.spans.size() || (i < spans_.size() && spans_[i].first <= g.spans[j].first)) {
      push(spans_[i++]);
    } else {
      push(g.spans[j++]);
    }
  }
  spans_.swap(merged_);
}

void TraceVector::axpy_into(double a, std::vector<double>& w) const {
  for (const auto& [b, e] : spans_) {
    kernels::axpy(a, values_.data() + b, w.data() + b, static_cast<std::size_t>(e - b));
  }
}

double TraceVector::norm_sq() const {
  double acc = 0.0;
  for (const auto& [b, e] : spans_) {
    acc += kernels::sum_sq(values_.data() + b, static_cast<std::size_t>(e - b));
  }
  return acc;
}

// -------------------------------------------------------------------- updates

namespace {

StepDiagnostics apply_update(Approximator& approx, TraceVector& z, double v, double v_next,
                             double reward, double gamma_eff, const AgentConfig& cfg,
                             std::int64_t step_index) {
  const double delta = reward + gamma_eff * v_next - v;
  if (!std::isfinite(delta) || std::abs(delta) > kDivergenceDelta) {
    throw DivergenceError(step_index, delta);
  }
  z.axpy_into(cfg.alpha * delta, approx.params());
  StepDiagnostics d;
  d.delta = delta;
  d.trace_norm = std::sqrt(z.norm_sq());
  d.value_estimate = v;
  d.step = step_index;
  return d;
}

}  // namespace

StepDiagnostics td_lambda_step(Approximator& approx, TraceVector& z, const FeatureVector& x,
                               double reward, const FeatureVector& x_next, double discount,
                               const AgentConfig& cfg, GradBuffer& scratch, std::int64_t step_index) {
  z.decay(cfg.gamma * cfg.lambda);
  const double v = approx.gradient(x, 0, scratch);
  z.add(scratch);
  const double gamma_eff = cfg.gamma * discount;
  const double v_next = gamma_eff != 0.0 ? approx.value(x_next, 0) : 0.0;
  if (!std::isfinite(v) || !std::isfinite(v_next)) throw DivergenceError(step_index, v - v_next);
  return apply_update(approx, z, v, v_next, reward, gamma_eff, cfg, step_index);
}

StepDiagnostics sarsa_lambda_step(Approximator& approx, TraceVector& z, const FeatureVector& x,
                                  int action, double reward, const FeatureVector& x_next,
                                  int next_action, double discount, const AgentConfig& cfg,
                                  GradBuffer& scratch, std::int64_t step_index) {
  z.decay(cfg.gamma * cfg.lambda);
  const double q = approx.gradient(x, action, scratch);
  z.add(scratch);
  const double gamma_eff = cfg.gamma * discount;
  const double q_next = gamma_eff != 0.0 ? approx.value(x_next, next_action) : 0.0;
  if (!std::isfinite(q) || !std::isfinite(q_next)) throw DivergenceError(step_index, q - q_next);
  return apply_update(approx, z, q, q_next, reward, gamma_eff, cfg, step_index);
}

int epsilon_greedy(const std::vector<double>& q_values, double epsilon, Rng& rng) {
  if (q_values.empty()) throw std::invalid_argument("empty action-value vector");
  if (epsilon > 0.0 && rng.bernoulli(epsilon)) {
    return static_cast<int>(rng.uniform_below(q_values.size()));
  }
  double best = q_values[0];
  int ties = 1;
  for (std::size_t a = 1; a < q_values.size(); ++a) {
    if (q_values[a] > best) {
      best = q_values[a];
      ties = 1;
    } else if (q_values[a] == best) {
      ++ties;
    }
  }
  if (ties == 1) {
    return static_cast<int>(std::max_element(q_values.begin(), q_values.end()) - q_values.begin());
  }
  int pick = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(ties)));
  for (std::size_t a = 0; a < q_values.size(); ++a) {
    if (q_values[a] == best && pick-- == 0) return static_cast<int>(a);
  }
  return 0;  // unreachable
}

// -------------------------------------------------------------------- runners

EpisodeRecord run_prediction_episode(Environment& env, const Policy& policy, const Transform& transform,
                                     Approximator& approx, const AgentConfig& cfg, TraceVector& z,
                                     GradBuffer& scratch, Rng& rng) {
  EpisodeRecord rec;
  z.reset();
  StateVector s = env.reset(rng);
  FeatureVector x = transform.apply(s);
  double abs_delta_sum = 0.0;
  while (true) {
    const int a = policy.act(s, rng);
    const Transition tr = env.step(a, rng);
    FeatureVector x_next = transform.apply(tr.next_state);
    const StepDiagnostics d =
        td_lambda_step(approx, z, x, tr.reward, x_next, tr.discount, cfg, scratch, rec.steps);
    abs_delta_sum += std::abs(d.delta);
    rec.undiscounted_return += tr.reward;
    ++rec.steps;
    if (tr.terminal || tr.truncated) {
      rec.truncated = tr.truncated;
      break;
    }
    s = tr.next_state;
    x = std::move(x_next);
  }
  z.reset();
  rec.mean_abs_delta = abs_delta_sum / rec.steps;
  return rec;
}

EpisodeRecord run_control_episode(Environment& env, const Transform& transform, Approximator& approx,
                                  const AgentConfig& cfg, TraceVector& z, GradBuffer& scratch, Rng& rng) {
  EpisodeRecord rec;
  z.reset();
  StateVector s = env.reset(rng);
  FeatureVector x = transform.apply(s);
  int a = epsilon_greedy(approx.values(x), cfg.epsilon, rng);
  double abs_delta_sum = 0.0;
  while (true) {
    const Transition tr = env.step(a, rng);
    FeatureVector x_next = transform.apply(tr.next_state);
    int a_next = 0;
    if (!tr.terminal) a_next = epsilon_greedy(approx.values(x_next), cfg.epsilon, rng);
    const StepDiagnostics d = sarsa_lambda_step(approx, z, x, a, tr.reward, x_next, a_next,
                                                tr.discount, cfg, scratch, rec.steps);
    abs_delta_sum += std::abs(d.delta);
    rec.undiscounted_return += tr.reward;
    ++rec.steps;
    if (tr.terminal || tr.truncated) {
      rec.truncated = tr.truncated;
      break;
    }
    x = std::move(x_next);
    a = a_next;
  }
  z.reset();
  rec.mean_abs_delta = abs_delta_sum / rec.steps;
  return rec;
}

StreamRecord run_prediction_stream(Environment& env, const Policy& policy, const Transform& transform,
                                   Approximator& approx, const AgentConfig& cfg, std::int64_t num_steps,
                                   TraceVector& z, GradBuffer& scratch, Rng& rng,
                                   const std::function<void(const StepDiagnostics&)>& on_step) {
  StreamRecord rec;
  z.reset();
  StateVector s = env.reset(rng);
  FeatureVector x = transform.apply(s);
  double abs_delta_sum = 0.0;
  double prev_discount = 1.0;
  for (std::int64_t t = 0; t < num_steps; ++t) {
    // the trace entering this step carries the discount of the transition
    // that produced the current state
    if (prev_discount == 0.0) {
      z.reset();
    } else if (prev_discount != 1.0 && cfg.lambda > 0.0) {
      z.decay(prev_discount);
    }
    const int a = policy.act(s, rng);
    const Transition tr = env.step(a, rng);
    FeatureVector x_next = transform.apply(tr.next_state);
    const StepDiagnostics d = td_lambda_step(approx, z, x, tr.reward, x_next, tr.discount, cfg, scratch, t);
    abs_delta_sum += std::abs(d.delta);
    if (tr.discount == 0.0) ++rec.discount_zero_events;
    ++rec.steps;
    if (on_step) on_step(d);
    prev_discount = tr.discount;
    s = tr.next_state;
    x = std::move(x_next);
  }
  rec.mean_abs_delta = rec.steps > 0 ? abs_delta_sum / rec.steps : 0.0;
  return rec;
}

}  // namespace tdlab
