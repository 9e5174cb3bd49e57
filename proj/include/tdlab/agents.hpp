#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "tdlab/envs.hpp"
#include "tdlab/net.hpp"
#include "tdlab/rng.hpp"
#include "tdlab/transforms.hpp"

namespace tdlab {

struct AgentConfig {
  double alpha = 0.1;    // step size, positive
  double gamma = 1.0;    // discount in [0, 1]
  double lambda = 0.0;   // trace parameter in [0, 1]
  double epsilon = 0.1;  // exploration rate in [0, 1]

  void validate() const;
};

// Any non-finite TD error or value estimate, or |delta| beyond the
// threshold, halts the run. Sweeps record the failure instead of aborting.
inline constexpr double kDivergenceDelta = 1e8;

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::int64_t step, double delta);
  std::int64_t step() const { return step_; }
  double delta() const { return delta_; }

 private:
  std::int64_t step_;
  double delta_;
};

// Eligibility trace over the flat parameter vector. Entries outside the
// tracked spans are exactly zero, so decay, accumulate and the weight
// update only touch the supported ranges; with lambda = 0 and sparse
// features this is what makes large nets trainable online.
class TraceVector {
 public:
  explicit TraceVector(std::int64_t num_params);

  void reset();
  // z *= factor over the support; factor 0 clears the support
  void decay(double factor);
  // z += g, growing the support to cover g's spans
  void add(const GradBuffer& g);
  // w += a * z
  void axpy_into(double a, std::vector<double>& w) const;
  double norm_sq() const;

  std::int64_t length() const { return static_cast<std::int64_t>(values_.size()); }
  // full-length view; the zero-outside-support invariant makes this a
  // plain dense vector
  const std::vector<double>& raw() const { return values_; }
  const std::vector<std::pair<std::int64_t, std::int64_t>>& spans() const { return spans_; }

 private:
  std::vector<double> values_;
  std::vector<std::pair<std::int64_t, std::int64_t>> spans_;
  std::vector<std::pair<std::int64_t, std::int64_t>> merged_;
};

struct StepDiagnostics {
  double delta = 0.0;
  double trace_norm = 0.0;
  double value_estimate = 0.0;
  std::int64_t step = 0;
};

// One TD(lambda) update:
//   z <- gamma*lambda*z + grad v(x, w)
//   delta <- reward + gamma*discount * v(x_next, w) - v(x, w)
//   w <- w + alpha*delta*z
// with both values and the gradient taken at the pre-update w. When
// gamma*discount is zero the bootstrap term is dropped without evaluating
// x_next. scratch is caller-owned to avoid per-step allocation.
StepDiagnostics td_lambda_step(Approximator& approx, TraceVector& z, const FeatureVector& x,
                               double reward, const FeatureVector& x_next, double discount,
                               const AgentConfig& cfg, GradBuffer& scratch, std::int64_t step_index = 0);

// Sarsa(lambda): as above on action values, bootstrapping from
// q(x_next, next_action). next_action is ignored when the effective
// discount is zero. Only the taken action's head enters the trace.
StepDiagnostics sarsa_lambda_step(Approximator& approx, TraceVector& z, const FeatureVector& x,
                                  int action, double reward, const FeatureVector& x_next,
                                  int next_action, double discount, const AgentConfig& cfg,
                                  GradBuffer& scratch, std::int64_t step_index = 0);

// argmax with uniform random tie-breaking among maxima; with probability
// epsilon a uniform random action instead
int epsilon_greedy(const std::vector<double>& q_values, double epsilon, Rng& rng);

struct EpisodeRecord {
  int steps = 0;
  double undiscounted_return = 0.0;
  double mean_abs_delta = 0.0;
  bool truncated = false;
};

// Policy evaluation: traces zeroed at the start, transitions consumed
// online in trajectory order, one update per step. Throws DivergenceError.
EpisodeRecord run_prediction_episode(Environment& env, const Policy& policy, const Transform& transform,
                                     Approximator& approx, const AgentConfig& cfg, TraceVector& z,
                                     GradBuffer& scratch, Rng& rng);

// epsilon-greedy Sarsa(lambda) control episode. On truncation the last
// update bootstraps normally; traces reset with the episode either way.
EpisodeRecord run_control_episode(Environment& env, const Transform& transform, Approximator& approx,
                                  const AgentConfig& cfg, TraceVector& z, GradBuffer& scratch, Rng& rng);

struct StreamRecord {
  std::int64_t steps = 0;
  double mean_abs_delta = 0.0;
  std::int64_t discount_zero_events = 0;
};

// Continuing-task prediction for num_steps transitions. The environment's
// discount signal carries termination: the trace decay picks up the
// previous transition's discount, and a zero discount clears the trace.
// on_step (optional) observes diagnostics after each update.
StreamRecord run_prediction_stream(Environment& env, const Policy& policy, const Transform& transform,
                                   Approximator& approx, const AgentConfig& cfg, std::int64_t num_steps,
                                   TraceVector& z, GradBuffer& scratch, Rng& rng,
                                   const std::function<void(const StepDiagnostics&)>& on_step = nullptr);

}  // namespace tdlab
