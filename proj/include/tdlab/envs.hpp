#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tdlab/rng.hpp"

namespace tdlab {

using StateVector = std::vector<double>;

struct Bounds {
  double lo;
  double hi;
};

struct Transition {
  StateVector state;
  int action = 0;
  double reward = 0.0;
  StateVector next_state;
  bool terminal = false;
  bool truncated = false;
  double discount = 1.0;  // 0 at true termination so bootstrapping vanishes
};

// Deterministic or stochastic decision rule. act() may draw from rng;
// action_prob() exposes the rule's probabilities for diagnostics.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int act(const StateVector& s, Rng& rng) const = 0;
  virtual double action_prob(const StateVector& s, int action) const = 0;
  virtual int num_actions() const = 0;
};

// Single-threaded episodic or continuing state machine. step() always
// returns the full transition including the pre-step state. Episode caps
// ("terminated manually") surface as truncated, never terminal: the final
// update bootstraps normally from the successor state.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int state_dim() const = 0;
  virtual int num_actions() const = 0;
  virtual const std::vector<Bounds>& state_bounds() const = 0;
  virtual StateVector reset(Rng& rng) = 0;
  virtual Transition step(int action, Rng& rng) = 0;
  virtual const StateVector& state() const = 0;
  // Jump to an arbitrary state (used by evaluation rollouts). Also resets
  // the episode step counter. Not supported by environments with hidden
  // state beyond the observation.
  virtual void set_state(const StateVector& s) = 0;
  virtual bool continuing() const { return false; }
};

class MountainCar final : public Environment {
 public:
  explicit MountainCar(int max_episode_steps = 0) : max_steps_(max_episode_steps) {}

  // Canonical dynamics: velocity' = clamp(v + 0.001*(a-1) - 0.0025*cos(3p)),
  // position' = clamp(p + velocity'); hitting the left wall zeroes velocity.
  // Reward -1 per step, terminal once position' >= 0.5.
  static Transition dynamics(const StateVector& s, int action);

  int state_dim() const override { return 2; }
  int num_actions() const override { return 3; }
  const std::vector<Bounds>& state_bounds() const override;
  StateVector reset(Rng& rng) override;
  Transition step(int action, Rng& rng) override;
  const StateVector& state() const override { return state_; }
  void set_state(const StateVector& s) override;

 private:
  StateVector state_{0.0, 0.0};
  int max_steps_;
  int steps_ = 0;
};

// Two-link underactuated pendulum, reimplementing the canonical Gym
// dynamics: unit masses and lengths, RK4 at dt = 0.2, torque on the second
// joint. State is the 4-vector (theta1, theta2, dtheta1, dtheta2) with
// angles wrapped to [-pi, pi].
class Acrobot final : public Environment {
 public:
  explicit Acrobot(int max_episode_steps = 0) : max_steps_(max_episode_steps) {}

  static Transition dynamics(const StateVector& s, int action);
  static bool goal_reached(const StateVector& s);

  int state_dim() const override { return 4; }
  int num_actions() const override { return 3; }
  const std::vector<Bounds>& state_bounds() const override;
  StateVector reset(Rng& rng) override;
  Transition step(int action, Rng& rng) override;
  const StateVector& state() const override { return state_; }
  void set_state(const StateVector& s) override;

 private:
  StateVector state_{0.0, 0.0, 0.0, 0.0};
  int max_steps_;
  int steps_ = 0;
};

// Synthetic stand-in for a robot collision task: a hidden integer distance
// to the wall is observed only through a fixed 150-pixel rendering plus
// bounded per-step noise. Going forward decrements the distance; turning
// redraws it. Hitting the wall emits reward 1 with discount 0, all other
// steps emit reward 0 with discount 0.97. Continuing: terminal/truncated
// are never set, the discount carries the episode structure.
class SyntheticCollision final : public Environment {
 public:
  static constexpr int kPixels = 150;
  static constexpr double kDiscount = 0.97;
  static constexpr double kNoiseAmplitude = 0.05;

  SyntheticCollision(int min_distance = 5, int max_distance = 25);

  int state_dim() const override { return kPixels; }
  int num_actions() const override { return 2; }  // 0 forward, 1 turn
  const std::vector<Bounds>& state_bounds() const override;
  StateVector reset(Rng& rng) override;
  Transition step(int action, Rng& rng) override;
  const StateVector& state() const override { return obs_; }
  void set_state(const StateVector&) override;  // throws: distance is hidden
  bool continuing() const override { return true; }

  int distance() const { return distance_; }
  void force_distance(int d, Rng& rng);

 private:
  StateVector render(int d, Rng& rng) const;

  int min_distance_;
  int max_distance_;
  int distance_ = 1;
  StateVector obs_;
  std::vector<double> near_pattern_;  // rendering at the wall
  std::vector<double> far_pattern_;   // rendering at max distance
};

// Push toward the direction of velocity; the tie at zero velocity breaks
// toward forward.
class MountainCarFixedPolicy final : public Policy {
 public:
  int act(const StateVector& s, Rng&) const override { return s[1] >= 0.0 ? 2 : 0; }
  double action_prob(const StateVector& s, int action) const override {
    return action == (s[1] >= 0.0 ? 2 : 0) ? 1.0 : 0.0;
  }
  int num_actions() const override { return 3; }
};

// Forward 90% of the time, turn left 10%.
class SyntheticBehaviorPolicy final : public Policy {
 public:
  int act(const StateVector&, Rng& rng) const override { return rng.uniform() < 0.9 ? 0 : 1; }
  double action_prob(const StateVector&, int action) const override {
    return action == 0 ? 0.9 : 0.1;
  }
  int num_actions() const override { return 2; }
};

// Always forward.
class SyntheticTargetPolicy final : public Policy {
 public:
  int act(const StateVector&, Rng&) const override { return 0; }
  double action_prob(const StateVector&, int action) const override {
    return action == 0 ? 1.0 : 0.0;
  }
  int num_actions() const override { return 2; }
};

std::unique_ptr<Environment> make_environment(const std::string& id, int max_episode_steps = 0);
std::unique_ptr<Policy> make_policy(const std::string& id);

}  // namespace tdlab
