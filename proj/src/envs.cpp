#include "tdlab/envs.hpp"

#include <cmath>
#include <stdexcept>

namespace tdlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }

double wrap_pi(double angle) {
  angle = std::fmod(angle + kPi, 2.0 * kPi);
  if (angle < 0.0) angle += 2.0 * kPi;
  return angle - kPi;
}

void check_action(int action, int num_actions) {
  if (action < 0 || action >= num_actions) {
    throw std::invalid_argument("invalid action " + std::to_string(action));
  }
}

}  // namespace

// ---------------------------------------------------------------- MountainCar

const std::vector<Bounds>& MountainCar::state_bounds() const {
  static const std::vector<Bounds> kBounds = {{-1.2, 0.6}, {-0.07, 0.07}};
  return kBounds;
}

Transition MountainCar::dynamics(const StateVector& s, int action) {
  check_action(action, 3);
  const double position = s[0];
  const double velocity = s[1];
  double v = velocity + 0.001 * (action - 1) - 0.0025 * std::cos(3.0 * position);
  v = clamp(v, -0.07, 0.07);
  double p = clamp(position + v, -1.2, 0.6);
  if (p <= -1.2) v = 0.0;
  const bool terminal = p >= 0.5;
  Transition t;
  t.state = s;
  t.action = action;
  t.reward = -1.0;
  t.next_state = {p, v};
  t.terminal = terminal;
  t.discount = terminal ? 0.0 : 1.0;
  return t;
}

StateVector MountainCar::reset(Rng& rng) {
  state_ = {rng.uniform(-0.6, -0.4), 0.0};
  steps_ = 0;
  return state_;
}

Transition MountainCar::step(int action, Rng&) {
  Transition t = dynamics(state_, action);
  state_ = t.next_state;
  ++steps_;
  if (!t.terminal && max_steps_ > 0 && steps_ >= max_steps_) t.truncated = true;
  return t;
}

void MountainCar::set_state(const StateVector& s) {
  if (s.size() != 2) throw std::invalid_argument("MountainCar state must have 2 components");
  state_ = s;
  steps_ = 0;
}

// -------------------------------------------------------------------- Acrobot

namespace {

// Equations of motion for the two-link pendulum, torque applied between the
// links. m1 = m2 = 1, l1 = l2 = 1, com at 0.5, unit inertia, g = 9.8.
void acrobot_derivatives(const double* s, double torque, double* ds) {
  const double g = 9.8;
  const double theta1 = s[0], theta2 = s[1], dtheta1 = s[2], dtheta2 = s[3];
  const double d1 = 1.0 * 0.25 + 1.0 * (1.0 + 0.25 + 2.0 * 0.5 * std::cos(theta2)) + 2.0;
  const double d2 = 1.0 * (0.25 + 0.5 * std::cos(theta2)) + 1.0;
  const double phi2 = 1.0 * 0.5 * g * std::cos(theta1 + theta2 - kPi / 2.0);
  const double phi1 = -1.0 * 0.5 * dtheta2 * dtheta2 * std::sin(theta2) -
                      2.0 * 0.5 * dtheta2 * dtheta1 * std::sin(theta2) +
                      (1.0 * 0.5 + 1.0) * g * std::cos(theta1 - kPi / 2.0) + phi2;
  const double ddtheta2 =
      (torque + d2 / d1 * phi1 - 1.0 * 0.5 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
      (0.25 + 1.0 - d2 * d2 / d1);
  const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
  ds[0] = dtheta1;
  ds[1] = dtheta2;
  ds[2] = ddtheta1;
  ds[3] = ddtheta2;
}

}  // namespace

const std::vector<Bounds>& Acrobot::state_bounds() const {
  static const std::vector<Bounds> kBounds = {
      {-kPi, kPi}, {-kPi, kPi}, {-4.0 * kPi, 4.0 * kPi}, {-9.0 * kPi, 9.0 * kPi}};
  return kBounds;
}

bool Acrobot::goal_reached(const StateVector& s) {
  return -std::cos(s[0]) - std::cos(s[1] + s[0]) > 1.0;
}

Transition Acrobot::dynamics(const StateVector& s, int action) {
  check_action(action, 3);
  const double torque = action - 1;
  // one RK4 step over dt = 0.2
  const double dt = 0.2;
  double y[4] = {s[0], s[1], s[2], s[3]};
  double k1[4], k2[4], k3[4], k4[4], tmp[4];
  acrobot_derivatives(y, torque, k1);
  for (int i = 0; i < 4; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
  acrobot_derivatives(tmp, torque, k2);
  for (int i = 0; i < 4; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
  acrobot_derivatives(tmp, torque, k3);
  for (int i = 0; i < 4; ++i) tmp[i] = y[i] + dt * k3[i];
  acrobot_derivatives(tmp, torque, k4);
  for (int i = 0; i < 4; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

  StateVector next = {wrap_pi(y[0]), wrap_pi(y[1]), clamp(y[2], -4.0 * kPi, 4.0 * kPi),
                      clamp(y[3], -9.0 * kPi, 9.0 * kPi)};
  const bool terminal = goal_reached(next);
  Transition t;
  t.state = s;
  t.action = action;
  t.reward = -1.0;
  t.next_state = std::move(next);
  t.terminal = terminal;
  t.discount = terminal ? 0.0 : 1.0;
  return t;
}

StateVector Acrobot::reset(Rng& rng) {
  state_.resize(4);
  for (auto& v : state_) v = rng.uniform(-0.1, 0.1);
  steps_ = 0;
  return state_;
}

Transition Acrobot::step(int action, Rng&) {
  Transition t = dynamics(state_, action);
  state_ = t.next_state;
  ++steps_;
  if (!t.terminal && max_steps_ > 0 && steps_ >= max_steps_) t.truncated = true;
  return t;
}

void Acrobot::set_state(const StateVector& s) {
  if (s.size() != 4) throw std::invalid_argument("Acrobot state must have 4 components");
  state_ = s;
  steps_ = 0;
}

// -------------------------------------------------------- SyntheticCollision

SyntheticCollision::SyntheticCollision(int min_distance, int max_distance)
    : min_distance_(min_distance), max_distance_(max_distance) {
  if (min_distance < 1 || max_distance < min_distance) {
    throw std::invalid_argument("invalid distance range");
  }
  // Fixed rendering patterns, independent of the run seed: the observation
  // function is part of the task, not of the randomness of a run.
  Rng pattern_rng(0x9c0111ab51ab5e31ull);
  near_pattern_.resize(kPixels);
  far_pattern_.resize(kPixels);
  for (int i = 0; i < kPixels; ++i) {
    near_pattern_[i] = pattern_rng.uniform(0.15, 0.85);
    far_pattern_[i] = pattern_rng.uniform(0.15, 0.85);
  }
  obs_.assign(kPixels, 0.0);
}

const std::vector<Bounds>& SyntheticCollision::state_bounds() const {
  static const std::vector<Bounds> kBounds(kPixels, Bounds{0.0, 1.0});
  return kBounds;
}

StateVector SyntheticCollision::render(int d, Rng& rng) const {
  // Linear blend between the wall pattern (d = 1) and the far pattern,
  // plus bounded per-pixel noise.
  const double t = max_distance_ > 1
                       ? static_cast<double>(d - 1) / static_cast<double>(max_distance_ - 1)
                       : 0.0;
  StateVector obs(kPixels);
  for (int i = 0; i < kPixels; ++i) {
    const double base = (1.0 - t) * near_pattern_[i] + t * far_pattern_[i];
    const double noise = kNoiseAmplitude * (2.0 * rng.uniform() - 1.0);
    obs[i] = clamp(base + noise, 0.0, 1.0);
  }
  return obs;
}

StateVector SyntheticCollision::reset(Rng& rng) {
  distance_ = static_cast<int>(rng.uniform_int(min_distance_, max_distance_));
  obs_ = render(distance_, rng);
  return obs_;
}

Transition SyntheticCollision::step(int action, Rng& rng) {
  check_action(action, 2);
  Transition t;
  t.state = obs_;
  t.action = action;
  bool bump = false;
  if (action == 0) {
    --distance_;
    if (distance_ <= 0) bump = true;
  }
  if (bump || action == 1) {
    distance_ = static_cast<int>(rng.uniform_int(min_distance_, max_distance_));
  }
  t.reward = bump ? 1.0 : 0.0;
  t.discount = bump ? 0.0 : kDiscount;
  obs_ = render(distance_, rng);
  t.next_state = obs_;
  return t;
}

void SyntheticCollision::set_state(const StateVector&) {
  throw std::logic_error("SyntheticCollision state is hidden; use force_distance");
}

void SyntheticCollision::force_distance(int d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("distance must be >= 1");
  distance_ = d;
  obs_ = render(distance_, rng);
}

// ------------------------------------------------------------------ factories

std::unique_ptr<Environment> make_environment(const std::string& id, int max_episode_steps) {
  if (id == "mountain_car") return std::make_unique<MountainCar>(max_episode_steps);
  if (id == "acrobot") return std::make_unique<Acrobot>(max_episode_steps);
  if (id == "synth_collision") return std::make_unique<SyntheticCollision>();
  throw std::invalid_argument("unknown environment: " + id);
}

std::unique_ptr<Policy> make_policy(const std::string& id) {
  if (id == "mc_fixed") return std::make_unique<MountainCarFixedPolicy>();
  if (id == "synth_behavior") return std::make_unique<SyntheticBehaviorPolicy>();
  if (id == "synth_target") return std::make_unique<SyntheticTargetPolicy>();
  throw std::invalid_argument("unknown policy: " + id);
}

}  // namespace tdlab
