#pragma once

#include <cstdint>

#include "qlab/rng.hpp"

namespace qlab {

/// Cart-pole state. theta = 0 is upright.
struct State {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;

  bool operator==(const State&) const = default;
};

enum class Action : std::uint8_t { Left = 0, Right = 1 };

constexpr Action flip(Action a) { return a == Action::Left ? Action::Right : Action::Left; }
constexpr int action_index(Action a) { return static_cast<int>(a); }
Action action_from_index(int index);

struct PhysicsParams {
  double gravity = 9.8;
  double mass_cart = 1.0;
  double mass_pole = 0.1;
  double pole_half_length = 0.5;
  double force_mag = 10.0;
  double tau = 0.02;
  double x_bound = 2.4;
  double theta_bound = 0.2095;

  bool operator==(const PhysicsParams&) const = default;
};

/// Throws std::invalid_argument unless every parameter is finite and > 0.
void validate(const PhysicsParams& p);

struct StepResult {
  State next_state;
  double reward = 0.0;
  bool terminal = false;
};

bool is_finite(const State& s);

/// One semi-implicit Euler step of the CartPole-v1 equations of motion.
/// Throws InvalidStateError on a non-finite state.
StepResult step(const State& s, Action a, const PhysicsParams& p = {});

/// Mean of the normalized quadratic cart-position and pole-angle penalties
/// subtracted from one. Not clamped: overshooting a bound gives a negative value.
double reward(const State& next_s, const PhysicsParams& p = {});

/// Strict bound check on |x| and |theta|; velocities are unbounded.
bool is_terminal(const State& s, const PhysicsParams& p = {});

/// Episode start: each component uniform on [-0.05, 0.05].
State reset(Rng& rng);

}  // namespace qlab
