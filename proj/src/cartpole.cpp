#include "qlab/cartpole.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qlab/errors.hpp"

namespace qlab {

Action action_from_index(int index) {
  if (index == 0) return Action::Left;
  if (index == 1) return Action::Right;
  throw std::invalid_argument("action index must be 0 or 1, got " + std::to_string(index));
}

void validate(const PhysicsParams& p) {
  for (double v : {p.gravity, p.mass_cart, p.mass_pole, p.pole_half_length, p.force_mag, p.tau, p.x_bound,
                   p.theta_bound}) {
    if (!std::isfinite(v) || v <= 0.0) throw std::invalid_argument("physics parameters must be finite and positive");
  }
}

bool is_finite(const State& s) {
  return std::isfinite(s.x) && std::isfinite(s.x_dot) && std::isfinite(s.theta) && std::isfinite(s.theta_dot);
}

StepResult step(const State& s, Action a, const PhysicsParams& p) {
  if (!is_finite(s)) throw InvalidStateError("cart-pole state must be finite");

  const double force = a == Action::Right ? p.force_mag : -p.force_mag;
  const double total_mass = p.mass_cart + p.mass_pole;
  const double polemass_length = p.mass_pole * p.pole_half_length;
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);

  const double temp = (force + polemass_length * s.theta_dot * s.theta_dot * sin_t) / total_mass;
  const double theta_acc = (p.gravity * sin_t - cos_t * temp) /
                           (p.pole_half_length * (4.0 / 3.0 - p.mass_pole * cos_t * cos_t / total_mass));
  const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

  StepResult r;
  r.next_state.x = s.x + p.tau * s.x_dot;
  r.next_state.x_dot = s.x_dot + p.tau * x_acc;
  r.next_state.theta = s.theta + p.tau * s.theta_dot;
  r.next_state.theta_dot = s.theta_dot + p.tau * theta_acc;
  r.reward = reward(r.next_state, p);
  r.terminal = is_terminal(r.next_state, p);
  return r;
}

double reward(const State& next_s, const PhysicsParams& p) {
  const double xr = next_s.x / p.x_bound;
  const double tr = next_s.theta / p.theta_bound;
  return (1.0 - xr * xr + 1.0 - tr * tr) / 2.0;
}

bool is_terminal(const State& s, const PhysicsParams& p) {
  return std::abs(s.x) > p.x_bound || std::abs(s.theta) > p.theta_bound;
}

State reset(Rng& rng) {
  State s;
  s.x = rng.uniform(-0.05, 0.05);
  s.x_dot = rng.uniform(-0.05, 0.05);
  s.theta = rng.uniform(-0.05, 0.05);
  s.theta_dot = rng.uniform(-0.05, 0.05);
  return s;
}

}  // namespace qlab
