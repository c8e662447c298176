#pragma once

#include "qlab/cartpole.hpp"
#include "qlab/mlp.hpp"

namespace qlab {

/// Network input for a state-action pair: [x, x_dot, theta, theta_dot, +-1],
/// with Left encoded as -1 and Right as +1.
inline Input q_input(const State& s, Action a) {
  return {s.x, s.x_dot, s.theta, s.theta_dot, a == Action::Right ? 1.0 : -1.0};
}

}  // namespace qlab
