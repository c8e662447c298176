#pragma once

#include <string>
#include <utility>
#include <variant>

#include "qlab/cartpole.hpp"
#include "qlab/encoding.hpp"
#include "qlab/mlp.hpp"
#include "qlab/rng.hpp"

namespace qlab {

struct QFunction {
  MlpParams params;

  double value(const State& s, Action a) const { return forward(params, q_input(s, a)); }

  /// Q(s, Left) and Q(s, Right), sharing the state part of the hidden layer.
  std::pair<double, double> both(const State& s) const;

  bool operator==(const QFunction&) const = default;
};

/// argmax over actions; exact ties go to Left.
Action greedy_action(const QFunction& q, const State& s);

struct GreedyQ {
  QFunction q;
};

struct EpsilonGreedy {
  QFunction q;
  double epsilon = 0.05;
};

struct PushLeft {};

/// Pushes in the direction the pole leans: Right for theta > 0, Left otherwise.
struct AntiAngle {};

using Policy = std::variant<GreedyQ, EpsilonGreedy, PushLeft, AntiAngle>;

/// Throws std::invalid_argument if an epsilon lies outside [0, 1].
void validate(const Policy& p);

bool is_stochastic(const Policy& p);

/// Only stochastic policies draw from `rng`.
Action policy_action(const Policy& p, const State& s, Rng& rng);

/// "greedy", "eps-greedy(0.05)", "push-left" or "anti-angle".
std::string describe(const Policy& p);

}  // namespace qlab
