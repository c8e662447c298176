#include "qlab/policy.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "qlab/csv.hpp"
#include "qlab/errors.hpp"
#include "qlab/stepper.hpp"

namespace qlab {

std::pair<double, double> QFunction::both(const State& s) const {
  const std::array<double, 4> x{s.x, s.x_dot, s.theta, s.theta_dot};
  double left = params.b2();
  double right = params.b2();
  for (std::size_t h = 0; h < kHidden; ++h) {
    double pre = params.b1(h);
    for (std::size_t i = 0; i < 4; ++i) pre += params.w1(h, i) * x[i];
    const double action_w = params.w1(h, 4);
    left += params.w2(h) * std::max(pre - action_w, 0.0);
    right += params.w2(h) * std::max(pre + action_w, 0.0);
  }
  return {left, right};
}

Action greedy_action(const QFunction& q, const State& s) {
  const auto [left, right] = q.both(s);
  return right > left ? Action::Right : Action::Left;
}

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

void validate(const Policy& p) {
  if (const auto* e = std::get_if<EpsilonGreedy>(&p); e && !(e->epsilon >= 0.0 && e->epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
}

bool is_stochastic(const Policy& p) {
  const auto* e = std::get_if<EpsilonGreedy>(&p);
  return e != nullptr && e->epsilon > 0.0;
}

Action policy_action(const Policy& p, const State& s, Rng& rng) {
  return std::visit(Overloaded{
                        [&](const GreedyQ& g) { return greedy_action(g.q, s); },
                        [&](const EpsilonGreedy& e) {
                          if (e.epsilon > 0.0 && rng.uniform() < e.epsilon) {
                            return rng.coin() ? Action::Right : Action::Left;
                          }
                          return greedy_action(e.q, s);
                        },
                        [](const PushLeft&) { return Action::Left; },
                        [&](const AntiAngle&) { return s.theta > 0.0 ? Action::Right : Action::Left; },
                    },
                    p);
}

std::string describe(const Policy& p) {
  return std::visit(Overloaded{
                        [](const GreedyQ&) { return std::string("greedy"); },
                        [](const EpsilonGreedy& e) { return "eps-greedy(" + csv::format_double(e.epsilon) + ")"; },
                        [](const PushLeft&) { return std::string("push-left"); },
                        [](const AntiAngle&) { return std::string("anti-angle"); },
                    },
                    p);
}

StepResult LearnedModel::step(const State& s, Action a) const {
  if (!is_finite(s)) throw InvalidStateError("cart-pole state must be finite");
  StepResult r;
  r.next_state = predict(model_, s, a);
  r.reward = reward(r.next_state, physics_);
  r.terminal = is_terminal(r.next_state, physics_);
  return r;
}

}  // namespace qlab
