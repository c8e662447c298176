#pragma once

#include "qlab/cartpole.hpp"
#include "qlab/dynamics_model.hpp"

namespace qlab {

/// One-step transition source used by rollouts and evaluation. Reward and
/// termination always come from the analytic rule applied to the next state.
class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual StepResult step(const State& s, Action a) const = 0;
};

class RealDynamics final : public Stepper {
 public:
  explicit RealDynamics(const PhysicsParams& p = {}) : physics_(p) { validate(physics_); }
  StepResult step(const State& s, Action a) const override { return qlab::step(s, a, physics_); }
  const PhysicsParams& physics() const { return physics_; }

 private:
  PhysicsParams physics_;
};

class LearnedModel final : public Stepper {
 public:
  LearnedModel(DynamicsModel model, const PhysicsParams& p = {}) : model_(std::move(model)), physics_(p) {}

  StepResult step(const State& s, Action a) const override;
  const DynamicsModel& model() const { return model_; }

 private:
  DynamicsModel model_;
  PhysicsParams physics_;
};

}  // namespace qlab
