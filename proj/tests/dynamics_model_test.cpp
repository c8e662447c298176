#include "qlab/dynamics_model.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "qlab/errors.hpp"
#include "qlab/stepper.hpp"
#include "test_util.hpp"

using namespace qlab;

namespace {

std::array<double, 4> arr(const State& s) { return {s.x, s.x_dot, s.theta, s.theta_dot}; }

TrainConfig quick_cfg(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.max_epochs = 300;
  cfg.patience = 20;
  return cfg;
}

}  // namespace

TEST(DynamicsModel, ZeroModelIsIdentity) {
  const DynamicsModel m;
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    const State s{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-0.2, 0.2), rng.uniform(-2, 2)};
    EXPECT_EQ(predict(m, s, rng.coin() ? Action::Left : Action::Right), s);
  }
}

TEST(DynamicsModel, TooSmallDatasetThrows) {
  Rng rng(1);
  EXPECT_THROW(train_model(generate(99, {}, rng), quick_cfg(1)), std::invalid_argument);
}

TEST(DynamicsModel, ConstantDeltaIsLearnedExactly) {
  Rng rng(2);
  Dataset d;
  for (int k = 0; k < 600; ++k) {
    Transition t;
    t.s = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.2, 0.2), rng.uniform(-1, 1)};
    t.a = rng.coin() ? Action::Left : Action::Right;
    t.s_next = {t.s.x + 0.01, t.s.x_dot - 0.2, t.s.theta + 0.003, t.s.theta_dot + 0.3};
    d.transitions.push_back(t);
  }
  const auto fit = train_model(d, quick_cfg(3));
  for (double v : fit.val_mse) EXPECT_LT(v, 1e-4);
}

class TrainedModel : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    Rng rng(20);
    data_ = new Dataset(generate(4000, {}, rng));
    fit_ = new DynamicsFit(train_model(*data_, quick_cfg(5)));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete fit_;
  }
  static Dataset* data_;
  static DynamicsFit* fit_;
};
Dataset* TrainedModel::data_ = nullptr;
DynamicsFit* TrainedModel::fit_ = nullptr;

TEST_F(TrainedModel, BeatsPredictMeanBaseline) {
  for (std::size_t c = 0; c < 4; ++c) EXPECT_LT(fit_->val_mse[c], fit_->val_delta_variance[c]) << "component " << c;
}

TEST_F(TrainedModel, BeatsIdentityOnTrainingStates) {
  std::array<double, 4> model_err{}, identity_err{};
  for (const auto& t : data_->transitions) {
    const auto p = arr(predict(fit_->model, t.s, t.a)), s = arr(t.s), sn = arr(t.s_next);
    for (std::size_t c = 0; c < 4; ++c) {
      model_err[c] += std::abs(p[c] - sn[c]);
      identity_err[c] += std::abs(s[c] - sn[c]);
    }
  }
  for (std::size_t c = 0; c < 4; ++c) EXPECT_LT(model_err[c], identity_err[c]) << "component " << c;
}

TEST_F(TrainedModel, DeterministicPerSeed) {
  const auto again = train_model(*data_, quick_cfg(5));
  EXPECT_EQ(again.model, fit_->model);
  const State s{0.1, -0.2, 0.05, 0.3};
  EXPECT_EQ(predict(fit_->model, s, Action::Left), predict(fit_->model, s, Action::Left));
}

TEST_F(TrainedModel, PredictionsStayFinite) {
  Rng rng(6);
  for (int k = 0; k < 1000; ++k) {
    const State s{rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-10, 10), rng.uniform(-100, 100)};
    EXPECT_TRUE(is_finite(predict(fit_->model, s, Action::Right)));
  }
}

TEST_F(TrainedModel, LearnedStepperUsesRealTerminationRule) {
  const LearnedModel stepper(fit_->model);
  Rng rng(7);
  for (int k = 0; k < 500; ++k) {
    const State s{rng.uniform(-2.4, 2.4), rng.uniform(-2, 2), rng.uniform(-0.2, 0.2), rng.uniform(-2, 2)};
    const auto r = stepper.step(s, Action::Left);
    ASSERT_EQ(r.terminal, is_terminal(r.next_state));
    ASSERT_EQ(r.reward, reward(r.next_state));
  }
}

TEST_F(TrainedModel, FileRoundTrip) {
  test_support::TempDir dir;
  save(fit_->model, dir / "model.csv");
  EXPECT_EQ(load_model(dir / "model.csv"), fit_->model);
}

TEST(DynamicsModelFile, RejectsUnknownBlock) {
  DynamicsModel m;
  std::string text = to_csv(m);
  const auto pos = text.find("input_mean,0");
  text.replace(pos, 10, "input_meen");
  EXPECT_THROW(model_from_csv(text), ParseError);
}
