#include "qlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <stack>

#include <gtest/gtest.h>

#include "qlab/csv.hpp"
#include "qlab/errors.hpp"
#include "qlab/svg_plot.hpp"
#include "stubs.hpp"
#include "test_util.hpp"

using namespace qlab;
using qlab::test_support::ConstantRewardStepper;
using qlab::test_support::SmoothStepper;

TEST(Evaluate, PushLeftFailsQuickly) {
  EvalConfig cfg{100, 5000, 1, 1};
  const auto r = evaluate_policy(PushLeft{}, cfg);
  EXPECT_EQ(r.success_rate, 0.0);
  EXPECT_FALSE(r.successful);
  EXPECT_LT(r.avg_return, 100.0);
  EXPECT_GT(r.avg_return, 0.0);
}

TEST(Evaluate, NeverTerminatingStub) {
  EvalConfig cfg{7, 10, 1, 1};
  const auto r = evaluate_policy(PushLeft{}, cfg, ConstantRewardStepper{1.0});
  EXPECT_EQ(r.avg_return, 10.0);
  EXPECT_EQ(r.success_rate, 1.0);
  EXPECT_TRUE(r.successful);
  EXPECT_EQ(r.n_episodes, 7u);
  EXPECT_EQ(r.max_steps, 10u);
}

TEST(Evaluate, DeterministicAndWorkerIndependent) {
  Rng rng(2);
  const QFunction q{init_params(rng)};
  EvalConfig cfg{50, 500, 9, 1};
  const auto a = evaluate_policy(EpsilonGreedy{q, 0.1}, cfg);
  cfg.workers = 4;
  const auto b = evaluate_policy(EpsilonGreedy{q, 0.1}, cfg);
  EXPECT_EQ(a, b);
  EXPECT_LE(a.avg_return, static_cast<double>(cfg.max_steps));
  EXPECT_GE(a.success_rate, 0.0);
  EXPECT_LE(a.success_rate, 1.0);
}

TEST(Evaluate, Errors) {
  EXPECT_THROW(evaluate_policy(PushLeft{}, EvalConfig{0, 10, 1, 1}), std::invalid_argument);
  EXPECT_THROW(evaluate_policy(PushLeft{}, EvalConfig{1, 0, 1, 1}), std::invalid_argument);
}

TEST(Evaluate, ReportTextRoundTrip) {
  const EvalReport r{123.456789, 0.25, false, 1000, 5000};
  EXPECT_EQ(report_from_text(to_text(r)), r);
  EXPECT_THROW(report_from_text("avg_return=1\n"), ParseError);
}

TEST(Summary, QuartilesAreOrderStatistics) {
  const auto s = summarize({5, 1, 4, 2, 3});
  EXPECT_EQ(s.min, 1);
  EXPECT_EQ(s.q1, 2);
  EXPECT_EQ(s.median, 3);
  EXPECT_EQ(s.q3, 4);
  EXPECT_EQ(s.max, 5);
  const auto even = summarize({4, 1, 3, 2});
  EXPECT_DOUBLE_EQ(even.median, 2.5);
  EXPECT_DOUBLE_EQ(even.q1, 1.75);
  EXPECT_THROW(summarize({}), std::invalid_argument);
}

namespace {

TargetSet small_targets() {
  Rng rng(3);
  TargetSet t;
  for (int k = 0; k < 200; ++k) {
    const State s{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.2, 0.2), rng.uniform(-1, 1)};
    const Action a = rng.coin() ? Action::Left : Action::Right;
    t.data.push_back(q_input(s, a), 50.0 + 10.0 * s.theta * (a == Action::Right ? 1 : -1));
  }
  return t;
}

}  // namespace

TEST(SeedStudy, IdenticalSeedsGiveIdenticalReports) {
  TrainConfig train_cfg;
  train_cfg.max_epochs = 20;
  const std::vector<std::uint64_t> seeds{42, 42};
  const auto study = seed_variance_study(small_targets(), seeds, train_cfg, EvalConfig{10, 200, 1, 1});
  ASSERT_EQ(study.entries.size(), 2u);
  EXPECT_EQ(study.entries[0].report, study.entries[1].report);
  EXPECT_EQ(study.avg_return.min, study.avg_return.max);
}

TEST(SeedStudy, TotalityAndSummary) {
  TrainConfig train_cfg;
  train_cfg.max_epochs = 20;
  const auto seeds = study_seeds(5, 4);
  const auto study = seed_variance_study(small_targets(), seeds, train_cfg, EvalConfig{10, 200, 1, 1});
  ASSERT_EQ(study.entries.size(), 4u);
  std::vector<double> returns;
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(study.entries[k].seed, seeds[k]);
    returns.push_back(study.entries[k].report.avg_return);
  }
  std::sort(returns.begin(), returns.end());
  EXPECT_EQ(study.avg_return.min, returns.front());
  EXPECT_EQ(study.avg_return.max, returns.back());
  EXPECT_THROW(seed_variance_study(small_targets(), std::span(seeds).first(1), train_cfg, EvalConfig{}),
               std::invalid_argument);
}

TEST(Metrics, Examples) {
  const std::vector<double> flat{1, 1, 1};
  EXPECT_EQ(discontinuity_metrics(flat).max_adjacent_jump, 0.0);
  const std::vector<double> spike{0, 5, 0};
  const auto m = discontinuity_metrics(spike, std::nullopt, 1.0);
  EXPECT_EQ(m.max_adjacent_jump, 5.0);
  EXPECT_EQ(m.jump_count, 2u);
  EXPECT_FALSE(m.refinement_ratio.has_value());
  EXPECT_THROW(discontinuity_metrics(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Metrics, LinearRampRefinesByTen) {
  const std::size_t n = 101;
  const auto coarse = slice_grid(n, 0.0, 1.0);
  const auto fine = slice_grid((n - 1) * 10 + 1, 0.0, 1.0);
  const auto m = discontinuity_metrics(coarse, std::span<const double>(fine));
  EXPECT_NEAR(m.max_adjacent_jump, 1.0 / (n - 1), 1e-12);
  ASSERT_TRUE(m.refinement_ratio.has_value());
  EXPECT_NEAR(*m.refinement_ratio, 0.1, 1e-9);
}

TEST(Metrics, StepFunctionPersistsUnderRefinement) {
  const auto step_fn = [](const std::vector<double>& xs) {
    std::vector<double> v;
    for (double x : xs) v.push_back(x < 0.3 ? 0.0 : 1.0);
    return v;
  };
  const auto coarse = step_fn(slice_grid(100, 0, 1)), fine = step_fn(slice_grid(991, 0, 1));
  EXPECT_EQ(*discontinuity_metrics(coarse, std::span<const double>(fine)).refinement_ratio, 1.0);
}

TEST(Slice, GridIsEvenAndInsideBounds) {
  const auto g = slice_grid(10000, -kSliceEdge, kSliceEdge);
  ASSERT_EQ(g.size(), 10000u);
  EXPECT_EQ(g.front(), -kSliceEdge);
  EXPECT_EQ(g.back(), kSliceEdge);
  const double h = (2 * kSliceEdge) / 9999.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    ASSERT_GT(g[i], g[i - 1]);
    ASSERT_NEAR(g[i] - g[i - 1], h, 1e-15);
  }
  EXPECT_LT(kSliceEdge, PhysicsParams{}.theta_bound);
}

TEST(Slice, SpecValidation) {
  SliceSpec spec;
  spec.n_points = 1;
  EXPECT_THROW(validate(spec), std::invalid_argument);
  spec = {};
  spec.theta_max = 0.3;
  EXPECT_THROW(validate(spec), std::invalid_argument);
}

TEST(Slice, ConstantRewardStubIsFlat) {
  SliceSpec spec;
  spec.n_points = 200;
  spec.refine = 10;
  const auto r = q_slice(AntiAngle{}, spec, ConstantRewardStepper{1.0}, RolloutConfig{}, 1);
  for (double v : r.values) ASSERT_EQ(v, r.values.front());
  EXPECT_EQ(r.metrics.max_adjacent_jump, 0.0);
  EXPECT_EQ(r.metrics.refinement_ratio, 0.0);
}

TEST(Slice, SmoothStubBehavesLikeRamp) {
  SliceSpec spec;
  spec.n_points = 100;
  spec.refine = 10;
  RolloutConfig cfg;
  cfg.horizon = 50;
  const auto r = q_slice(PushLeft{}, spec, SmoothStepper{}, cfg, 1);
  ASSERT_TRUE(r.metrics.refinement_ratio.has_value());
  EXPECT_NEAR(*r.metrics.refinement_ratio, 0.1, 0.02);
}

TEST(Slice, DeterministicPolicyIsReproducible) {
  SliceSpec spec;
  spec.n_points = 500;
  const auto a = q_slice(PushLeft{}, spec, RealDynamics{}, RolloutConfig{}, 1);
  const auto b = q_slice(PushLeft{}, spec, RealDynamics{}, RolloutConfig{}, 99, 3);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.thetas, b.thetas);
  EXPECT_GT(a.metrics.max_adjacent_jump, 0.0);
  EXPECT_EQ(a.policy, "push-left");
}

TEST(Slice, StochasticPolicyUsesPerPointStreams) {
  Rng rng(4);
  const QFunction q{init_params(rng)};
  SliceSpec spec;
  spec.n_points = 200;
  spec.repeats = 2;
  const auto a = q_slice(EpsilonGreedy{q, 0.05}, spec, RealDynamics{}, RolloutConfig{}, 5, 1);
  const auto b = q_slice(EpsilonGreedy{q, 0.05}, spec, RealDynamics{}, RolloutConfig{}, 5, 4);
  EXPECT_EQ(a.values, b.values);
}

TEST(Slice, PerActionMode) {
  SliceSpec spec;
  spec.n_points = 50;
  spec.per_action = true;
  const auto r = q_slice(PushLeft{}, spec, RealDynamics{}, RolloutConfig{}, 1);
  ASSERT_EQ(r.left_values.size(), 50u);
  ASSERT_EQ(r.right_values.size(), 50u);
  EXPECT_EQ(r.left_values, r.values);  // push-left's own action is Left
}

TEST(Emit, SliceCsvRoundTrip) {
  test_support::TempDir dir;
  SliceSpec spec;
  spec.n_points = 300;
  spec.refine = 2;
  const auto r = q_slice(AntiAngle{}, spec, RealDynamics{}, RolloutConfig{}, 1);
  emit_slice_csv(r, dir / "s.csv");
  const std::string text = csv::read_file(dir / "s.csv");
  const auto doc = csv::parse(text, "theta,value");
  EXPECT_EQ(doc.rows.size(), 300u);
  const auto back = load_slice_csv(dir / "s.csv");
  EXPECT_EQ(back.thetas, r.thetas);
  EXPECT_EQ(back.values, r.values);
  EXPECT_EQ(back.policy, "anti-angle");
  EXPECT_EQ(back.metrics.max_adjacent_jump, r.metrics.max_adjacent_jump);
  EXPECT_EQ(back.metrics.refinement_ratio, r.metrics.refinement_ratio);
}

TEST(Emit, HistoryAndEvalCsv) {
  test_support::TempDir dir;
  IterationHistory h;
  h.variant = Variant::BsfReal;
  for (std::size_t i = 0; i < 3; ++i) {
    IterationRecord rec;
    rec.iteration = i;
    rec.report = {100.0 / 3.0 * static_cast<double>(i + 1), i == 2 ? 1.0 : 0.1, i == 2, 10, 100};
    h.iterations.push_back(rec);
  }
  emit_history_csv(h, dir / "h.csv");
  const auto rows = load_history_csv(dir / "h.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].avg_return, h.iterations[1].report.avg_return);
  EXPECT_TRUE(rows[2].successful);

  SeedStudy study;
  study.entries = {{1, {10.1, 0, false, 5, 50}}, {2, {20.2, 1, true, 5, 50}}};
  emit_eval_csv(study, dir / "e.csv", 4);
  const auto g = load_eval_csv(dir / "e.csv");
  ASSERT_EQ(g.groups, std::vector<std::size_t>{4});
  EXPECT_EQ(g.returns[0], (std::vector<double>{10.1, 20.2}));
}

namespace {

// Tag balance check: every opened element is closed in order.
bool well_formed_xml(const std::string& text) {
  std::stack<std::string> open;
  std::size_t pos = 0;
  bool saw_root = false;
  while ((pos = text.find('<', pos)) != std::string::npos) {
    const auto end = text.find('>', pos);
    if (end == std::string::npos) return false;
    const std::string tag = text.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag[0] == '/') {
      if (open.empty() || open.top() != tag.substr(1)) return false;
      open.pop();
      continue;
    }
    const std::string name = tag.substr(0, tag.find_first_of(" /"));
    if (name == "svg") saw_root = true;
    if (tag.back() != '/') open.push(name);
  }
  return saw_root && open.empty();
}

}  // namespace

TEST(Plot, ConstantSliceIsHorizontalLine) {
  test_support::TempDir dir;
  SliceResult r;
  r.policy = "push-left";
  r.thetas = slice_grid(50, -0.2, 0.2);
  r.values.assign(50, 42.0);
  emit_plot(r, dir / "p.svg");
  const std::string svg = csv::read_file(dir / "p.svg");
  EXPECT_TRUE(well_formed_xml(svg));
  const auto start = svg.find("<polyline");
  ASSERT_NE(start, std::string::npos);
  const auto pts_at = svg.find("points=\"", start) + 8;
  const std::string pts = svg.substr(pts_at, svg.find('"', pts_at) - pts_at);
  std::regex pair_re("([-0-9.]+),([-0-9.]+)");
  std::set<std::string> ys;
  std::size_t count = 0;
  for (std::sregex_iterator it(pts.begin(), pts.end(), pair_re), end; it != end; ++it, ++count) ys.insert((*it)[2]);
  EXPECT_EQ(count, 50u);
  EXPECT_EQ(ys.size(), 1u);
}

TEST(Plot, AllKindsAreWellFormed) {
  test_support::TempDir dir;
  GroupedReturns g{{0, 1}, {{1, 2, 3, 4}, {5, 5, 6}}};
  emit_plot(g, dir / "g.svg");
  EXPECT_TRUE(well_formed_xml(csv::read_file(dir / "g.svg")));
  const std::vector<HistoryRow> rows{{0, 10, 0, false}, {1, 50, 1, true}};
  emit_plot(rows, dir / "h.svg");
  EXPECT_TRUE(well_formed_xml(csv::read_file(dir / "h.svg")));
}

TEST(Plot, EmptyInputsThrow) {
  test_support::TempDir dir;
  EXPECT_THROW(emit_plot(SliceResult{}, dir / "a.svg"), std::invalid_argument);
  EXPECT_THROW(emit_plot(GroupedReturns{}, dir / "b.svg"), std::invalid_argument);
  EXPECT_THROW(emit_plot(std::span<const HistoryRow>{}, dir / "c.svg"), std::invalid_argument);
}
