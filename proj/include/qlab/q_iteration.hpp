#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qlab/dataset.hpp"
#include "qlab/dynamics_model.hpp"
#include "qlab/evaluation.hpp"
#include "qlab/mlp.hpp"
#include "qlab/policy.hpp"
#include "qlab/stepper.hpp"

namespace qlab {

struct RolloutConfig {
  std::size_t horizon = 1000;
  double gamma = 0.99;
};

void validate(const RolloutConfig& cfg);

/// Discounted reward mass dropped by truncating at the horizon: gamma^K / (1 - gamma).
double truncation_bound(const RolloutConfig& cfg);

/// NFQ: bootstrapped targets. BsfLearned / BsfReal: policy rollouts through
/// the learned model or the true equations of motion.
enum class Variant { Nfq, BsfLearned, BsfReal };

std::string to_string(Variant v);
/// Accepts "nfq", "bsf" and "bsf-real".
Variant variant_from_string(const std::string& name);

struct TargetProvenance {
  Variant regime = Variant::Nfq;
  std::size_t iteration = 0;
  std::string policy = "greedy";

  bool operator==(const TargetProvenance&) const = default;
};

struct TargetSet {
  RegressionSet data;
  TargetProvenance provenance;

  std::size_t size() const { return data.size(); }
};

/// r + gamma * max_a Q(s', a), or r alone for terminal transitions.
TargetSet nfq_targets(const QFunction& q, const Dataset& d, double gamma);

/// Discounted return of taking `a` in `s` and following `pi` afterwards for
/// at most cfg.horizon steps. Stops after the first terminal step, whose
/// reward is included. Only stochastic policies draw from `rng`.
double rollout_return(const State& s, Action a, const Policy& pi, const Stepper& st, const RolloutConfig& cfg,
                      Rng& rng);

/// r + gamma * rollout_return(s', pi(s')), or r alone for terminal
/// transitions. Transition k uses substream k of `seed` for its policy
/// draws, so the result does not depend on `workers`.
TargetSet bsf_targets(const Policy& pi, const Dataset& d, const Stepper& st, const RolloutConfig& cfg,
                      std::uint64_t seed, std::size_t workers = 1);

inline constexpr std::size_t kMinFitSize = 10;

/// Fits a fresh net to the targets on a 70/30 split; cfg.seed drives both the
/// split and the initialization. Throws std::invalid_argument below kMinFitSize.
QFunction fit_q(const TargetSet& t, const TrainConfig& cfg, TrainResult* details = nullptr);

inline constexpr const char* kTargetsHeader = "x,x_dot,theta,theta_dot,action,target";

std::string to_csv(const TargetSet& t);
TargetSet targets_from_csv(const std::string& text, const std::string& source = "<memory>");
void save(const TargetSet& t, const std::filesystem::path& path);
TargetSet load_targets(const std::filesystem::path& path);

struct RunConfig {
  TrainConfig q_train;      // seed is replaced per iteration
  TrainConfig model_train;  // seed is replaced from the master seed
  RolloutConfig rollout;
  EvalConfig eval;          // seed is replaced from the master seed
  std::size_t workers = 1;
};

struct IterationRecord {
  std::size_t iteration = 0;
  TargetSet targets;  // computed from the previous iteration's Q
  QFunction q;        // fitted to `targets`
  EvalReport report;  // greedy policy of `q` on the real dynamics
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double best_val = 0.0;
};

struct IterationHistory {
  Variant variant = Variant::Nfq;
  std::uint64_t master_seed = 0;
  std::vector<IterationRecord> iterations;
  std::optional<DynamicsFit> model;  // BsfLearned only
};

/// Substream seeds of a run, all derived from the master seed.
struct RunSeeds {
  std::uint64_t master = 0;

  std::uint64_t initial_q() const { return derive_seed(master, 1); }
  std::uint64_t model() const { return derive_seed(master, 2); }
  std::uint64_t eval() const { return derive_seed(master, 3); }
  std::uint64_t fit(std::size_t iteration) const { return derive_seed(master, 1000 + iteration); }
  std::uint64_t rollout(std::size_t iteration) const { return derive_seed(master, 2000 + iteration); }
};

/// Outer loop: starts from a randomly initialized Q, then per iteration
/// computes targets from the current greedy policy, fits a fresh Q and
/// evaluates it. `on_iteration` sees each record as soon as it is complete.
IterationHistory run_iterations(Variant variant, std::size_t n_iters, const Dataset& d, const RunConfig& cfg,
                                std::uint64_t master_seed,
                                const std::function<void(const IterationRecord&)>& on_iteration = {});

}  // namespace qlab
