#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qlab/evaluation.hpp"
#include "qlab/q_iteration.hpp"

namespace qlab {

// ---------------------------------------------------------------------------
// Seed-variance study: refit the same targets under many seeds.

struct BoxSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Linear-interpolation quantiles (type 7) of a non-empty sample.
BoxSummary summarize(std::vector<double> values);

struct SeedStudyEntry {
  std::uint64_t seed = 0;
  EvalReport report;
};

struct SeedStudy {
  std::vector<SeedStudyEntry> entries;
  BoxSummary avg_return;
};

/// For each seed: fit_q on `t` with train_cfg.seed = seed, evaluate the greedy
/// policy with `eval_cfg`. Throws std::invalid_argument for fewer than 2 seeds.
SeedStudy seed_variance_study(const TargetSet& t, std::span<const std::uint64_t> seeds, const TrainConfig& train_cfg,
                              const EvalConfig& eval_cfg);

/// Seeds derive_seed(base_seed, k) for k < n_seeds.
std::vector<std::uint64_t> study_seeds(std::uint64_t base_seed, std::size_t n_seeds);

// ---------------------------------------------------------------------------
// Pole-angle slices of rollout values.

inline constexpr double kSliceEdge = 0.2095 * (1.0 - 1e-9);

struct SliceSpec {
  std::size_t n_points = 10000;
  double theta_min = -kSliceEdge;
  double theta_max = kSliceEdge;
  /// When > 1, a second slice with (n_points - 1) * refine + 1 points is
  /// computed for the refinement ratio.
  std::size_t refine = 0;
  /// Sampled rollouts averaged per point (stochastic policies only).
  std::size_t repeats = 1;
  /// Also record the rollout value of both actions.
  bool per_action = false;
  double jump_threshold = 1.0;
};

/// Throws std::invalid_argument unless n_points >= 2, repeats >= 1 and the
/// range is increasing and inside the termination bound.
void validate(const SliceSpec& spec);

std::vector<double> slice_grid(std::size_t n_points, double lo, double hi);

struct DiscontinuityMetrics {
  double max_adjacent_jump = 0.0;
  double jump_threshold = 0.0;
  std::size_t jump_count = 0;
  /// Max jump on the refined grid over max jump on the base grid; 0 when
  /// neither grid has any jump.
  std::optional<double> refinement_ratio;
};

std::size_t jump_count(std::span<const double> values, double threshold);

/// Throws std::invalid_argument for fewer than 2 values.
DiscontinuityMetrics discontinuity_metrics(std::span<const double> values,
                                           std::optional<std::span<const double>> refined = std::nullopt,
                                           double threshold = 1.0);

struct SliceResult {
  std::vector<double> thetas;
  std::vector<double> values;
  std::vector<double> left_values;   // per_action only
  std::vector<double> right_values;  // per_action only
  std::string policy;
  DiscontinuityMetrics metrics;
};

/// For each grid angle, the state (0, 0, theta, 0) is valued by
/// rollout_return(s, pi(s), pi, ...). Point i draws from substream i of `seed`.
SliceResult q_slice(const Policy& pi, const SliceSpec& spec, const Stepper& st, const RolloutConfig& cfg,
                    std::uint64_t seed, std::size_t workers = 1);

// ---------------------------------------------------------------------------
// Emitters.

void emit_slice_csv(const SliceResult& r, const std::filesystem::path& path);
SliceResult load_slice_csv(const std::filesystem::path& path);

/// A seed study tagged with a group id, typically the iteration whose targets were refit.
struct StudyGroup {
  std::size_t group = 0;
  SeedStudy study;
};

/// One row per (group, seed).
void emit_eval_csv(std::span<const StudyGroup> groups, const std::filesystem::path& path);
void emit_eval_csv(const SeedStudy& study, const std::filesystem::path& path, std::size_t group = 0);

struct GroupedReturns {
  std::vector<std::size_t> groups;
  std::vector<std::vector<double>> returns;
};
GroupedReturns load_eval_csv(const std::filesystem::path& path);

void emit_history_csv(const IterationHistory& h, const std::filesystem::path& path);

struct HistoryRow {
  std::size_t iteration = 0;
  double avg_return = 0.0;
  double success_rate = 0.0;
  bool successful = false;
};
std::vector<HistoryRow> load_history_csv(const std::filesystem::path& path);

}  // namespace qlab
