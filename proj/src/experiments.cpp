#include "qlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qlab/csv.hpp"
#include "qlab/errors.hpp"
#include "qlab/parallel.hpp"

namespace qlab {

BoxSummary summarize(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("cannot summarize an empty sample");
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  return {values.front(), quantile(0.25), quantile(0.5), quantile(0.75), values.back()};
}

std::vector<std::uint64_t> study_seeds(std::uint64_t base_seed, std::size_t n_seeds) {
  std::vector<std::uint64_t> seeds(n_seeds);
  for (std::size_t k = 0; k < n_seeds; ++k) seeds[k] = derive_seed(base_seed, k);
  return seeds;
}

SeedStudy seed_variance_study(const TargetSet& t, std::span<const std::uint64_t> seeds, const TrainConfig& train_cfg,
                              const EvalConfig& eval_cfg) {
  if (seeds.size() < 2) throw std::invalid_argument("a seed study needs at least 2 seeds");
  SeedStudy study;
  std::vector<double> returns;
  for (const std::uint64_t seed : seeds) {
    TrainConfig cfg = train_cfg;
    cfg.seed = seed;
    const QFunction q = fit_q(t, cfg);
    study.entries.push_back({seed, evaluate_policy(GreedyQ{q}, eval_cfg)});
    returns.push_back(study.entries.back().report.avg_return);
  }
  study.avg_return = summarize(std::move(returns));
  return study;
}

void validate(const SliceSpec& spec) {
  if (spec.n_points < 2) throw std::invalid_argument("a slice needs at least 2 points");
  if (spec.repeats < 1) throw std::invalid_argument("a slice needs at least 1 rollout per point");
  if (!(spec.theta_min < spec.theta_max)) throw std::invalid_argument("slice range must be increasing");
  const PhysicsParams defaults;
  if (std::abs(spec.theta_min) > defaults.theta_bound || std::abs(spec.theta_max) > defaults.theta_bound) {
    throw std::invalid_argument("slice range must lie within the pole-angle termination bound");
  }
}

std::vector<double> slice_grid(std::size_t n_points, double lo, double hi) {
  std::vector<double> grid(n_points);
  const double span = hi - lo;
  const double last = static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) grid[i] = lo + span * (static_cast<double>(i) / last);
  grid.back() = hi;
  return grid;
}

std::size_t jump_count(std::span<const double> values, double threshold) {
  std::size_t count = 0;
  for (std::size_t i = 1; i < values.size(); ++i) count += std::abs(values[i] - values[i - 1]) > threshold ? 1 : 0;
  return count;
}

namespace {

double max_jump(std::span<const double> values) {
  double m = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) m = std::max(m, std::abs(values[i] - values[i - 1]));
  return m;
}

}  // namespace

DiscontinuityMetrics discontinuity_metrics(std::span<const double> values,
                                           std::optional<std::span<const double>> refined, double threshold) {
  if (values.size() < 2) throw std::invalid_argument("discontinuity metrics need at least 2 values");
  DiscontinuityMetrics m;
  m.max_adjacent_jump = max_jump(values);
  m.jump_threshold = threshold;
  m.jump_count = jump_count(values, threshold);
  if (refined) {
    if (refined->size() < 2) throw std::invalid_argument("refined slice needs at least 2 values");
    const double fine = max_jump(*refined);
    m.refinement_ratio = m.max_adjacent_jump > 0.0 ? fine / m.max_adjacent_jump : (fine > 0.0 ? INFINITY : 0.0);
  }
  return m;
}

namespace {

struct SliceValues {
  std::vector<double> values, left, right;
};

SliceValues slice_values(const Policy& pi, const std::vector<double>& thetas, const SliceSpec& spec,
                         const Stepper& st, const RolloutConfig& cfg, std::uint64_t seed, std::size_t workers) {
  SliceValues out;
  out.values.resize(thetas.size());
  if (spec.per_action) {
    out.left.resize(thetas.size());
    out.right.resize(thetas.size());
  }
  const std::size_t repeats = is_stochastic(pi) ? spec.repeats : 1;
  parallel_for(thetas.size(), workers, [&](std::size_t i) {
    const State s{0.0, 0.0, thetas[i], 0.0};
    const std::uint64_t point_seed = derive_seed(seed, i);
    const auto average = [&](auto&& first_action, std::uint64_t salt) {
      double sum = 0.0;
      for (std::size_t r = 0; r < repeats; ++r) {
        Rng rng(derive_seed(point_seed, salt * 1'000'003 + r));
        sum += rollout_return(s, first_action(rng), pi, st, cfg, rng);
      }
      return sum / static_cast<double>(repeats);
    };
    out.values[i] = average([&](Rng& rng) { return policy_action(pi, s, rng); }, 0);
    if (spec.per_action) {
      out.left[i] = average([](Rng&) { return Action::Left; }, 1);
      out.right[i] = average([](Rng&) { return Action::Right; }, 2);
    }
  });
  return out;
}

}  // namespace

SliceResult q_slice(const Policy& pi, const SliceSpec& spec, const Stepper& st, const RolloutConfig& cfg,
                    std::uint64_t seed, std::size_t workers) {
  validate(spec);
  validate(cfg);
  validate(pi);

  SliceResult r;
  r.policy = describe(pi);
  r.thetas = slice_grid(spec.n_points, spec.theta_min, spec.theta_max);
  auto base = slice_values(pi, r.thetas, spec, st, cfg, seed, workers);
  r.values = std::move(base.values);
  r.left_values = std::move(base.left);
  r.right_values = std::move(base.right);

  if (spec.refine > 1) {
    SliceSpec fine_spec = spec;
    fine_spec.per_action = false;
    const auto fine_thetas = slice_grid((spec.n_points - 1) * spec.refine + 1, spec.theta_min, spec.theta_max);
    const auto fine = slice_values(pi, fine_thetas, fine_spec, st, cfg, derive_seed(seed, 0xf1e1), workers);
    r.metrics = discontinuity_metrics(r.values, std::span<const double>(fine.values), spec.jump_threshold);
  } else {
    r.metrics = discontinuity_metrics(r.values, std::nullopt, spec.jump_threshold);
  }
  return r;
}

namespace {

constexpr const char* kSliceHeader = "theta,value";
constexpr const char* kSliceActionHeader = "theta,value,q_left,q_right";
constexpr const char* kEvalHeader = "group,seed,avg_return,success_rate,successful,n_episodes,max_steps";
constexpr const char* kHistoryHeader = "iteration,avg_return,success_rate,successful,epochs,best_epoch,best_val";

}  // namespace

void emit_slice_csv(const SliceResult& r, const std::filesystem::path& path) {
  const bool per_action = !r.left_values.empty();
  std::string out = "# policy=" + r.policy + " n_points=" + std::to_string(r.values.size()) + "\n";
  out += "# max_adjacent_jump=" + csv::format_double(r.metrics.max_adjacent_jump) +
         " jump_threshold=" + csv::format_double(r.metrics.jump_threshold) +
         " jump_count=" + std::to_string(r.metrics.jump_count);
  if (r.metrics.refinement_ratio) out += " refinement_ratio=" + csv::format_double(*r.metrics.refinement_ratio);
  out += "\n";
  out += per_action ? kSliceActionHeader : kSliceHeader;
  out += '\n';
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    out += csv::format_double(r.thetas[i]) + ',' + csv::format_double(r.values[i]);
    if (per_action) out += ',' + csv::format_double(r.left_values[i]) + ',' + csv::format_double(r.right_values[i]);
    out += '\n';
  }
  csv::write_file(path, out);
}

SliceResult load_slice_csv(const std::filesystem::path& path) {
  const std::string text = csv::read_file(path);
  const bool per_action = text.find(std::string("\n") + kSliceActionHeader + "\n") != std::string::npos ||
                          text.starts_with(std::string(kSliceActionHeader) + "\n");
  const auto doc = csv::parse(text, per_action ? kSliceActionHeader : kSliceHeader, path.string());
  SliceResult r;
  r.policy = csv::comment_value(doc, "policy");
  for (const auto& row : doc.rows) {
    r.thetas.push_back(row.real(0));
    r.values.push_back(row.real(1));
    if (per_action) {
      r.left_values.push_back(row.real(2));
      r.right_values.push_back(row.real(3));
    }
  }
  if (r.values.size() >= 2) {
    const auto threshold = csv::comment_value(doc, "jump_threshold", "1");
    r.metrics = discontinuity_metrics(r.values, std::nullopt, csv::parse_double(threshold));
    const auto ratio = csv::comment_value(doc, "refinement_ratio");
    if (!ratio.empty()) r.metrics.refinement_ratio = csv::parse_double(ratio);
  }
  return r;
}

void emit_eval_csv(std::span<const StudyGroup> groups, const std::filesystem::path& path) {
  std::string out = kEvalHeader;
  out += '\n';
  for (const auto& g : groups) {
    for (const auto& e : g.study.entries) {
      out += std::to_string(g.group) + ',' + std::to_string(e.seed) + ',' + csv::format_double(e.report.avg_return) +
             ',' + csv::format_double(e.report.success_rate) + ',' + (e.report.successful ? "1" : "0") + ',' +
             std::to_string(e.report.n_episodes) + ',' + std::to_string(e.report.max_steps) + '\n';
    }
  }
  csv::write_file(path, out);
}

void emit_eval_csv(const SeedStudy& study, const std::filesystem::path& path, std::size_t group) {
  const StudyGroup g{group, study};
  emit_eval_csv(std::span<const StudyGroup>(&g, 1), path);
}

GroupedReturns load_eval_csv(const std::filesystem::path& path) {
  const auto doc = csv::read(path, kEvalHeader);
  GroupedReturns out;
  for (const auto& row : doc.rows) {
    const auto group = static_cast<std::size_t>(row.integer(0));
    auto it = std::find(out.groups.begin(), out.groups.end(), group);
    if (it == out.groups.end()) {
      out.groups.push_back(group);
      out.returns.emplace_back();
      it = out.groups.end() - 1;
    }
    out.returns[static_cast<std::size_t>(it - out.groups.begin())].push_back(row.real(2));
  }
  return out;
}

void emit_history_csv(const IterationHistory& h, const std::filesystem::path& path) {
  std::string out = "# variant=" + to_string(h.variant) + " master_seed=" + std::to_string(h.master_seed) + "\n";
  out += kHistoryHeader;
  out += '\n';
  for (const auto& rec : h.iterations) {
    out += std::to_string(rec.iteration) + ',' + csv::format_double(rec.report.avg_return) + ',' +
           csv::format_double(rec.report.success_rate) + ',' + (rec.report.successful ? "1" : "0") + ',' +
           std::to_string(rec.epochs) + ',' + std::to_string(rec.best_epoch) + ',' +
           csv::format_double(rec.best_val) + '\n';
  }
  csv::write_file(path, out);
}

std::vector<HistoryRow> load_history_csv(const std::filesystem::path& path) {
  const auto doc = csv::read(path, kHistoryHeader);
  std::vector<HistoryRow> rows;
  for (const auto& row : doc.rows) {
    rows.push_back({static_cast<std::size_t>(row.integer(0)), row.real(1), row.real(2), row.flag(3)});
  }
  return rows;
}

}  // namespace qlab
