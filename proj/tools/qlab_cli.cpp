// qlab: command-line front end for dataset generation, Q-iteration runs,
// policy evaluation, seed-variance studies, value slices and plots.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qlab/csv.hpp"
#include "qlab/errors.hpp"
#include "qlab/dataset.hpp"
#include "qlab/dynamics_model.hpp"
#include "qlab/evaluation.hpp"
#include "qlab/experiments.hpp"
#include "qlab/q_iteration.hpp"
#include "qlab/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace qlab;

namespace {

/// Ordered key=value run record. Holds no timestamps or worker counts, so
/// repeated runs produce identical files.
class Manifest {
 public:
  explicit Manifest(std::string command) { add("command", std::move(command)); }

  void add(const std::string& key, const std::string& value) { lines_ += key + "=" + value + "\n"; }
  void add(const std::string& key, double value) { add(key, csv::format_double(value)); }
  void add(const std::string& key, std::uint64_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, std::size_t value, int) { add(key, std::to_string(value)); }

  void add_train(const std::string& prefix, const TrainConfig& cfg) {
    add(prefix + ".learning_rate", cfg.learning_rate);
    add(prefix + ".batch_size", std::to_string(cfg.batch_size));
    add(prefix + ".patience", std::to_string(cfg.patience));
    add(prefix + ".max_epochs", std::to_string(cfg.max_epochs));
  }

  void write(const fs::path& path) const { csv::write_file(path, lines_); }

 private:
  std::string lines_;
};

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

struct TrainOptions {
  TrainConfig cfg;
  void attach(CLI::App* app, const std::string& prefix = "") {
    app->add_option("--" + prefix + "lr", cfg.learning_rate, "Adam learning rate")->capture_default_str();
    app->add_option("--" + prefix + "batch", cfg.batch_size, "mini-batch size")->capture_default_str();
    app->add_option("--" + prefix + "patience", cfg.patience, "early-stopping patience (epochs)")->capture_default_str();
    app->add_option("--" + prefix + "max-epochs", cfg.max_epochs, "epoch cap")->capture_default_str();
  }
};

struct EvalOptions {
  EvalConfig cfg;
  void attach(CLI::App* app) {
    app->add_option("--episodes", cfg.n_episodes, "evaluation episodes")->capture_default_str();
    app->add_option("--max-steps", cfg.max_steps, "evaluation step cap")->capture_default_str();
  }
};

struct RolloutOptions {
  RolloutConfig cfg;
  void attach(CLI::App* app) {
    app->add_option("--horizon", cfg.horizon, "rollout horizon K")->capture_default_str();
    app->add_option("--gamma", cfg.gamma, "discount factor")->capture_default_str();
  }
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string iteration_dir(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "iter_%03zu", i);
  return buf;
}

Policy make_policy(const std::string& name, const std::string& params_path, double epsilon) {
  if (name == "push-left") return PushLeft{};
  if (name == "anti-angle") return AntiAngle{};
  if (params_path.empty()) throw std::invalid_argument("policy '" + name + "' needs --params");
  const QFunction q{load_params(params_path)};
  if (name == "greedy") return GreedyQ{q};
  if (name == "eps-greedy") return EpsilonGreedy{q, epsilon};
  throw std::invalid_argument("unknown policy '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline Q-learning laboratory on cart-pole"};
  app.require_subcommand(1);
  app.fallthrough();
  std::size_t workers = 1;
  app.add_option("--workers", workers, "worker threads (results do not depend on this)")->capture_default_str();

  // generate-data
  auto* gen = app.add_subcommand("generate-data", "roll out a uniform random policy into a dataset CSV");
  std::size_t gen_n = 20000;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--n", gen_n, "number of transitions")->capture_default_str();
  gen->add_option("--seed", gen_seed, "generation seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output CSV")->required();

  // run
  auto* run = app.add_subcommand("run", "iterate NFQ / BSF-NFQ and record every iteration");
  std::string run_variant = "bsf-real", run_data, run_out = "run";
  std::size_t run_iters = 30, run_n = 20000;
  std::uint64_t run_seed = 1;
  TrainOptions run_train, run_model;
  EvalOptions run_eval;
  RolloutOptions run_rollout;
  run->add_option("--variant", run_variant, "nfq | bsf | bsf-real")
      ->check(CLI::IsMember({"nfq", "bsf", "bsf-real"}))
      ->capture_default_str();
  run->add_option("--iters", run_iters, "iterations")->capture_default_str();
  run->add_option("--seed", run_seed, "master seed")->capture_default_str();
  run->add_option("--data", run_data, "dataset CSV (generated from the master seed when omitted)");
  run->add_option("--n", run_n, "transitions to generate when --data is omitted")->capture_default_str();
  run->add_option("--out", run_out, "output directory")->capture_default_str();
  run_train.attach(run);
  run_model.attach(run, "model-");
  run_eval.attach(run);
  run_rollout.attach(run);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "evaluate a policy on the real dynamics");
  std::string ev_policy = "greedy", ev_params, ev_out;
  double ev_epsilon = 0.05;
  std::uint64_t ev_seed = 1;
  EvalOptions ev_eval;
  ev->add_option("--policy", ev_policy, "greedy | eps-greedy | push-left | anti-angle")
      ->check(CLI::IsMember({"greedy", "eps-greedy", "push-left", "anti-angle"}))
      ->capture_default_str();
  ev->add_option("--params", ev_params, "Q-network parameter file");
  ev->add_option("--epsilon", ev_epsilon, "exploration rate for eps-greedy")->capture_default_str();
  ev->add_option("--seed", ev_seed, "evaluation seed")->capture_default_str();
  ev->add_option("--out", ev_out, "report file (stdout only when omitted)");
  ev_eval.attach(ev);

  // seed-study
  auto* study = app.add_subcommand("seed-study", "refit saved targets under many seeds and evaluate each");
  std::vector<std::string> study_targets;
  std::size_t study_n = 100;
  std::uint64_t study_seed = 1;
  std::string study_out = "seed_study";
  TrainOptions study_train;
  EvalOptions study_eval;
  study->add_option("--targets", study_targets, "saved TargetSet CSV (repeatable)")->required();
  study->add_option("--seeds", study_n, "number of seeds")->capture_default_str();
  study->add_option("--seed", study_seed, "base seed (seeds and evaluation derive from it)")->capture_default_str();
  study->add_option("--out", study_out, "output directory")->capture_default_str();
  study_train.attach(study);
  study_eval.attach(study);

  // slice
  auto* sl = app.add_subcommand("slice", "rollout values along the pole angle with x, x_dot, theta_dot = 0");
  std::string sl_policy = "push-left", sl_params, sl_model, sl_out = "slice";
  double sl_epsilon = 0.05;
  std::uint64_t sl_seed = 1;
  SliceSpec sl_spec;
  RolloutOptions sl_rollout;
  sl->add_option("--policy", sl_policy, "greedy | eps-greedy | push-left | anti-angle")
      ->check(CLI::IsMember({"greedy", "eps-greedy", "push-left", "anti-angle"}))
      ->capture_default_str();
  sl->add_option("--params", sl_params, "Q-network parameter file (greedy policies)");
  sl->add_option("--epsilon", sl_epsilon, "exploration rate for eps-greedy")->capture_default_str();
  sl->add_option("--points", sl_spec.n_points, "grid points")->capture_default_str();
  sl->add_option("--refine", sl_spec.refine, "refinement factor for the persistence ratio (0: off)")
      ->capture_default_str();
  sl->add_option("--repeats", sl_spec.repeats, "rollouts averaged per point (stochastic policies)")
      ->capture_default_str();
  sl->add_option("--threshold", sl_spec.jump_threshold, "jump-count threshold")->capture_default_str();
  sl->add_flag("--per-action", sl_spec.per_action, "also record both actions' values");
  sl->add_option("--model", sl_model, "roll out through a learned dynamics model file instead of the real dynamics");
  sl->add_option("--seed", sl_seed, "seed for stochastic rollouts")->capture_default_str();
  sl->add_option("--out", sl_out, "output directory")->capture_default_str();
  sl_rollout.attach(sl);

  // plot
  auto* pl = app.add_subcommand("plot", "render a CSV produced by slice, seed-study or run as SVG");
  std::string pl_kind, pl_in, pl_out;
  pl->add_option("--kind", pl_kind, "slice | seed-study | history")
      ->check(CLI::IsMember({"slice", "seed-study", "history"}))
      ->required();
  pl->add_option("--in", pl_in, "input CSV")->required();
  pl->add_option("--out", pl_out, "output SVG")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      Rng rng(gen_seed);
      const Dataset d = generate(gen_n, {}, rng);
      save(d, gen_out);
      Manifest m("generate-data");
      m.add("n", gen_n, 0);
      m.add("seed", gen_seed);
      m.add("dataset_hash", hex(content_hash(d)));
      m.write(gen_out + ".manifest.txt");
      std::cout << "wrote " << d.size() << " transitions to " << gen_out << "\n";
    } else if (*run) {
      const Variant variant = variant_from_string(run_variant);
      ensure_dir(run_out);
      Dataset d;
      if (run_data.empty()) {
        Rng rng(derive_seed(run_seed, 0xda7a));
        d = generate(run_n, {}, rng);
        save(d, fs::path(run_out) / "dataset.csv");
      } else {
        d = load_dataset(run_data);
      }

      RunConfig cfg;
      cfg.q_train = run_train.cfg;
      cfg.model_train = run_model.cfg;
      cfg.rollout = run_rollout.cfg;
      cfg.eval = run_eval.cfg;
      cfg.workers = workers;

      const RunSeeds seeds{run_seed};
      Manifest m("run");
      m.add("variant", to_string(variant));
      m.add("iters", run_iters, 0);
      m.add("master_seed", run_seed);
      m.add("dataset", run_data.empty() ? std::string("generated") : run_data);
      m.add("dataset_size", d.size(), 0);
      m.add("dataset_generation_seed", d.generation_seed);
      m.add("dataset_hash", hex(content_hash(d)));
      m.add_train("q_train", cfg.q_train);
      if (variant == Variant::BsfLearned) {
        m.add_train("model_train", cfg.model_train);
        m.add("seed.model", seeds.model());
      }
      m.add("rollout.horizon", cfg.rollout.horizon, 0);
      m.add("rollout.gamma", cfg.rollout.gamma);
      m.add("eval.episodes", cfg.eval.n_episodes, 0);
      m.add("eval.max_steps", cfg.eval.max_steps, 0);
      m.add("seed.initial_q", seeds.initial_q());
      m.add("seed.eval", seeds.eval());
      for (std::size_t i = 0; i < run_iters; ++i) {
        m.add("seed.fit." + std::to_string(i), seeds.fit(i));
        if (variant != Variant::Nfq) m.add("seed.rollout." + std::to_string(i), seeds.rollout(i));
      }
      m.write(fs::path(run_out) / "manifest.txt");

      const auto history = run_iterations(variant, run_iters, d, cfg, run_seed, [&](const IterationRecord& rec) {
        const fs::path dir = fs::path(run_out) / iteration_dir(rec.iteration);
        ensure_dir(dir);
        save(rec.targets, dir / "targets.csv");
        save(rec.q.params, dir / "q_params.csv");
        std::string report = to_text(rec.report);
        report += "epochs=" + std::to_string(rec.epochs) + "\n";
        report += "best_epoch=" + std::to_string(rec.best_epoch) + "\n";
        report += "best_val=" + csv::format_double(rec.best_val) + "\n";
        csv::write_file(dir / "report.txt", report);
        std::cout << "iteration " << rec.iteration << ": avg_return " << rec.report.avg_return << ", success_rate "
                  << rec.report.success_rate << (rec.report.successful ? " (successful)" : "") << std::endl;
      });
      if (history.model) save(history.model->model, fs::path(run_out) / "model.csv");
      emit_history_csv(history, fs::path(run_out) / "history.csv");
    } else if (*ev) {
      const Policy policy = make_policy(ev_policy, ev_params, ev_epsilon);
      EvalConfig cfg = ev_eval.cfg;
      cfg.seed = ev_seed;
      cfg.workers = workers;
      const EvalReport r = evaluate_policy(policy, cfg);
      std::cout << to_text(r);
      if (!ev_out.empty()) {
        csv::write_file(ev_out, to_text(r));
        Manifest m("evaluate");
        m.add("policy", describe(policy));
        m.add("params", ev_params);
        m.add("seed", ev_seed);
        m.add("episodes", cfg.n_episodes, 0);
        m.add("max_steps", cfg.max_steps, 0);
        m.write(ev_out + ".manifest.txt");
      }
    } else if (*study) {
      ensure_dir(study_out);
      EvalConfig eval_cfg = study_eval.cfg;
      eval_cfg.seed = derive_seed(study_seed, 0xe7a1);
      eval_cfg.workers = workers;
      const auto seeds = study_seeds(study_seed, study_n);

      Manifest m("seed-study");
      m.add("seeds", study_n, 0);
      m.add("base_seed", study_seed);
      m.add("eval.seed", eval_cfg.seed);
      m.add("eval.episodes", eval_cfg.n_episodes, 0);
      m.add("eval.max_steps", eval_cfg.max_steps, 0);
      m.add_train("train", study_train.cfg);
      for (std::size_t k = 0; k < study_targets.size(); ++k) m.add("targets." + std::to_string(k), study_targets[k]);
      m.write(fs::path(study_out) / "manifest.txt");

      std::vector<StudyGroup> groups;
      std::string summary;
      for (const auto& path : study_targets) {
        const TargetSet t = load_targets(path);
        groups.push_back({t.provenance.iteration, seed_variance_study(t, seeds, study_train.cfg, eval_cfg)});
        const auto& s = groups.back().study.avg_return;
        const std::string line = "group=" + std::to_string(t.provenance.iteration) + " min=" + csv::format_double(s.min) +
                                 " q1=" + csv::format_double(s.q1) + " median=" + csv::format_double(s.median) +
                                 " q3=" + csv::format_double(s.q3) + " max=" + csv::format_double(s.max) + "\n";
        summary += line;
        std::cout << line;
      }
      emit_eval_csv(groups, fs::path(study_out) / "seed_study.csv");
      csv::write_file(fs::path(study_out) / "summary.txt", summary);
    } else if (*sl) {
      ensure_dir(sl_out);
      const Policy policy = make_policy(sl_policy, sl_params, sl_epsilon);
      std::unique_ptr<Stepper> stepper;
      if (sl_model.empty()) {
        stepper = std::make_unique<RealDynamics>();
      } else {
        stepper = std::make_unique<LearnedModel>(load_model(sl_model));
      }
      const SliceResult r = q_slice(policy, sl_spec, *stepper, sl_rollout.cfg, sl_seed, workers);
      emit_slice_csv(r, fs::path(sl_out) / "slice.csv");

      Manifest m("slice");
      m.add("policy", describe(policy));
      m.add("params", sl_params);
      m.add("dynamics", sl_model.empty() ? std::string("real") : sl_model);
      m.add("points", sl_spec.n_points, 0);
      m.add("theta_min", sl_spec.theta_min);
      m.add("theta_max", sl_spec.theta_max);
      m.add("refine", sl_spec.refine, 0);
      m.add("repeats", sl_spec.repeats, 0);
      m.add("per_action", std::string(sl_spec.per_action ? "1" : "0"));
      m.add("rollout.horizon", sl_rollout.cfg.horizon, 0);
      m.add("rollout.gamma", sl_rollout.cfg.gamma);
      m.add("seed", sl_seed);
      m.add("max_adjacent_jump", r.metrics.max_adjacent_jump);
      m.add("jump_threshold", r.metrics.jump_threshold);
      m.add("jump_count", r.metrics.jump_count, 0);
      if (r.metrics.refinement_ratio) m.add("refinement_ratio", *r.metrics.refinement_ratio);
      m.write(fs::path(sl_out) / "manifest.txt");

      std::cout << "max_adjacent_jump=" << r.metrics.max_adjacent_jump << "\njump_count=" << r.metrics.jump_count << "\n";
      if (r.metrics.refinement_ratio) std::cout << "refinement_ratio=" << *r.metrics.refinement_ratio << "\n";
    } else if (*pl) {
      if (pl_kind == "slice") {
        emit_plot(load_slice_csv(pl_in), pl_out);
      } else if (pl_kind == "seed-study") {
        emit_plot(load_eval_csv(pl_in), pl_out);
      } else {
        const auto rows = load_history_csv(pl_in);
        emit_plot(std::span<const HistoryRow>(rows), pl_out);
      }
      std::cout << "wrote " << pl_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "qlab: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
