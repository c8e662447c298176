#include "qlab/q_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "qlab/csv.hpp"
#include "qlab/encoding.hpp"
#include "qlab/errors.hpp"
#include "qlab/parallel.hpp"

namespace qlab {

void validate(const RolloutConfig& cfg) {
  if (cfg.horizon < 1) throw std::invalid_argument("rollout horizon must be >= 1");
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
}

double truncation_bound(const RolloutConfig& cfg) {
  return std::pow(cfg.gamma, static_cast<double>(cfg.horizon)) / (1.0 - cfg.gamma);
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Nfq: return "nfq";
    case Variant::BsfLearned: return "bsf";
    case Variant::BsfReal: return "bsf-real";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& name) {
  if (name == "nfq") return Variant::Nfq;
  if (name == "bsf") return Variant::BsfLearned;
  if (name == "bsf-real") return Variant::BsfReal;
  throw std::invalid_argument("unknown variant '" + name + "' (expected nfq, bsf or bsf-real)");
}

TargetSet nfq_targets(const QFunction& q, const Dataset& d, double gamma) {
  if (d.empty()) throw std::invalid_argument("nfq_targets needs a non-empty dataset");
  TargetSet out;
  out.provenance.regime = Variant::Nfq;
  out.data.inputs.reserve(d.size());
  out.data.targets.reserve(d.size());
  for (const auto& t : d.transitions) {
    double target = t.r;
    if (!t.terminal) {
      const auto [left, right] = q.both(t.s_next);
      target += gamma * std::max(left, right);
    }
    out.data.push_back(q_input(t.s, t.a), target);
  }
  return out;
}

double rollout_return(const State& s, Action a, const Policy& pi, const Stepper& st, const RolloutConfig& cfg,
                      Rng& rng) {
  validate(cfg);
  double ret = 0.0;
  double discount = 1.0;
  State cur = s;
  Action act = a;
  for (std::size_t k = 0; k < cfg.horizon; ++k) {
    const StepResult r = st.step(cur, act);
    ret += discount * r.reward;
    if (r.terminal || k + 1 == cfg.horizon) break;
    cur = r.next_state;
    discount *= cfg.gamma;
    act = policy_action(pi, cur, rng);
  }
  return ret;
}

TargetSet bsf_targets(const Policy& pi, const Dataset& d, const Stepper& st, const RolloutConfig& cfg,
                      std::uint64_t seed, std::size_t workers) {
  if (d.empty()) throw std::invalid_argument("bsf_targets needs a non-empty dataset");
  validate(cfg);
  validate(pi);

  TargetSet out;
  out.provenance.policy = describe(pi);
  out.data.inputs.resize(d.size());
  out.data.targets.resize(d.size());
  parallel_for(d.size(), workers, [&](std::size_t k) {
    const Transition& t = d.transitions[k];
    double target = t.r;
    if (!t.terminal) {
      Rng rng(derive_seed(seed, k));
      const Action next_a = policy_action(pi, t.s_next, rng);
      target += cfg.gamma * rollout_return(t.s_next, next_a, pi, st, cfg, rng);
    }
    out.data.inputs[k] = q_input(t.s, t.a);
    out.data.targets[k] = target;
  });
  return out;
}

QFunction fit_q(const TargetSet& t, const TrainConfig& cfg, TrainResult* details) {
  if (t.size() < kMinFitSize) {
    throw std::invalid_argument("fit_q needs at least " + std::to_string(kMinFitSize) + " targets");
  }
  Rng split_rng(derive_seed(cfg.seed, 300));
  const auto idx = split_indices(t.size(), split_rng);
  const auto n_train = static_cast<std::size_t>(std::floor(0.7 * static_cast<double>(t.size())));
  RegressionSet train_set, val_set;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    (k < n_train ? train_set : val_set).push_back(t.data.inputs[idx[k]], t.data.targets[idx[k]]);
  }
  TrainResult result = train(train_set, val_set, cfg);
  QFunction q{result.best};
  if (details) *details = std::move(result);
  return q;
}

std::string to_csv(const TargetSet& t) {
  std::string out = "# regime=" + to_string(t.provenance.regime) +
                    " iteration=" + std::to_string(t.provenance.iteration) + " policy=" + t.provenance.policy + "\n";
  out += kTargetsHeader;
  out += '\n';
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Input& x = t.data.inputs[k];
    for (std::size_t i = 0; i < kInputs; ++i) {
      out += csv::format_double(x[i]);
      out += ',';
    }
    out += csv::format_double(t.data.targets[k]);
    out += '\n';
  }
  return out;
}

TargetSet targets_from_csv(const std::string& text, const std::string& source) {
  const auto doc = csv::parse(text, kTargetsHeader, source);
  TargetSet t;
  try {
    t.provenance.regime = variant_from_string(csv::comment_value(doc, "regime", "nfq"));
    t.provenance.iteration = std::stoull(csv::comment_value(doc, "iteration", "0"));
  } catch (const std::exception& e) {
    throw ParseError(source, 1, 1, std::string("bad provenance: ") + e.what());
  }
  t.provenance.policy = csv::comment_value(doc, "policy", "greedy");
  t.data.inputs.reserve(doc.rows.size());
  t.data.targets.reserve(doc.rows.size());
  for (const auto& row : doc.rows) {
    Input x;
    for (std::size_t i = 0; i < kInputs; ++i) x[i] = row.real(i);
    t.data.push_back(x, row.real(kInputs));
  }
  return t;
}

void save(const TargetSet& t, const std::filesystem::path& path) { csv::write_file(path, to_csv(t)); }

TargetSet load_targets(const std::filesystem::path& path) {
  return targets_from_csv(csv::read_file(path), path.string());
}

IterationHistory run_iterations(Variant variant, std::size_t n_iters, const Dataset& d, const RunConfig& cfg,
                                std::uint64_t master_seed,
                                const std::function<void(const IterationRecord&)>& on_iteration) {
  if (n_iters < 1) throw std::invalid_argument("run_iterations needs n_iters >= 1");
  if (d.empty()) throw std::invalid_argument("run_iterations needs a non-empty dataset");
  validate(cfg.rollout);

  const RunSeeds seeds{master_seed};
  IterationHistory history;
  history.variant = variant;
  history.master_seed = master_seed;

  std::unique_ptr<Stepper> stepper;
  if (variant == Variant::BsfReal) {
    stepper = std::make_unique<RealDynamics>(d.physics);
  } else if (variant == Variant::BsfLearned) {
    TrainConfig model_cfg = cfg.model_train;
    model_cfg.seed = seeds.model();
    history.model = train_model(d, model_cfg);
    stepper = std::make_unique<LearnedModel>(history.model->model, d.physics);
  }

  EvalConfig eval_cfg = cfg.eval;
  eval_cfg.seed = seeds.eval();
  eval_cfg.workers = cfg.workers;

  Rng init_rng(seeds.initial_q());
  QFunction q{init_params(init_rng)};

  for (std::size_t i = 0; i < n_iters; ++i) {
    IterationRecord rec;
    rec.iteration = i;
    if (variant == Variant::Nfq) {
      rec.targets = nfq_targets(q, d, cfg.rollout.gamma);
    } else {
      rec.targets = bsf_targets(GreedyQ{q}, d, *stepper, cfg.rollout, seeds.rollout(i), cfg.workers);
    }
    rec.targets.provenance.regime = variant;
    rec.targets.provenance.iteration = i;

    TrainConfig fit_cfg = cfg.q_train;
    fit_cfg.seed = seeds.fit(i);
    TrainResult details;
    rec.q = fit_q(rec.targets, fit_cfg, &details);
    rec.epochs = details.history.size();
    rec.best_epoch = details.best_epoch;
    rec.best_val = details.best_val;

    rec.report = evaluate_policy(GreedyQ{rec.q}, eval_cfg, d.physics);
    q = rec.q;
    if (on_iteration) on_iteration(rec);
    history.iterations.push_back(std::move(rec));
  }
  return history;
}

}  // namespace qlab
