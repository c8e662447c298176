#include "qlab/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "qlab/csv.hpp"
#include "qlab/errors.hpp"

namespace qlab {

bool all_finite(const MlpParams& p) {
  return std::all_of(p.values.begin(), p.values.end(), [](double v) { return std::isfinite(v); });
}

MlpParams init_params(Rng& rng) {
  MlpParams p;
  const double limit1 = std::sqrt(6.0 / static_cast<double>(kInputs + kHidden));
  const double limit2 = std::sqrt(6.0 / static_cast<double>(kHidden + 1));
  for (std::size_t h = 0; h < kHidden; ++h)
    for (std::size_t i = 0; i < kInputs; ++i) p.w1(h, i) = rng.uniform(-limit1, limit1);
  for (std::size_t h = 0; h < kHidden; ++h) p.w2(h) = rng.uniform(-limit2, limit2);
  return p;
}

double forward(const MlpParams& p, const Input& x) {
  double out = p.b2();
  for (std::size_t h = 0; h < kHidden; ++h) {
    double pre = p.b1(h);
    for (std::size_t i = 0; i < kInputs; ++i) pre += p.w1(h, i) * x[i];
    out += p.w2(h) * std::max(pre, 0.0);
  }
  return out;
}

namespace {

// Adds the gradient of sum((f(x) - y)^2) * scale over `rows` into g and
// returns the unscaled squared-error sum.
template <class RowRange>
double accumulate(const MlpParams& p, const RegressionSet& set, const RowRange& rows, double scale, MlpParams& g) {
  std::array<double, kHidden> act{};
  double sq_sum = 0.0;
  for (const std::size_t r : rows) {
    const Input& x = set.inputs[r];
    double out = p.b2();
    for (std::size_t h = 0; h < kHidden; ++h) {
      double pre = p.b1(h);
      for (std::size_t i = 0; i < kInputs; ++i) pre += p.w1(h, i) * x[i];
      act[h] = std::max(pre, 0.0);
      out += p.w2(h) * act[h];
    }
    const double err = out - set.targets[r];
    sq_sum += err * err;
    const double d_out = 2.0 * err * scale;
    g.b2() += d_out;
    for (std::size_t h = 0; h < kHidden; ++h) {
      g.w2(h) += d_out * act[h];
      // ReLU derivative taken as 0 at the kink.
      const double d_pre = act[h] > 0.0 ? d_out * p.w2(h) : 0.0;
      g.b1(h) += d_pre;
      for (std::size_t i = 0; i < kInputs; ++i) g.w1(h, i) += d_pre * x[i];
    }
  }
  return sq_sum;
}

}  // namespace

LossAndGradient loss_and_gradient(const MlpParams& p, const RegressionSet& batch) {
  if (batch.empty()) throw std::invalid_argument("loss_and_gradient needs a non-empty batch");
  std::vector<std::size_t> rows(batch.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return loss_and_gradient(p, batch, rows);
}

LossAndGradient loss_and_gradient(const MlpParams& p, const RegressionSet& set, std::span<const std::size_t> rows) {
  if (rows.empty()) throw std::invalid_argument("loss_and_gradient needs a non-empty batch");
  LossAndGradient out;
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  out.loss = accumulate(p, set, rows, inv_n, out.grad) * inv_n;
  return out;
}

double mse(const MlpParams& p, const RegressionSet& set) {
  if (set.empty()) throw std::invalid_argument("mse of an empty set");
  double sum = 0.0;
  for (std::size_t r = 0; r < set.size(); ++r) {
    const double err = forward(p, set.inputs[r]) - set.targets[r];
    sum += err * err;
  }
  return sum / static_cast<double>(set.size());
}

void adam_step(MlpParams& p, const MlpParams& grad, AdamState& state, double lr) {
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(kAdamBeta1, t);
  const double correction2 = 1.0 - std::pow(kAdamBeta2, t);
  for (std::size_t k = 0; k < kParamCount; ++k) {
    const double g = grad.values[k];
    double& m = state.m.values[k];
    double& v = state.v.values[k];
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
    v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    p.values[k] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
  }
}

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || cfg.batch_size < 1 || cfg.patience < 1 || cfg.max_epochs < 1) {
    throw std::invalid_argument("train config requires learning_rate > 0 and batch_size, patience, max_epochs >= 1");
  }
}

TrainResult train(const RegressionSet& train_set, const RegressionSet& val_set, const TrainConfig& cfg) {
  Rng init_rng(derive_seed(cfg.seed, 0));
  return train(init_params(init_rng), train_set, val_set, cfg);
}

TrainResult train(const MlpParams& initial, const RegressionSet& train_set, const RegressionSet& val_set,
                  const TrainConfig& cfg) {
  validate(cfg);
  if (train_set.empty() || val_set.empty()) throw std::invalid_argument("training and validation sets must be non-empty");

  Rng shuffle_rng(derive_seed(cfg.seed, 1));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  MlpParams p = initial;
  AdamState adam;
  TrainResult result;
  result.best = p;
  result.best_val = std::numeric_limits<double>::infinity();
  std::size_t since_improvement = 0;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    double sq_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      const auto batch = std::span<const std::size_t>(order).subspan(start, len);
      const auto lg = loss_and_gradient(p, train_set, batch);
      sq_sum += lg.loss * static_cast<double>(len);
      adam_step(p, lg.grad, adam, cfg.learning_rate);
    }
    const double val = mse(p, val_set);
    result.history.push_back({sq_sum / static_cast<double>(order.size()), val});

    if (val < result.best_val) {
      result.best_val = val;
      result.best = p;
      result.best_epoch = epoch;
      since_improvement = 0;
    } else if (++since_improvement >= cfg.patience) {
      break;
    }
  }
  return result;
}

std::string to_csv(const MlpParams& p) {
  std::string out = "# mlp 5-64-1 order=w1_row_major,b1,w2,b2\n";
  out += kParamsHeader;
  out += '\n';
  for (double v : p.values) {
    out += csv::format_double(v);
    out += '\n';
  }
  return out;
}

MlpParams params_from_csv(const std::string& text, const std::string& source) {
  const auto doc = csv::parse(text, kParamsHeader, source);
  if (doc.rows.size() != kParamCount) {
    throw ParseError(source, doc.rows.empty() ? 1 : doc.rows.back().line(), 1,
                     "expected " + std::to_string(kParamCount) + " parameter rows, got " +
                         std::to_string(doc.rows.size()));
  }
  MlpParams p;
  for (std::size_t k = 0; k < kParamCount; ++k) p.values[k] = doc.rows[k].real(0);
  return p;
}

void save(const MlpParams& p, const std::filesystem::path& path) { csv::write_file(path, to_csv(p)); }

MlpParams load_params(const std::filesystem::path& path) {
  return params_from_csv(csv::read_file(path), path.string());
}

}  // namespace qlab
