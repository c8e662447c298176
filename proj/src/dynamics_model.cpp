#include "qlab/dynamics_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qlab/csv.hpp"
#include "qlab/encoding.hpp"
#include "qlab/errors.hpp"

namespace qlab {

namespace {

std::array<double, 4> as_array(const State& s) { return {s.x, s.x_dot, s.theta, s.theta_dot}; }

Input normalize(const DynamicsModel& m, const Input& raw) {
  Input out;
  for (std::size_t i = 0; i < kInputs; ++i) out[i] = (raw[i] - m.input_mean[i]) / m.input_std[i];
  return out;
}

}  // namespace

DynamicsFit train_model(const Dataset& d, const TrainConfig& cfg) {
  validate(cfg);
  if (d.size() < kMinModelData) {
    throw std::invalid_argument("dynamics model needs at least " + std::to_string(kMinModelData) + " transitions");
  }
  Rng split_rng(derive_seed(cfg.seed, 100));
  const auto [train_d, val_d] = split(d, 0.7, split_rng);

  DynamicsFit fit;
  DynamicsModel& m = fit.model;

  // Input standardization from training inputs.
  const auto n_train = static_cast<double>(train_d.size());
  Input sum{}, sum_sq{};
  std::array<double, 4> delta_sq{};
  for (const auto& t : train_d.transitions) {
    const Input x = q_input(t.s, t.a);
    for (std::size_t i = 0; i < kInputs; ++i) {
      sum[i] += x[i];
      sum_sq[i] += x[i] * x[i];
    }
    const auto s = as_array(t.s), sn = as_array(t.s_next);
    for (std::size_t c = 0; c < 4; ++c) delta_sq[c] += (sn[c] - s[c]) * (sn[c] - s[c]);
  }
  for (std::size_t i = 0; i < kInputs; ++i) {
    m.input_mean[i] = sum[i] / n_train;
    const double var = std::max(sum_sq[i] / n_train - m.input_mean[i] * m.input_mean[i], 0.0);
    m.input_std[i] = std::max(std::sqrt(var), kStdFloor);
  }
  for (std::size_t c = 0; c < 4; ++c) m.delta_scale[c] = std::max(std::sqrt(delta_sq[c] / n_train), kStdFloor);

  for (std::size_t c = 0; c < 4; ++c) {
    RegressionSet tr, va;
    for (const auto& t : train_d.transitions) {
      tr.push_back(normalize(m, q_input(t.s, t.a)), (as_array(t.s_next)[c] - as_array(t.s)[c]) / m.delta_scale[c]);
    }
    for (const auto& t : val_d.transitions) {
      va.push_back(normalize(m, q_input(t.s, t.a)), (as_array(t.s_next)[c] - as_array(t.s)[c]) / m.delta_scale[c]);
    }
    TrainConfig component_cfg = cfg;
    component_cfg.seed = derive_seed(cfg.seed, 200 + c);
    m.nets[c] = train(tr, va, component_cfg).best;
  }

  // Held-out error in raw delta units against the predict-mean baseline.
  const auto n_val = static_cast<double>(val_d.size());
  std::array<double, 4> mean{};
  for (const auto& t : val_d.transitions) {
    const auto s = as_array(t.s), sn = as_array(t.s_next);
    for (std::size_t c = 0; c < 4; ++c) mean[c] += (sn[c] - s[c]) / n_val;
  }
  for (const auto& t : val_d.transitions) {
    const auto s = as_array(t.s), sn = as_array(t.s_next), pred = as_array(predict(m, t.s, t.a));
    for (std::size_t c = 0; c < 4; ++c) {
      const double delta = sn[c] - s[c];
      fit.val_mse[c] += (pred[c] - sn[c]) * (pred[c] - sn[c]) / n_val;
      fit.val_delta_variance[c] += (delta - mean[c]) * (delta - mean[c]) / n_val;
    }
  }
  return fit;
}

State predict(const DynamicsModel& m, const State& s, Action a) {
  const Input x = normalize(m, q_input(s, a));
  return {s.x + m.delta_scale[0] * forward(m.nets[0], x), s.x_dot + m.delta_scale[1] * forward(m.nets[1], x),
          s.theta + m.delta_scale[2] * forward(m.nets[2], x),
          s.theta_dot + m.delta_scale[3] * forward(m.nets[3], x)};
}

std::string to_csv(const DynamicsModel& m) {
  std::string out = "# dynamics model: 4 x mlp 5-64-1 predicting scaled state deltas\n";
  out += kModelHeader;
  out += '\n';
  const auto row = [&out](const std::string& block, std::size_t i, double v) {
    out += block + ',' + std::to_string(i) + ',' + csv::format_double(v) + '\n';
  };
  for (std::size_t i = 0; i < kInputs; ++i) row("input_mean", i, m.input_mean[i]);
  for (std::size_t i = 0; i < kInputs; ++i) row("input_std", i, m.input_std[i]);
  for (std::size_t c = 0; c < 4; ++c) row("delta_scale", c, m.delta_scale[c]);
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t k = 0; k < kParamCount; ++k) row("net" + std::to_string(c), k, m.nets[c].values[k]);
  }
  return out;
}

DynamicsModel model_from_csv(const std::string& text, const std::string& source) {
  const auto doc = csv::parse(text, kModelHeader, source);
  DynamicsModel m;
  const std::size_t expected = 2 * kInputs + 4 + 4 * kParamCount;
  if (doc.rows.size() != expected) {
    throw ParseError(source, doc.rows.empty() ? 1 : doc.rows.back().line(), 1,
                     "expected " + std::to_string(expected) + " rows, got " + std::to_string(doc.rows.size()));
  }
  for (const auto& row : doc.rows) {
    const std::string& block = row.text(0);
    const auto idx = row.integer(1);
    const double v = row.real(2);
    const auto in_range = [&](std::size_t n) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= n) row.fail(1, "index out of range for block " + block);
      return static_cast<std::size_t>(idx);
    };
    if (block == "input_mean") {
      m.input_mean[in_range(kInputs)] = v;
    } else if (block == "input_std") {
      m.input_std[in_range(kInputs)] = v;
    } else if (block == "delta_scale") {
      m.delta_scale[in_range(4)] = v;
    } else if (block.size() == 4 && block.starts_with("net") && block[3] >= '0' && block[3] <= '3') {
      m.nets[static_cast<std::size_t>(block[3] - '0')].values[in_range(kParamCount)] = v;
    } else {
      row.fail(0, "unknown block '" + block + "'");
    }
  }
  for (std::size_t i = 0; i < kInputs; ++i) {
    if (!(m.input_std[i] >= kStdFloor)) throw ParseError(source, 1, 1, "input_std must be >= 1e-8");
  }
  return m;
}

void save(const DynamicsModel& m, const std::filesystem::path& path) { csv::write_file(path, to_csv(m)); }

DynamicsModel load_model(const std::filesystem::path& path) {
  return model_from_csv(csv::read_file(path), path.string());
}

}  // namespace qlab
