#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qlab/rng.hpp"

namespace qlab {

inline constexpr std::size_t kInputs = 5;
inline constexpr std::size_t kHidden = 64;
inline constexpr std::size_t kParamCount = kHidden * kInputs + kHidden + kHidden + 1;

using Input = std::array<double, kInputs>;

/// Weights of the 5-64-1 ReLU regressor, stored flat in serialization order:
/// w1 (row-major, kHidden x kInputs), b1, w2, b2. Gradients share the type.
struct MlpParams {
  static constexpr std::size_t kB1 = kHidden * kInputs;
  static constexpr std::size_t kW2 = kB1 + kHidden;
  static constexpr std::size_t kB2 = kW2 + kHidden;

  std::array<double, kParamCount> values{};

  double& w1(std::size_t h, std::size_t i) { return values[h * kInputs + i]; }
  double w1(std::size_t h, std::size_t i) const { return values[h * kInputs + i]; }
  double& b1(std::size_t h) { return values[kB1 + h]; }
  double b1(std::size_t h) const { return values[kB1 + h]; }
  double& w2(std::size_t h) { return values[kW2 + h]; }
  double w2(std::size_t h) const { return values[kW2 + h]; }
  double& b2() { return values[kB2]; }
  double b2() const { return values[kB2]; }

  bool operator==(const MlpParams&) const = default;
};

bool all_finite(const MlpParams& p);

/// Glorot-uniform weights, zero biases.
MlpParams init_params(Rng& rng);

/// w2 . relu(w1 x + b1) + b2
double forward(const MlpParams& p, const Input& x);

struct RegressionSet {
  std::vector<Input> inputs;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  bool empty() const { return targets.empty(); }
  void push_back(const Input& x, double y) {
    inputs.push_back(x);
    targets.push_back(y);
  }
};

struct LossAndGradient {
  double loss = 0.0;
  MlpParams grad;
};

/// Mean squared error over the batch and its exact gradient.
LossAndGradient loss_and_gradient(const MlpParams& p, const RegressionSet& batch);

/// Same, restricted to the rows listed in `rows`.
LossAndGradient loss_and_gradient(const MlpParams& p, const RegressionSet& set, std::span<const std::size_t> rows);

double mse(const MlpParams& p, const RegressionSet& set);

struct AdamState {
  MlpParams m;
  MlpParams v;
  std::uint64_t t = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// One bias-corrected Adam update in place; increments state.t.
void adam_step(MlpParams& p, const MlpParams& grad, AdamState& state, double lr);

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t batch_size = 100;
  std::size_t patience = 50;
  std::size_t max_epochs = 2000;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& cfg);

struct EpochLoss {
  double train = 0.0;
  double val = 0.0;
};

struct TrainResult {
  MlpParams best;
  std::vector<EpochLoss> history;
  std::size_t best_epoch = 0;
  double best_val = 0.0;
};

/// Mini-batch Adam with early stopping: halts once the validation loss has
/// not strictly improved for cfg.patience epochs, returning the parameters
/// with the lowest validation loss seen. The network is initialized from
/// cfg.seed.
TrainResult train(const RegressionSet& train_set, const RegressionSet& val_set, const TrainConfig& cfg);

/// As above, starting from the given parameters.
TrainResult train(const MlpParams& initial, const RegressionSet& train_set, const RegressionSet& val_set,
                  const TrainConfig& cfg);

inline constexpr const char* kParamsHeader = "value";

std::string to_csv(const MlpParams& p);
MlpParams params_from_csv(const std::string& text, const std::string& source = "<memory>");
void save(const MlpParams& p, const std::filesystem::path& path);
MlpParams load_params(const std::filesystem::path& path);

}  // namespace qlab
