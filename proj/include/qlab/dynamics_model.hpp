#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "qlab/cartpole.hpp"
#include "qlab/dataset.hpp"
#include "qlab/mlp.hpp"

namespace qlab {

inline constexpr double kStdFloor = 1e-8;
inline constexpr std::size_t kMinModelData = 100;

/// Learned transition model: one net per state component predicting the
/// scaled delta (s_next - s)[c] / delta_scale[c] from standardized inputs.
/// A default-constructed model has zero nets and unit scales, so it predicts
/// s_next == s.
struct DynamicsModel {
  std::array<MlpParams, 4> nets{};
  Input input_mean{};
  Input input_std{1.0, 1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> delta_scale{1.0, 1.0, 1.0, 1.0};

  bool operator==(const DynamicsModel&) const = default;
};

struct DynamicsFit {
  DynamicsModel model;
  /// Held-out MSE of each raw delta component, and the held-out variance of
  /// that component (the predict-mean baseline).
  std::array<double, 4> val_mse{};
  std::array<double, 4> val_delta_variance{};
};

/// Trains the four component nets on a seeded 70/30 split of `d`.
/// Throws std::invalid_argument when |d| < kMinModelData.
DynamicsFit train_model(const Dataset& d, const TrainConfig& cfg);

State predict(const DynamicsModel& m, const State& s, Action a);

inline constexpr const char* kModelHeader = "block,index,value";

std::string to_csv(const DynamicsModel& m);
DynamicsModel model_from_csv(const std::string& text, const std::string& source = "<memory>");
void save(const DynamicsModel& m, const std::filesystem::path& path);
DynamicsModel load_model(const std::filesystem::path& path);

}  // namespace qlab
