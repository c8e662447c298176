#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qlab/cartpole.hpp"
#include "qlab/rng.hpp"

namespace qlab {

struct Transition {
  State s;
  Action a = Action::Left;
  State s_next;
  double r = 0.0;
  bool terminal = false;

  bool operator==(const Transition&) const = default;
};

struct Dataset {
  std::vector<Transition> transitions;
  std::uint64_t generation_seed = 0;
  PhysicsParams physics;

  std::size_t size() const { return transitions.size(); }
  bool empty() const { return transitions.empty(); }
  bool operator==(const Dataset&) const = default;
};

/// Steps after which a generated episode is reset without a terminal flag.
inline constexpr std::size_t kEpisodeCap = 500;

/// Rolls out a uniform random policy for exactly `n` transitions, resetting
/// on termination or at the episode cap. The dataset's generation_seed is
/// taken from `rng`.
Dataset generate(std::size_t n, const PhysicsParams& p, Rng& rng);

/// Shuffled partition; |train| = floor(train_fraction * n). Both halves keep
/// the parent's seed and physics. Throws std::invalid_argument for n < 2 or
/// a fraction outside (0, 1).
std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, Rng& rng);

/// Index permutation used by split(); exposed so the partition is checkable.
std::vector<std::size_t> split_indices(std::size_t n, Rng& rng);

inline constexpr const char* kDatasetHeader =
    "x,x_dot,theta,theta_dot,action,next_x,next_x_dot,next_theta,next_theta_dot,reward,terminal";

std::string to_csv(const Dataset& d);
Dataset dataset_from_csv(const std::string& text, const std::string& source = "<memory>");
void save(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// 64-bit FNV-1a of the dataset's CSV serialization.
std::uint64_t content_hash(const Dataset& d);

}  // namespace qlab
