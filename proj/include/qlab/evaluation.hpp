#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "qlab/policy.hpp"
#include "qlab/stepper.hpp"

namespace qlab {

struct EvalConfig {
  std::size_t n_episodes = 1000;
  std::size_t max_steps = 5000;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct EvalReport {
  double avg_return = 0.0;     // undiscounted, averaged over episodes
  double success_rate = 0.0;   // fraction of episodes that ran max_steps without terminating
  bool successful = false;     // every episode reached the cap
  std::size_t n_episodes = 0;
  std::size_t max_steps = 0;

  bool operator==(const EvalReport&) const = default;
};

/// Runs cfg.n_episodes episodes from reset states. Episode k draws its start
/// state and any policy randomness from substream k of cfg.seed.
/// Throws std::invalid_argument for zero episodes or a zero step cap.
EvalReport evaluate_policy(const Policy& p, const EvalConfig& cfg, const Stepper& env);
EvalReport evaluate_policy(const Policy& p, const EvalConfig& cfg, const PhysicsParams& physics = {});

/// "key=value" lines.
std::string to_text(const EvalReport& r);
EvalReport report_from_text(const std::string& text, const std::string& source = "<memory>");

}  // namespace qlab
