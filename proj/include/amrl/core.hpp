#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "amrl/errors.hpp"

namespace amrl {

// Index of a (true or estimated) environment state. Estimates and true
// states share one index space.
using StateId = std::size_t;

// The agent's full decision for one step: a process action plus whether to
// pay for a measurement of the next state.
struct ActionPair {
  std::size_t action = 0;
  bool measure = true;

  friend bool operator==(const ActionPair&, const ActionPair&) = default;
};

// Environment response to one step. `observation` is present exactly when the
// step measured; `cost` is the environment's measure cost in that case and 0
// otherwise. `done` is always reported and never charged.
struct StepOutcome {
  double reward = 0.0;
  double cost = 0.0;
  std::optional<StateId> observation;
  bool done = false;
};

/// Deterministic pseudo-random stream.
///
/// Backed by the 64-bit Mersenne Twister, whose output sequence is fixed by
/// the C++ standard. The conversions to reals and bounded integers are done
/// here rather than with <random> distributions, whose algorithms are
/// implementation-defined, so draws are bit-identical across platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Stream for trial `trial_index` of an experiment seeded with `base_seed`.
  static RngStream for_trial(std::uint64_t base_seed, std::uint64_t trial_index) {
    return RngStream(base_seed + trial_index);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1}; n must be positive. Unbiased (rejection).
  std::size_t uniform_index(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

// Per-step rewards and costs of one episode.
template <typename Scalar = double>
struct Trajectory {
  std::vector<Scalar> rewards;
  std::vector<Scalar> costs;

  void push(Scalar reward, Scalar cost) {
    rewards.push_back(reward);
    costs.push_back(cost);
  }
  std::size_t size() const { return rewards.size(); }
};

// Sum over t of gamma^t (r_t - c_t). With gamma = 1 this is exactly
// sum(rewards) - sum(costs).
template <typename Scalar>
Scalar costed_return(const Trajectory<Scalar>& traj, Scalar gamma) {
  if (traj.rewards.size() != traj.costs.size()) {
    throw MalformedTrajectory("trajectory has " + std::to_string(traj.rewards.size()) +
                              " rewards but " + std::to_string(traj.costs.size()) + " costs");
  }
  if (!(gamma >= Scalar(0) && gamma <= Scalar(1))) {
    throw MalformedTrajectory("discount must lie in [0, 1]");
  }
  if (gamma == Scalar(1)) {
    Scalar rewards{0};
    Scalar costs{0};
    for (std::size_t t = 0; t < traj.size(); ++t) {
      rewards += traj.rewards[t];
      costs += traj.costs[t];
    }
    return rewards - costs;
  }
  Scalar total{0};
  Scalar discount{1};
  for (std::size_t t = 0; t < traj.size(); ++t) {
    total += discount * (traj.rewards[t] - traj.costs[t]);
    discount *= gamma;
  }
  return total;
}

// Column of an action pair in a |S| x 2|A| table. Measure columns come first:
// (a0, measure), (a1, measure), ..., (a0, estimate), (a1, estimate), ...
std::size_t action_pair_index(std::size_t action, bool measure, std::size_t num_actions);

// Inverse of action_pair_index.
ActionPair action_pair_from_index(std::size_t index, std::size_t num_actions);

}  // namespace amrl
