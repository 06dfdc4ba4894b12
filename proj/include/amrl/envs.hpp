#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "amrl/core.hpp"

namespace amrl {

struct EnvSpec {
  std::size_t num_states = 2;
  std::size_t num_actions = 2;
  double measure_cost = 0.0;
  double step_reward = 0.0;
  double goal_reward = 1.0;
  bool stochastic = false;
  double noise_param = 0.0;
};

// How the last episode ended, from the environment's point of view.
enum class Termination { None, Goal, Hole };

/// An episodic MDP with a paid measurement channel.
///
/// The base class owns the observation-cost protocol: every step is charged
/// `spec().measure_cost` exactly when the action pair measures, and only then
/// is the post-transition true state revealed. Subclasses implement the hidden
/// dynamics. Reward is always computed from the true state.
class Environment {
 public:
  struct Transition {
    StateId next = 0;
    double reward = 0.0;
    Termination termination = Termination::None;
  };

  explicit Environment(EnvSpec spec);
  virtual ~Environment() = default;

  Environment(const Environment&) = default;
  Environment& operator=(const Environment&) = default;
  Environment(Environment&&) = default;
  Environment& operator=(Environment&&) = default;

  virtual std::string_view name() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  const EnvSpec& spec() const { return spec_; }
  void set_measure_cost(double cost);

  // Starts an episode. The returned start state is a free observation.
  StateId reset(RngStream& rng);

  StepOutcome step(ActionPair pair, RngStream& rng);

  // Hidden state, for diagnostics and histograms. Agents must not read it.
  StateId true_state() const { return state_; }
  bool done() const { return termination_ != Termination::None; }
  Termination termination() const { return termination_; }

  // Exact next-state distribution of action `action` in `state`, for analytic
  // tools. Environments without an enumerable kernel throw
  // UnsupportedEnvironment.
  virtual std::vector<std::pair<StateId, double>> kernel(StateId state, std::size_t action) const;
  virtual bool is_terminal(StateId state) const = 0;
  virtual StateId start_state() const = 0;

 protected:
  virtual StateId on_reset(RngStream& rng) = 0;
  virtual Transition on_step(StateId state, std::size_t action, RngStream& rng) = 0;

  EnvSpec spec_;

 private:
  StateId state_ = 0;
  Termination termination_ = Termination::None;
  bool started_ = false;
};

struct ChainConfig {
  std::size_t length = 11;
  double swap_prob = 0.0;
  double step_reward = -0.01;
  double goal_reward = 1.0;
  double measure_cost = 0.05;
};

/// States 0..length-1 with the last one absorbing. Actions: 0 left, 1 right.
/// Left at state 0 stays put. With probability swap_prob the two actions are
/// exchanged for that step.
class ChainEnv final : public Environment {
 public:
  static constexpr std::size_t kLeft = 0;
  static constexpr std::size_t kRight = 1;

  explicit ChainEnv(const ChainConfig& cfg);

  std::string_view name() const override { return "chain"; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<ChainEnv>(*this); }
  std::vector<std::pair<StateId, double>> kernel(StateId state, std::size_t action) const override;
  bool is_terminal(StateId state) const override { return state == goal(); }
  StateId start_state() const override { return 0; }

  StateId goal() const { return cfg_.length - 1; }
  const ChainConfig& config() const { return cfg_; }

 protected:
  StateId on_reset(RngStream& rng) override;
  Transition on_step(StateId state, std::size_t action, RngStream& rng) override;

 private:
  StateId move(StateId state, std::size_t action) const;

  ChainConfig cfg_;
};

/// The standard 8x8 frozen lake. Actions: 0 left, 1 down, 2 right, 3 up.
/// When slippery the agent moves in the intended direction or either
/// perpendicular one with probability 1/3 each.
class FrozenLakeEnv final : public Environment {
 public:
  static constexpr std::size_t kSide = 8;
  static constexpr std::array<std::string_view, kSide> kMap = {
      "SFFFFFFF", "FFFFFFFF", "FFFHFFFF", "FFFFFHFF",
      "FFFHFFFF", "FHHFFFHF", "FHFFHFHF", "FFFHFFFG"};

  explicit FrozenLakeEnv(bool slippery, double measure_cost = 0.01);

  std::string_view name() const override { return slippery() ? "frozen-lake-slippery" : "frozen-lake"; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<FrozenLakeEnv>(*this); }
  std::vector<std::pair<StateId, double>> kernel(StateId state, std::size_t action) const override;
  bool is_terminal(StateId state) const override;
  StateId start_state() const override { return 0; }

  bool slippery() const { return spec_.stochastic; }
  char cell(StateId state) const { return kMap[state / kSide][state % kSide]; }

 protected:
  StateId on_reset(RngStream& rng) override;
  Transition on_step(StateId state, std::size_t action, RngStream& rng) override;

 private:
  StateId move(StateId state, std::size_t direction) const;
  Transition land(StateId next) const;
};

/// Dietterich's taxi domain: 5x5 grid, landmarks R(0,0) G(0,4) Y(4,0) B(4,3),
/// passenger at a landmark or in the taxi, one of four destinations.
/// Actions: 0 south, 1 north, 2 east, 3 west, 4 pickup, 5 drop-off.
/// State index ((row * 5 + col) * 5 + passenger) * 4 + destination.
class TaxiEnv final : public Environment {
 public:
  static constexpr std::size_t kSide = 5;
  static constexpr std::size_t kInTaxi = 4;
  static constexpr std::array<std::pair<std::size_t, std::size_t>, 4> kLandmarks = {
      std::pair<std::size_t, std::size_t>{0, 0}, {0, 4}, {4, 0}, {4, 3}};
  enum Action : std::size_t { kSouth = 0, kNorth, kEast, kWest, kPickup, kDropoff };

  struct Layout {
    std::size_t row = 0;
    std::size_t col = 0;
    std::size_t passenger = 0;
    std::size_t destination = 0;
  };

  explicit TaxiEnv(double measure_cost = 0.01);

  std::string_view name() const override { return "taxi"; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<TaxiEnv>(*this); }
  bool is_terminal(StateId) const override { return false; }
  StateId start_state() const override { return encode({}); }

  static StateId encode(const Layout& layout);
  static Layout decode(StateId state);

  // True when a wall separates (row, col) from (row, col + 1).
  bool wall_east_of(std::size_t row, std::size_t col) const { return walls_[row][col]; }

 protected:
  StateId on_reset(RngStream& rng) override;
  Transition on_step(StateId state, std::size_t action, RngStream& rng) override;

 private:
  std::array<std::array<bool, kSide>, kSide> walls_{};
};

// Parses a wall list ("row west_col east_col" per line, '#' comments).
std::vector<std::array<std::size_t, 3>> parse_taxi_walls(std::string_view text);

struct JuniorScientistConfig {
  int energy_min = -10;
  int energy_max = 10;
  int start_energy = 0;
  int goal_energy = 5;
  double step_reward = -0.05;
  double goal_reward = 1.0;
  double measure_cost = 0.01;
};

/// Energy levels energy_min..energy_max (index = energy - energy_min).
/// Actions: 0 decrease, 1 increase, 2 done. Declaring done ends the episode
/// only when the energy is at the goal.
class JuniorScientistEnv final : public Environment {
 public:
  static constexpr std::size_t kDecrease = 0;
  static constexpr std::size_t kIncrease = 1;
  static constexpr std::size_t kDone = 2;

  explicit JuniorScientistEnv(const JuniorScientistConfig& cfg);

  std::string_view name() const override { return "junior-scientist"; }
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<JuniorScientistEnv>(*this);
  }
  bool is_terminal(StateId) const override { return false; }
  StateId start_state() const override { return index_of(cfg_.start_energy); }

  StateId index_of(int energy) const { return static_cast<StateId>(energy - cfg_.energy_min); }
  int energy_of(StateId state) const { return static_cast<int>(state) + cfg_.energy_min; }

 protected:
  StateId on_reset(RngStream& rng) override;
  Transition on_step(StateId state, std::size_t action, RngStream& rng) override;

 private:
  JuniorScientistConfig cfg_;
};

std::unique_ptr<Environment> make_chain(const ChainConfig& cfg);
std::unique_ptr<Environment> make_frozen_lake(bool slippery);
std::unique_ptr<Environment> make_taxi();
std::unique_ptr<Environment> make_junior_scientist(const JuniorScientistConfig& cfg);

}  // namespace amrl
