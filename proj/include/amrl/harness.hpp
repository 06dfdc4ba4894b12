#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "amrl/agents.hpp"
#include "amrl/analysis.hpp"
#include "amrl/envs.hpp"

namespace amrl {

enum class EnvKind { Chain, ChainStochastic, FrozenLake, FrozenLakeSlippery, Taxi, JuniorScientist };

std::string_view to_string(EnvKind kind);
std::optional<EnvKind> parse_env_kind(std::string_view name);
std::optional<AgentKind> parse_agent_kind(std::string_view name);

struct EnvOptions {
  std::size_t chain_length = 11;
  std::optional<double> swap_prob;     // chain-stochastic defaults to 0.1
  std::optional<double> measure_cost;  // overrides the environment's own c
  JuniorScientistConfig junior;
};

std::unique_ptr<Environment> make_environment(EnvKind kind, const EnvOptions& options);

// Per-environment defaults for experiment length and the per-episode step cap.
std::size_t default_episodes(EnvKind kind);
std::size_t default_max_steps(EnvKind kind);

struct ExperimentConfig {
  EnvKind env = EnvKind::Chain;
  EnvOptions env_options;
  AgentKind agent = AgentKind::AmrlQ;
  AgentConfig agent_cfg;
  std::size_t episodes = 100;
  std::size_t trials = 20;
  std::uint64_t base_seed = 0;
  std::size_t max_steps = 1000;
  std::size_t snapshot_interval = 29;
  bool keep_snapshots = false;
  bool keep_histograms = true;
  double costed_return_gamma = 1.0;
  // 0: use AMRL_THREADS, else the hardware concurrency.
  std::size_t threads = 0;

  static ExperimentConfig defaults_for(EnvKind env, AgentKind agent);
  void validate() const;
};

enum class EpisodeEnd { Goal, Hole, StepCap };

std::string_view to_string(EpisodeEnd end);

struct EpisodeRecord {
  std::size_t steps = 0;
  std::size_t measurements = 0;
  double reward_sum = 0.0;
  double cost_sum = 0.0;
  double costed_return = 0.0;
  EpisodeEnd terminated_by = EpisodeEnd::StepCap;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

// One episode: reset (free observation seeds the belief), then agent steps
// until done or max_steps. Histogram visits track the true state.
EpisodeRecord run_episode(Agent& agent, Environment& env, RngStream& rng, std::size_t max_steps,
                          double costed_return_gamma = 1.0, VisitHistogram* hist = nullptr);

struct TrialResult {
  std::size_t trial_index = 0;
  std::vector<EpisodeRecord> episodes;
  VisitHistogram histogram{1};
  std::vector<QSnapshot> snapshots;
  QTable final_q{1, 1};
};

TrialResult run_trial(const ExperimentConfig& cfg, std::size_t trial_index);

struct SeriesStats {
  std::vector<double> mean;
  std::vector<double> std;  // population standard deviation
};

struct ExperimentResult {
  ExperimentConfig config;
  std::size_t num_states = 0;
  std::vector<std::vector<EpisodeRecord>> trials;  // trial order
  SeriesStats steps;
  SeriesStats measurements;
  SeriesStats reward_sum;
  SeriesStats cost_sum;
  SeriesStats costed_return;
  // episodes x states, averaged over trials (empty unless keep_histograms).
  Eigen::MatrixXd mean_visits;
  Eigen::MatrixXd mean_measurements;
  std::vector<std::vector<QSnapshot>> snapshots;  // per trial
  std::vector<QTable> final_q;                    // per trial
};

// Mean and population std per episode index over trial-ordered records.
SeriesStats aggregate_series(const std::vector<std::vector<EpisodeRecord>>& trials,
                             double EpisodeRecord::*field);
SeriesStats aggregate_series(const std::vector<std::vector<EpisodeRecord>>& trials,
                             std::size_t EpisodeRecord::*field);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::size_t resolve_threads(std::size_t requested);

}  // namespace amrl
