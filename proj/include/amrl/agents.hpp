#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <string_view>
#include <utility>
#include <vector>

#include "amrl/core.hpp"
#include "amrl/envs.hpp"

namespace amrl {

// What estimate_next_state does for a (state, action) never measured.
enum class EstimateFallback { SelfTransition, Uniform };

struct AgentConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.1;
  double measure_init = 0.1;
  std::size_t planning_steps = 5;
  EstimateFallback fallback = EstimateFallback::SelfTransition;
  // Baselines are always charged c in the metrics. When this is set they also
  // back up r - c; a per-step penalty makes early termination (e.g. a frozen
  // lake hole) look attractive, so the default backs up the plain reward.
  bool baseline_learns_cost = false;

  void validate() const;
};

/// Dense |S| x columns action-value table. For Amrl-Q the columns are action
/// pairs (see action_pair_index); for the baselines they are plain actions.
template <typename Scalar>
class BasicQTable {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  BasicQTable(std::size_t num_states, std::size_t num_columns)
      : values_(Matrix::Zero(static_cast<Eigen::Index>(num_states),
                             static_cast<Eigen::Index>(num_columns))) {}

  std::size_t num_states() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t num_columns() const { return static_cast<std::size_t>(values_.cols()); }

  Scalar operator()(std::size_t s, std::size_t col) const {
    return values_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(col));
  }
  Scalar& operator()(std::size_t s, std::size_t col) {
    return values_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(col));
  }

  auto row(std::size_t s) const { return values_.row(static_cast<Eigen::Index>(s)); }

  const Matrix& values() const { return values_; }
  Matrix& values() { return values_; }

  friend bool operator==(const BasicQTable& a, const BasicQTable& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  Matrix values_;
};

using QTable = BasicQTable<double>;

// Measure columns set to measure_init, estimate columns to zero.
QTable init_amrl_q(std::size_t num_states, std::size_t num_actions, double measure_init);

// Epsilon-greedy over a row of Q-values; greedy ties are broken uniformly.
std::size_t epsilon_greedy_select(const Eigen::Ref<const Eigen::RowVectorXd>& q_row,
                                  double epsilon, RngStream& rng);

// One tabular backup toward r_eff (+ gamma * max_j q[s_next][j] unless done).
void q_update(QTable& q, StateId s, std::size_t column, double r_eff, StateId s_next, bool done,
              const AgentConfig& cfg);

/// Count-based state estimator: one |S| x |S| table per process action.
class TransitionCounts {
 public:
  using Counts = Eigen::Matrix<std::uint32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  TransitionCounts(std::size_t num_states, std::size_t num_actions);

  std::size_t num_states() const { return row_sums_.empty() ? 0 : row_sums_.front().size(); }
  std::size_t num_actions() const { return counts_.size(); }

  void record(std::size_t action, StateId from, StateId to);
  std::uint32_t count(std::size_t action, StateId from, StateId to) const;
  std::uint64_t row_sum(std::size_t action, StateId from) const;
  const Counts& table(std::size_t action) const { return counts_.at(action); }

 private:
  void check(std::size_t action, StateId from) const;

  std::vector<Counts> counts_;
  std::vector<std::vector<std::uint64_t>> row_sums_;
};

StateId estimate_next_state(const TransitionCounts& counts, StateId s, std::size_t action,
                            RngStream& rng,
                            EstimateFallback fallback = EstimateFallback::SelfTransition);

/// Last-seen outcome of every experienced (state, action), replayed by Dyna-Q.
class DynaModel {
 public:
  struct Entry {
    double r_eff = 0.0;
    StateId next = 0;
    bool terminal = false;
  };

  void record(StateId s, std::size_t action, Entry entry);
  bool empty() const { return keys_.empty(); }
  std::size_t size() const { return keys_.size(); }

  // Uniform over experienced pairs, in first-visit order so draws are
  // reproducible.
  std::pair<std::pair<StateId, std::size_t>, Entry> sample(RngStream& rng) const;
  const Entry* find(StateId s, std::size_t action) const;

 private:
  std::vector<std::pair<StateId, std::size_t>> keys_;
  std::vector<Entry> entries_;
  std::map<std::pair<StateId, std::size_t>, std::size_t> index_;
};

// Result of one agent step.
struct EpisodeDelta {
  std::size_t column = 0;
  ActionPair pair;
  double reward = 0.0;
  double cost = 0.0;
  bool measured = false;
  StateId next_state = 0;  // believed next state for Amrl-Q, observed for baselines
  bool done = false;
};

enum class AgentKind { QLearning, DynaQ, AmrlQ };

std::string_view to_string(AgentKind kind);

class Agent {
 public:
  virtual ~Agent() = default;

  virtual AgentKind kind() const = 0;
  virtual EpisodeDelta step(StateId current, Environment& env, RngStream& rng) = 0;

  const QTable& q_table() const { return q_; }
  QTable& q_table() { return q_; }
  const AgentConfig& config() const { return cfg_; }
  std::size_t num_actions() const { return num_actions_; }

 protected:
  Agent(QTable q, std::size_t num_actions, const AgentConfig& cfg);

  QTable q_;
  std::size_t num_actions_;
  AgentConfig cfg_;
};

class QLearningAgent : public Agent {
 public:
  QLearningAgent(std::size_t num_states, std::size_t num_actions, const AgentConfig& cfg);
  AgentKind kind() const override { return AgentKind::QLearning; }
  EpisodeDelta step(StateId current, Environment& env, RngStream& rng) override;
};

class DynaQAgent : public Agent {
 public:
  DynaQAgent(std::size_t num_states, std::size_t num_actions, const AgentConfig& cfg);
  AgentKind kind() const override { return AgentKind::DynaQ; }
  EpisodeDelta step(StateId current, Environment& env, RngStream& rng) override;

  const DynaModel& model() const { return model_; }
  DynaModel& model() { return model_; }

 private:
  DynaModel model_;
};

class AmrlQAgent : public Agent {
 public:
  AmrlQAgent(std::size_t num_states, std::size_t num_actions, const AgentConfig& cfg);
  AgentKind kind() const override { return AgentKind::AmrlQ; }
  EpisodeDelta step(StateId believed, Environment& env, RngStream& rng) override;

  const TransitionCounts& counts() const { return counts_; }
  TransitionCounts& counts() { return counts_; }

 private:
  TransitionCounts counts_;
};

// Selects an action pair at the believed state, acts, then either records the
// measured transition or samples the next belief from the counts, and backs
// up with r - c.
EpisodeDelta amrl_step(AmrlQAgent& agent, StateId believed, Environment& env, RngStream& rng);

// Q-learning / Dyna-Q step: always measures (and pays c). Backs up r, or
// r - c with baseline_learns_cost. Dyna-Q also records the transition and
// plans.
EpisodeDelta baseline_step(Agent& agent, DynaModel* model, StateId state, Environment& env,
                           RngStream& rng);

// planning_steps replays of uniformly sampled model entries.
void dyna_planning(QTable& q, const DynaModel& model, const AgentConfig& cfg, RngStream& rng);

std::unique_ptr<Agent> make_agent(AgentKind kind, const EnvSpec& spec, const AgentConfig& cfg);

}  // namespace amrl
