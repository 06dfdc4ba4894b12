#include "amrl/agents.hpp"

#include <string>

namespace amrl {

void AgentConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    // alpha = 0 is accepted by q_update itself; agents need a learning rate.
    throw ConfigError("alpha must lie in (0, 1]");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("gamma must lie in [0, 1]");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("epsilon must lie in [0, 1]");
  }
  if (!(measure_init >= 0.0)) {
    throw ConfigError("measure_init must be non-negative");
  }
}

QTable init_amrl_q(std::size_t num_states, std::size_t num_actions, double measure_init) {
  if (!(measure_init >= 0.0)) {
    throw ConfigError("measure_init must be non-negative");
  }
  QTable q(num_states, 2 * num_actions);
  q.values().leftCols(static_cast<Eigen::Index>(num_actions)).setConstant(measure_init);
  return q;
}

std::size_t epsilon_greedy_select(const Eigen::Ref<const Eigen::RowVectorXd>& q_row,
                                  double epsilon, RngStream& rng) {
  const auto n = static_cast<std::size_t>(q_row.size());
  if (n == 0) {
    throw IndexError("epsilon_greedy_select on an empty row");
  }
  if (rng.uniform() < epsilon) {
    return rng.uniform_index(n);
  }
  const double best = q_row.maxCoeff();
  std::size_t ties = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ties += q_row(static_cast<Eigen::Index>(i)) == best;
  }
  std::size_t pick = ties > 1 ? rng.uniform_index(ties) : 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (q_row(static_cast<Eigen::Index>(i)) == best && pick-- == 0) {
      return i;
    }
  }
  return n - 1;  // unreachable
}

void q_update(QTable& q, StateId s, std::size_t column, double r_eff, StateId s_next, bool done,
              const AgentConfig& cfg) {
  if (s >= q.num_states() || s_next >= q.num_states() || column >= q.num_columns()) {
    throw IndexError("q_update index out of range: state " + std::to_string(s) + ", column " +
                     std::to_string(column) + ", next " + std::to_string(s_next));
  }
  const double target = done ? r_eff : r_eff + cfg.gamma * q.row(s_next).maxCoeff();
  q(s, column) += cfg.alpha * (target - q(s, column));
}

// ---------------------------------------------------------------------------

TransitionCounts::TransitionCounts(std::size_t num_states, std::size_t num_actions)
    : counts_(num_actions, Counts::Zero(static_cast<Eigen::Index>(num_states),
                                        static_cast<Eigen::Index>(num_states))),
      row_sums_(num_actions, std::vector<std::uint64_t>(num_states, 0)) {}

void TransitionCounts::check(std::size_t action, StateId from) const {
  if (action >= counts_.size() || from >= num_states()) {
    throw IndexError("transition count index out of range");
  }
}

void TransitionCounts::record(std::size_t action, StateId from, StateId to) {
  check(action, from);
  if (to >= num_states()) {
    throw IndexError("transition count index out of range");
  }
  ++counts_[action](static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
  ++row_sums_[action][from];
}

std::uint32_t TransitionCounts::count(std::size_t action, StateId from, StateId to) const {
  check(action, from);
  return counts_[action](static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
}

std::uint64_t TransitionCounts::row_sum(std::size_t action, StateId from) const {
  check(action, from);
  return row_sums_[action][from];
}

StateId estimate_next_state(const TransitionCounts& counts, StateId s, std::size_t action,
                            RngStream& rng, EstimateFallback fallback) {
  const std::uint64_t total = counts.row_sum(action, s);
  if (total == 0) {
    if (fallback == EstimateFallback::Uniform) {
      return rng.uniform_index(counts.num_states());
    }
    return s;
  }
  const auto& table = counts.table(action);
  const auto row = static_cast<Eigen::Index>(s);
  // Deterministic model: skip the draw.
  std::uint64_t pick = 0;
  bool single = false;
  for (Eigen::Index j = 0; j < table.cols(); ++j) {
    if (table(row, j) == total) {
      single = true;
      pick = static_cast<std::uint64_t>(j);
      break;
    }
    if (table(row, j) != 0) {
      break;
    }
  }
  if (single) {
    return static_cast<StateId>(pick);
  }
  std::uint64_t u = rng.uniform_index(static_cast<std::size_t>(total));
  for (Eigen::Index j = 0; j < table.cols(); ++j) {
    const std::uint64_t c = table(row, j);
    if (u < c) {
      return static_cast<StateId>(j);
    }
    u -= c;
  }
  return s;  // unreachable: counts sum to total
}

// ---------------------------------------------------------------------------

void DynaModel::record(StateId s, std::size_t action, Entry entry) {
  const auto key = std::make_pair(s, action);
  if (auto it = index_.find(key); it != index_.end()) {
    entries_[it->second] = entry;
    return;
  }
  index_.emplace(key, keys_.size());
  keys_.push_back(key);
  entries_.push_back(entry);
}

std::pair<std::pair<StateId, std::size_t>, DynaModel::Entry> DynaModel::sample(
    RngStream& rng) const {
  const std::size_t i = rng.uniform_index(keys_.size());
  return {keys_[i], entries_[i]};
}

const DynaModel::Entry* DynaModel::find(StateId s, std::size_t action) const {
  const auto it = index_.find({s, action});
  return it == index_.end() ? nullptr : &entries_[it->second];
}

void dyna_planning(QTable& q, const DynaModel& model, const AgentConfig& cfg, RngStream& rng) {
  if (model.empty()) {
    return;
  }
  for (std::size_t k = 0; k < cfg.planning_steps; ++k) {
    const auto [key, entry] = model.sample(rng);
    q_update(q, key.first, key.second, entry.r_eff, entry.next, entry.terminal, cfg);
  }
}

// ---------------------------------------------------------------------------

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::QLearning: return "q";
    case AgentKind::DynaQ: return "dyna-q";
    case AgentKind::AmrlQ: return "amrl-q";
  }
  return "?";
}

Agent::Agent(QTable q, std::size_t num_actions, const AgentConfig& cfg)
    : q_(std::move(q)), num_actions_(num_actions), cfg_(cfg) {
  cfg_.validate();
}

QLearningAgent::QLearningAgent(std::size_t num_states, std::size_t num_actions,
                               const AgentConfig& cfg)
    : Agent(QTable(num_states, num_actions), num_actions, cfg) {}

EpisodeDelta QLearningAgent::step(StateId current, Environment& env, RngStream& rng) {
  return baseline_step(*this, nullptr, current, env, rng);
}

DynaQAgent::DynaQAgent(std::size_t num_states, std::size_t num_actions, const AgentConfig& cfg)
    : Agent(QTable(num_states, num_actions), num_actions, cfg) {}

EpisodeDelta DynaQAgent::step(StateId current, Environment& env, RngStream& rng) {
  return baseline_step(*this, &model_, current, env, rng);
}

AmrlQAgent::AmrlQAgent(std::size_t num_states, std::size_t num_actions, const AgentConfig& cfg)
    : Agent(init_amrl_q(num_states, num_actions, cfg.measure_init), num_actions, cfg),
      counts_(num_states, num_actions) {}

EpisodeDelta AmrlQAgent::step(StateId believed, Environment& env, RngStream& rng) {
  return amrl_step(*this, believed, env, rng);
}

EpisodeDelta baseline_step(Agent& agent, DynaModel* model, StateId state, Environment& env,
                           RngStream& rng) {
  QTable& q = agent.q_table();
  if (state >= q.num_states()) {
    throw IndexError("state " + std::to_string(state) + " out of range");
  }
  EpisodeDelta d;
  d.column = epsilon_greedy_select(q.row(state), agent.config().epsilon, rng);
  d.pair = {d.column, true};
  const StepOutcome out = env.step(d.pair, rng);
  d.reward = out.reward;
  d.cost = out.cost;
  d.measured = true;
  d.next_state = *out.observation;
  d.done = out.done;

  const double r_eff = agent.config().baseline_learns_cost ? out.reward - out.cost : out.reward;
  q_update(q, state, d.column, r_eff, d.next_state, d.done, agent.config());
  if (model != nullptr) {
    model->record(state, d.column, {r_eff, d.next_state, d.done});
    dyna_planning(q, *model, agent.config(), rng);
  }
  return d;
}

EpisodeDelta amrl_step(AmrlQAgent& agent, StateId believed, Environment& env, RngStream& rng) {
  QTable& q = agent.q_table();
  if (believed >= q.num_states()) {
    throw IndexError("believed state " + std::to_string(believed) + " out of range");
  }
  EpisodeDelta d;
  d.column = epsilon_greedy_select(q.row(believed), agent.config().epsilon, rng);
  d.pair = action_pair_from_index(d.column, agent.num_actions());
  const StepOutcome out = env.step(d.pair, rng);
  d.reward = out.reward;
  d.cost = out.cost;
  d.measured = d.pair.measure;
  d.done = out.done;
  if (d.pair.measure) {
    d.next_state = *out.observation;
    agent.counts().record(d.pair.action, believed, d.next_state);
  } else {
    d.next_state =
        estimate_next_state(agent.counts(), believed, d.pair.action, rng, agent.config().fallback);
  }
  q_update(q, believed, d.column, out.reward - out.cost, d.next_state, d.done, agent.config());
  return d;
}

std::unique_ptr<Agent> make_agent(AgentKind kind, const EnvSpec& spec, const AgentConfig& cfg) {
  switch (kind) {
    case AgentKind::QLearning:
      return std::make_unique<QLearningAgent>(spec.num_states, spec.num_actions, cfg);
    case AgentKind::DynaQ:
      return std::make_unique<DynaQAgent>(spec.num_states, spec.num_actions, cfg);
    case AgentKind::AmrlQ:
      return std::make_unique<AmrlQAgent>(spec.num_states, spec.num_actions, cfg);
  }
  throw ConfigError("unknown agent kind");
}

}  // namespace amrl
