#include "amrl/analysis.hpp"

#include <map>
#include <string>

namespace amrl {

TransientMatrix<double> random_policy_transient(const Environment& env) {
  const EnvSpec& spec = env.spec();
  TransientMatrix<double> out;
  std::map<StateId, Eigen::Index> position;
  for (StateId s = 0; s < spec.num_states; ++s) {
    if (!env.is_terminal(s)) {
      position.emplace(s, static_cast<Eigen::Index>(out.states.size()));
      out.states.push_back(s);
    }
  }
  const auto t = static_cast<Eigen::Index>(out.states.size());
  out.q = DenseMatrix<double>::Zero(t, t);
  const double p_action = 1.0 / static_cast<double>(spec.num_actions);
  for (Eigen::Index i = 0; i < t; ++i) {
    for (std::size_t a = 0; a < spec.num_actions; ++a) {
      for (const auto& [next, p] : env.kernel(out.states[static_cast<std::size_t>(i)], a)) {
        if (const auto it = position.find(next); it != position.end()) {
          out.q(i, it->second) += p_action * p;
        }
      }
    }
  }
  return out;
}

Eigen::VectorXd expected_visits_from_start(const Environment& env) {
  const TransientMatrix<double> tm = random_policy_transient(env);
  const DenseMatrix<double> n = fundamental_matrix(tm.q);
  for (std::size_t i = 0; i < tm.states.size(); ++i) {
    if (tm.states[i] == env.start_state()) {
      return n.row(static_cast<Eigen::Index>(i)).transpose();
    }
  }
  throw UnsupportedEnvironment("start state is absorbing");
}

VisitHistogram::VisitHistogram(std::size_t num_states)
    : episode_visits_(num_states, 0),
      episode_measurements_(num_states, 0),
      cumulative_visits_(Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 1>::Zero(
          static_cast<Eigen::Index>(num_states))),
      cumulative_measurements_(Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 1>::Zero(
          static_cast<Eigen::Index>(num_states))) {}

void VisitHistogram::record_step(StateId state, bool measured) {
  if (state >= num_states()) {
    throw IndexError("histogram state " + std::to_string(state) + " out of range");
  }
  ++episode_visits_[state];
  ++cumulative_visits_(static_cast<Eigen::Index>(state));
  if (measured) {
    ++episode_measurements_[state];
    ++cumulative_measurements_(static_cast<Eigen::Index>(state));
  }
}

void VisitHistogram::end_episode() {
  if (keep_history_) {
    visits_by_episode_.push_back(episode_visits_);
    measurements_by_episode_.push_back(episode_measurements_);
  }
  std::fill(episode_visits_.begin(), episode_visits_.end(), 0);
  std::fill(episode_measurements_.begin(), episode_measurements_.end(), 0);
}

QSnapshot q_snapshot(const QTable& q, std::size_t episode) { return {episode, q}; }

std::vector<std::size_t> greedy_columns(const QTable& q) {
  std::vector<std::size_t> out(q.num_states());
  for (std::size_t s = 0; s < q.num_states(); ++s) {
    Eigen::Index best = 0;
    q.row(s).maxCoeff(&best);
    out[s] = static_cast<std::size_t>(best);
  }
  return out;
}

}  // namespace amrl
