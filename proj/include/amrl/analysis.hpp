#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "amrl/agents.hpp"
#include "amrl/envs.hpp"

namespace amrl {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Transient-to-transient block of an absorbing chain under a fixed policy,
/// with the environment states each row/column stands for.
template <typename Scalar>
struct TransientMatrix {
  DenseMatrix<Scalar> q;
  std::vector<StateId> states;
};

/// N = (I - Q)^{-1}. N(i, j) is the expected number of visits to transient
/// state j when starting from i. Solved with a partial-pivoted LU; throws
/// NonAbsorbingChain when I - Q is (numerically) singular.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> fundamental_matrix(const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  if (q.rows() != q.cols()) {
    throw NonAbsorbingChain("transient matrix must be square");
  }
  const Eigen::Index t = q.rows();
  const DenseMatrix<Scalar> i_minus_q = DenseMatrix<Scalar>::Identity(t, t) - q;
  const Eigen::PartialPivLU<DenseMatrix<Scalar>> lu(i_minus_q);
  // A closed recurrent class (rows of Q summing to 1) makes I - Q singular.
  if (!(lu.rcond() > Scalar(1e-13))) {
    throw NonAbsorbingChain("I - Q is singular: the chain has no reachable absorbing state");
  }
  return lu.solve(DenseMatrix<Scalar>::Identity(t, t));
}

// Transient block of the chain induced by the uniform-random policy. Needs an
// environment with an enumerable kernel whose absorbing states are
// is_terminal() states (the chain, in this release).
TransientMatrix<double> random_policy_transient(const Environment& env);

// Row of N for the environment's start state: expected visits per transient
// state under the uniform-random policy.
Eigen::VectorXd expected_visits_from_start(const Environment& env);

/// Per-state visit and measurement counts, per episode and cumulatively.
/// The free reset observation counts as a visit but not a measurement.
class VisitHistogram {
 public:
  explicit VisitHistogram(std::size_t num_states);

  void record_step(StateId state, bool measured);
  // Closes the current episode: appends its counts to the history.
  void end_episode();

  std::size_t num_states() const { return static_cast<std::size_t>(cumulative_visits_.size()); }
  std::size_t episodes() const { return visits_by_episode_.size(); }

  const std::vector<std::uint32_t>& visits() const { return episode_visits_; }
  const std::vector<std::uint32_t>& measurements() const { return episode_measurements_; }
  const Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 1>& cumulative_visits() const {
    return cumulative_visits_;
  }
  const Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 1>& cumulative_measurements() const {
    return cumulative_measurements_;
  }
  // history()[e][s]: counts for completed episode e.
  const std::vector<std::vector<std::uint32_t>>& visit_history() const { return visits_by_episode_; }
  const std::vector<std::vector<std::uint32_t>>& measurement_history() const {
    return measurements_by_episode_;
  }
  void set_keep_history(bool keep) { keep_history_ = keep; }

 private:
  std::vector<std::uint32_t> episode_visits_;
  std::vector<std::uint32_t> episode_measurements_;
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 1> cumulative_visits_;
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 1> cumulative_measurements_;
  std::vector<std::vector<std::uint32_t>> visits_by_episode_;
  std::vector<std::vector<std::uint32_t>> measurements_by_episode_;
  bool keep_history_ = true;
};

// Free-function form used by the harness.
inline void record_step(VisitHistogram& hist, StateId state, bool measured) {
  hist.record_step(state, measured);
}

struct QSnapshot {
  std::size_t episode = 0;
  QTable table;
};

// Deep copy of the table tagged with the number of completed episodes.
QSnapshot q_snapshot(const QTable& q, std::size_t episode);

// Per-state argmax column of a Q-table (lowest index on ties).
std::vector<std::size_t> greedy_columns(const QTable& q);

}  // namespace amrl
