#include "amrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

namespace amrl {

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::Chain: return "chain";
    case EnvKind::ChainStochastic: return "chain-stochastic";
    case EnvKind::FrozenLake: return "frozen-lake";
    case EnvKind::FrozenLakeSlippery: return "frozen-lake-slippery";
    case EnvKind::Taxi: return "taxi";
    case EnvKind::JuniorScientist: return "junior-scientist";
  }
  return "?";
}

std::optional<EnvKind> parse_env_kind(std::string_view name) {
  for (EnvKind k : {EnvKind::Chain, EnvKind::ChainStochastic, EnvKind::FrozenLake,
                    EnvKind::FrozenLakeSlippery, EnvKind::Taxi, EnvKind::JuniorScientist}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  return std::nullopt;
}

std::optional<AgentKind> parse_agent_kind(std::string_view name) {
  for (AgentKind k : {AgentKind::QLearning, AgentKind::DynaQ, AgentKind::AmrlQ}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  return std::nullopt;
}

std::string_view to_string(EpisodeEnd end) {
  switch (end) {
    case EpisodeEnd::Goal: return "goal";
    case EpisodeEnd::Hole: return "hole";
    case EpisodeEnd::StepCap: return "step_cap";
  }
  return "?";
}

std::unique_ptr<Environment> make_environment(EnvKind kind, const EnvOptions& options) {
  std::unique_ptr<Environment> env;
  switch (kind) {
    case EnvKind::Chain:
    case EnvKind::ChainStochastic: {
      ChainConfig cfg;
      cfg.length = options.chain_length;
      cfg.swap_prob = options.swap_prob.value_or(kind == EnvKind::ChainStochastic ? 0.1 : 0.0);
      env = make_chain(cfg);
      break;
    }
    case EnvKind::FrozenLake: env = make_frozen_lake(false); break;
    case EnvKind::FrozenLakeSlippery: env = make_frozen_lake(true); break;
    case EnvKind::Taxi: env = make_taxi(); break;
    case EnvKind::JuniorScientist: env = make_junior_scientist(options.junior); break;
  }
  if (options.measure_cost) {
    env->set_measure_cost(*options.measure_cost);
  }
  return env;
}

std::size_t default_episodes(EnvKind kind) {
  switch (kind) {
    case EnvKind::Chain:
    case EnvKind::ChainStochastic: return 100;
    case EnvKind::FrozenLake:
    case EnvKind::FrozenLakeSlippery:
    case EnvKind::Taxi: return 2000;
    case EnvKind::JuniorScientist: return 5000;
  }
  return 100;
}

std::size_t default_max_steps(EnvKind kind) {
  switch (kind) {
    case EnvKind::Chain:
    case EnvKind::ChainStochastic: return 1000;
    case EnvKind::FrozenLake:
    case EnvKind::FrozenLakeSlippery: return 500;
    case EnvKind::Taxi: return 2000;
    case EnvKind::JuniorScientist: return 500;
  }
  return 1000;
}

ExperimentConfig ExperimentConfig::defaults_for(EnvKind env, AgentKind agent) {
  ExperimentConfig cfg;
  cfg.env = env;
  cfg.agent = agent;
  cfg.episodes = default_episodes(env);
  cfg.max_steps = default_max_steps(env);
  return cfg;
}

void ExperimentConfig::validate() const {
  if (trials < 1) {
    throw ConfigError("trials must be at least 1");
  }
  if (max_steps < 1) {
    throw ConfigError("max_steps must be at least 1");
  }
  if (!(costed_return_gamma >= 0.0 && costed_return_gamma <= 1.0)) {
    throw ConfigError("costed-return gamma must lie in [0, 1]");
  }
  agent_cfg.validate();
}

EpisodeRecord run_episode(Agent& agent, Environment& env, RngStream& rng, std::size_t max_steps,
                          double costed_return_gamma, VisitHistogram* hist) {
  const EnvSpec& spec = env.spec();
  if (agent.q_table().num_states() != spec.num_states || agent.num_actions() != spec.num_actions) {
    throw ConfigError("agent is " + std::to_string(agent.q_table().num_states()) + " states x " +
                      std::to_string(agent.num_actions()) + " actions but " +
                      std::string(env.name()) + " has " + std::to_string(spec.num_states) +
                      " x " + std::to_string(spec.num_actions));
  }
  StateId belief = env.reset(rng);
  if (hist != nullptr) {
    hist->record_step(belief, false);
  }

  EpisodeRecord rec;
  Trajectory<double> traj;
  bool done = false;
  while (!done && rec.steps < max_steps) {
    const EpisodeDelta d = agent.step(belief, env, rng);
    ++rec.steps;
    rec.measurements += d.measured;
    traj.push(d.reward, d.cost);
    if (hist != nullptr) {
      hist->record_step(env.true_state(), d.measured);
    }
    belief = d.next_state;
    done = d.done;
  }
  if (hist != nullptr) {
    hist->end_episode();
  }

  if (done) {
    rec.terminated_by = env.termination() == Termination::Hole ? EpisodeEnd::Hole : EpisodeEnd::Goal;
  }
  for (std::size_t t = 0; t < traj.size(); ++t) {
    rec.reward_sum += traj.rewards[t];
    rec.cost_sum += traj.costs[t];
  }
  rec.costed_return = costed_return(traj, costed_return_gamma);
  return rec;
}

TrialResult run_trial(const ExperimentConfig& cfg, std::size_t trial_index) {
  cfg.validate();
  auto env = make_environment(cfg.env, cfg.env_options);
  auto agent = make_agent(cfg.agent, env->spec(), cfg.agent_cfg);
  RngStream rng = RngStream::for_trial(cfg.base_seed, trial_index);

  TrialResult result;
  result.trial_index = trial_index;
  result.histogram = VisitHistogram(env->spec().num_states);
  result.histogram.set_keep_history(cfg.keep_histograms);
  result.episodes.reserve(cfg.episodes);

  const bool snapshots = cfg.keep_snapshots && cfg.snapshot_interval > 0;
  if (snapshots) {
    result.snapshots.push_back(q_snapshot(agent->q_table(), 0));
  }
  for (std::size_t e = 0; e < cfg.episodes; ++e) {
    result.episodes.push_back(run_episode(*agent, *env, rng, cfg.max_steps,
                                          cfg.costed_return_gamma, &result.histogram));
    if (snapshots && (e + 1) % cfg.snapshot_interval == 0) {
      result.snapshots.push_back(q_snapshot(agent->q_table(), e + 1));
    }
  }
  result.final_q = agent->q_table();
  return result;
}

namespace {

template <typename Get>
SeriesStats aggregate_with(const std::vector<std::vector<EpisodeRecord>>& trials, Get get) {
  SeriesStats out;
  if (trials.empty()) {
    return out;
  }
  const std::size_t episodes = trials.front().size();
  out.mean.assign(episodes, 0.0);
  out.std.assign(episodes, 0.0);
  const auto n = static_cast<double>(trials.size());
  for (std::size_t e = 0; e < episodes; ++e) {
    double sum = 0.0;
    for (const auto& t : trials) {
      sum += get(t.at(e));
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& t : trials) {
      const double d = get(t[e]) - mean;
      sq += d * d;
    }
    out.mean[e] = mean;
    out.std[e] = std::sqrt(sq / n);
  }
  return out;
}

}  // namespace

SeriesStats aggregate_series(const std::vector<std::vector<EpisodeRecord>>& trials,
                             double EpisodeRecord::*field) {
  return aggregate_with(trials, [field](const EpisodeRecord& r) { return r.*field; });
}

SeriesStats aggregate_series(const std::vector<std::vector<EpisodeRecord>>& trials,
                             std::size_t EpisodeRecord::*field) {
  return aggregate_with(trials,
                        [field](const EpisodeRecord& r) { return static_cast<double>(r.*field); });
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) {
    return requested;
  }
  if (const char* env = std::getenv("AMRL_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) {
      return static_cast<std::size_t>(v);
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  result.num_states = make_environment(cfg.env, cfg.env_options)->spec().num_states;
  result.trials.resize(cfg.trials);
  result.snapshots.resize(cfg.trials);
  result.final_q.assign(cfg.trials, QTable(1, 1));

  // Integer histogram totals: exact, so their reduction order is irrelevant.
  using Counts = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>;
  const auto rows = static_cast<Eigen::Index>(cfg.keep_histograms ? cfg.episodes : 0);
  const auto cols = static_cast<Eigen::Index>(result.num_states);
  Counts visits = Counts::Zero(rows, cols);
  Counts measures = Counts::Zero(rows, cols);

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t t = next++; t < cfg.trials; t = next++) {
      try {
        TrialResult tr = run_trial(cfg, t);
        std::lock_guard lock(mu);
        const auto& vh = tr.histogram.visit_history();
        const auto& mh = tr.histogram.measurement_history();
        for (Eigen::Index e = 0; e < rows; ++e) {
          for (Eigen::Index s = 0; s < cols; ++s) {
            visits(e, s) += vh[static_cast<std::size_t>(e)][static_cast<std::size_t>(s)];
            measures(e, s) += mh[static_cast<std::size_t>(e)][static_cast<std::size_t>(s)];
          }
        }
        result.trials[t] = std::move(tr.episodes);
        result.snapshots[t] = std::move(tr.snapshots);
        result.final_q[t] = std::move(tr.final_q);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) {
          failure = std::current_exception();
        }
        next = cfg.trials;
      }
    }
  };

  const std::size_t threads = std::min(resolve_threads(cfg.threads), cfg.trials);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) {
      pool.emplace_back(worker);
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }

  result.steps = aggregate_series(result.trials, &EpisodeRecord::steps);
  result.measurements = aggregate_series(result.trials, &EpisodeRecord::measurements);
  result.reward_sum = aggregate_series(result.trials, &EpisodeRecord::reward_sum);
  result.cost_sum = aggregate_series(result.trials, &EpisodeRecord::cost_sum);
  result.costed_return = aggregate_series(result.trials, &EpisodeRecord::costed_return);
  const double n = static_cast<double>(cfg.trials);
  result.mean_visits = visits.cast<double>() / n;
  result.mean_measurements = measures.cast<double>() / n;
  return result;
}

}  // namespace amrl
