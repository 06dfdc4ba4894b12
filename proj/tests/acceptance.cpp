// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any
// criterion fails. Tolerances are pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "amrl/cli.hpp"
#include "amrl/harness.hpp"

using namespace amrl;

namespace {

constexpr double kOracleTol = 1e-9;
constexpr double kEmpiricalRelTol = 0.01;
constexpr double kChainStepBound = 12.0;
constexpr double kLateMeasurementBound = 2.0;
constexpr double kMeasurementDecayRatio = 0.2;
constexpr double kCostMargin = 0.05 * 5;
constexpr double kEndpointRelTol = 0.25;
constexpr std::size_t kTrialQuorum = 18;
constexpr double kJuniorDropRatio = 0.5;
constexpr double kJuniorStepRatio = 2.0;

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  failures += ok ? 0 : 1;
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

std::string fmt(double v, int digits = 4) { return format_number(v, digits); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double window_mean(const std::vector<double>& v, std::size_t first, std::size_t last) {
  // Inclusive 1-based episode range.
  double sum = 0.0;
  for (std::size_t e = first; e <= last; ++e) {
    sum += v.at(e - 1);
  }
  return sum / static_cast<double>(last - first + 1);
}

bool within(double value, double target, double rel) {
  return std::abs(value - target) <= rel * target;
}

ExperimentConfig experiment(EnvKind env, AgentKind agent) {
  return ExperimentConfig::defaults_for(env, agent);
}

const AgentKind kAgents[] = {AgentKind::QLearning, AgentKind::DynaQ, AgentKind::AmrlQ};

void fundamental_matrix_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli({"analyze-chain", "--length", "5"}, out, err);
  const std::string tag = "expected visits from state 0:";
  const std::string text = out.str();
  std::vector<double> printed;
  if (const auto pos = text.find(tag); pos != std::string::npos) {
    std::istringstream line(text.substr(pos + tag.size()));
    for (double x; line >> x;) {
      printed.push_back(x);
    }
  }
  ChainConfig cfg;
  cfg.length = 5;
  const Eigen::VectorXd exact = expected_visits_from_start(ChainEnv(cfg));
  const double expected[] = {8, 6, 4, 2};
  double worst = printed.size() == 4 ? 0.0 : INFINITY;
  for (std::size_t j = 0; j < 4 && printed.size() == 4; ++j) {
    worst = std::max({worst, std::abs(printed[j] - expected[j]),
                      std::abs(exact(static_cast<Eigen::Index>(j)) - expected[j])});
  }
  const double secs = seconds_since(t0);
  std::string shown;
  for (double x : printed) {
    shown += (shown.empty() ? "" : ", ") + fmt(x, 10);
  }
  report(code == 0 && worst < kOracleTol && secs < 1.0, "fundamental-matrix-oracle",
         "printed [" + shown + "], max |error| " + fmt(worst, 3) + ", " + fmt(secs, 3) + " s");
}

void empirical_visits() {
  const auto t0 = std::chrono::steady_clock::now();
  ChainConfig cfg;
  cfg.length = 5;
  ChainEnv env(cfg);
  RngStream rng(2024);
  Eigen::VectorXd visits = Eigen::VectorXd::Zero(4);
  const int episodes = 100000;
  for (int e = 0; e < episodes; ++e) {
    StateId s = env.reset(rng);
    while (!env.done()) {
      visits(static_cast<Eigen::Index>(s)) += 1.0;
      env.step({rng.uniform_index(2), true}, rng);
      s = env.true_state();
    }
  }
  visits /= episodes;
  const Eigen::VectorXd exact = expected_visits_from_start(env);
  const double worst = ((visits - exact).array() / exact.array()).abs().maxCoeff();
  const double secs = seconds_since(t0);
  std::ostringstream detail;
  detail << "simulated [" << fmt(visits(0)) << ", " << fmt(visits(1)) << ", " << fmt(visits(2))
         << ", " << fmt(visits(3)) << "], max rel error " << fmt(worst, 3) << ", " << fmt(secs, 3)
         << " s";
  report(worst < kEmpiricalRelTol && secs < 30.0, "empirical-visits", detail.str());
}

void q_propagation() {
  std::size_t passing = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ChainConfig cc;
    cc.length = 5;
    cc.step_reward = 0.0;
    cc.goal_reward = 1.0;
    cc.measure_cost = 0.0;
    ChainEnv env(cc);
    QLearningAgent agent(5, 2, AgentConfig{});
    RngStream rng = RngStream::for_trial(seed, 0);
    bool ok = true;
    for (std::size_t k = 1; k <= 6 && ok; ++k) {
      const EpisodeRecord rec = run_episode(agent, env, rng, 1000000);
      ok = rec.terminated_by == EpisodeEnd::Goal;
      const QTable& q = agent.q_table();
      std::size_t nonzero = 0;
      for (StateId s = 0; s < 5; ++s) {
        for (std::size_t a = 0; a < 2; ++a) {
          if (q(s, a) != 0.0) {
            ++nonzero;
            ok = ok && s + k >= 4;
          }
        }
      }
      if (k == 1) {
        ok = ok && nonzero == 1 && q(3, ChainEnv::kRight) > 0.0;
      }
    }
    passing += ok;
  }
  report(passing == 20, "q-propagation", std::to_string(passing) + "/20 seeds");
}

struct ChainRuns {
  ExperimentResult q;
  ExperimentResult dyna;
  ExperimentResult amrl;
  double secs = 0.0;
};

ChainRuns chain_runs() {
  const auto t0 = std::chrono::steady_clock::now();
  ChainRuns r{run_experiment(experiment(EnvKind::Chain, AgentKind::QLearning)),
              run_experiment(experiment(EnvKind::Chain, AgentKind::DynaQ)),
              run_experiment(experiment(EnvKind::Chain, AgentKind::AmrlQ)), 0.0};
  r.secs = seconds_since(t0);
  return r;
}

void chain_convergence(const ChainRuns& r) {
  const std::size_t n = r.q.steps.mean.size();
  const double q = window_mean(r.q.steps.mean, n - 9, n);
  const double d = window_mean(r.dyna.steps.mean, n - 9, n);
  const double a = window_mean(r.amrl.steps.mean, n - 9, n);
  bool dominates = true;
  for (std::size_t e = 2; e <= 20; ++e) {
    dominates = dominates && r.dyna.steps.mean[e - 1] <= r.q.steps.mean[e - 1];
  }
  const bool ok = std::max({q, d, a}) <= kChainStepBound && dominates && r.secs < 30.0;
  report(ok, "chain-convergence",
         "last-10 mean steps q " + fmt(q) + ", dyna-q " + fmt(d) + ", amrl-q " + fmt(a) +
             "; dyna-q <= q over episodes 2-20: " + (dominates ? "yes" : "no") + "; " +
             fmt(r.secs, 3) + " s");
}

void measurement_decay(const ChainRuns& r) {
  const auto& m = r.amrl.measurements.mean;
  const double late = window_mean(m, 50, 100);
  const double first = m.front();
  const bool ok = late <= kLateMeasurementBound && late <= kMeasurementDecayRatio * first;
  report(ok, "measurement-decay",
         "amrl-q mean measurements over episodes 50-100 " + fmt(late) + " (bound " +
             fmt(kLateMeasurementBound) + "), episode 1 " + fmt(first) + ", ratio " +
             fmt(late / first, 3) + " (bound " + fmt(kMeasurementDecayRatio) + ")");
}

void costed_return_ordering(const ChainRuns& r) {
  const std::size_t n = r.q.costed_return.mean.size();
  const double q = window_mean(r.q.costed_return.mean, n - 19, n);
  const double d = window_mean(r.dyna.costed_return.mean, n - 19, n);
  const double a = window_mean(r.amrl.costed_return.mean, n - 19, n);
  const double margin = a - std::max(q, d);
  report(margin >= kCostMargin, "costed-return-ordering",
         "final-20 mean costed return q " + fmt(q) + ", dyna-q " + fmt(d) + ", amrl-q " + fmt(a) +
             "; margin " + fmt(margin) + " (needs >= " + fmt(kCostMargin) + ")");
}

struct Endpoint {
  double q, dyna, amrl_steps, amrl_measurements;
};

void endpoint(const std::string& name, EnvKind env, const Endpoint& target, double limit_secs) {
  const auto t0 = std::chrono::steady_clock::now();
  Endpoint got{};
  double* slots[] = {&got.q, &got.dyna, &got.amrl_steps};
  for (int i = 0; i < 3; ++i) {
    const ExperimentResult res = run_experiment(experiment(env, kAgents[i]));
    const std::size_t n = res.steps.mean.size();
    *slots[i] = window_mean(res.steps.mean, n - 99, n);
    if (kAgents[i] == AgentKind::AmrlQ) {
      got.amrl_measurements = window_mean(res.measurements.mean, n - 99, n);
    }
  }
  const double secs = seconds_since(t0);
  const bool q_ok = within(got.q, target.q, kEndpointRelTol);
  const bool d_ok = within(got.dyna, target.dyna, kEndpointRelTol);
  const bool s_ok = within(got.amrl_steps, target.amrl_steps, kEndpointRelTol);
  const bool m_ok = within(got.amrl_measurements, target.amrl_measurements, kEndpointRelTol);
  const bool order = got.amrl_measurements < got.amrl_steps;
  auto item = [](const char* label, double v, double t, bool ok) {
    return std::string(label) + " " + fmt(v) + " vs " + fmt(t) + (ok ? "" : " (out of band)");
  };
  report(q_ok && d_ok && s_ok && m_ok && order && secs < limit_secs, name,
         "final-100 means: " + item("q", got.q, target.q, q_ok) + ", " +
             item("dyna-q", got.dyna, target.dyna, d_ok) + ", " +
             item("amrl-q steps", got.amrl_steps, target.amrl_steps, s_ok) + ", " +
             item("amrl-q measurements", got.amrl_measurements, target.amrl_measurements, m_ok) +
             "; measurements < steps: " + (order ? "yes" : "no") + "; " + fmt(secs, 3) + " s");
}

void init_sweep() {
  const double inits[] = {0.005, 0.01, 0.1, 1.0};
  std::vector<double> totals;
  for (double init : inits) {
    ExperimentConfig cfg = experiment(EnvKind::Chain, AgentKind::AmrlQ);
    cfg.episodes = 50;
    cfg.agent_cfg.measure_init = init;
    const ExperimentResult res = run_experiment(cfg);
    totals.push_back(
        std::accumulate(res.measurements.mean.begin(), res.measurements.mean.end(), 0.0));
  }
  const bool ok = std::is_sorted(totals.begin(), totals.end());
  std::string detail = "total measurements over 50 episodes at init 0.005/0.01/0.1/1.0:";
  for (double t : totals) {
    detail += " " + fmt(t, 5);
  }
  report(ok, "init-sweep-monotonic", detail);
}

void q_table_evolution() {
  ExperimentConfig cfg = experiment(EnvKind::Chain, AgentKind::AmrlQ);
  cfg.episodes = 120;
  const ExperimentResult res = run_experiment(cfg);
  const std::size_t right_estimate = action_pair_index(ChainEnv::kRight, false, 2);
  std::size_t passing = 0;
  std::size_t states_ok = 0;
  for (const QTable& q : res.final_q) {
    const auto greedy = greedy_columns(q);
    bool ok = true;
    for (StateId s = 1; s <= 9; ++s) {
      ok = ok && greedy[s] == right_estimate;
      states_ok += greedy[s] == right_estimate;
    }
    passing += ok;
  }
  report(passing >= kTrialQuorum, "q-table-evolution",
         std::to_string(passing) + "/20 trials with (right, estimate) greedy in states 1-9 (" +
             std::to_string(states_ok) + "/180 state-trials)");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "amrl_acceptance";
  fs::create_directories(dir);
  const std::vector<std::vector<std::string>> runs = {
      {"--env", "chain-stochastic", "--agent", "amrl-q"},
      {"--env", "frozen-lake-slippery", "--agent", "dyna-q", "--episodes", "200"},
      {"--env", "taxi", "--agent", "q", "--episodes", "100", "--trials", "5"},
      {"--env", "junior-scientist", "--agent", "amrl-q", "--episodes", "300", "--trials", "6"},
  };
  std::size_t identical = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::vector<std::string> baseline;
    bool same = true;
    for (const char* threads : {"1", "4", "1", "3"}) {
      ::setenv("AMRL_THREADS", threads, 1);
      const fs::path out = dir / ("run" + std::to_string(i) + ".csv");
      std::vector<std::string> args = {"run"};
      args.insert(args.end(), runs[i].begin(), runs[i].end());
      args.insert(args.end(), {"--raw", "--histograms", "--snapshots", "--out", out.string()});
      std::ostringstream o;
      std::ostringstream e;
      same = same && cli::run_cli(args, o, e) == 0;
      std::vector<std::string> files;
      for (const char* suffix : {"", "_raw", "_histogram", "_snapshots"}) {
        files.push_back(slurp(dir / ("run" + std::to_string(i) + suffix + ".csv")));
      }
      if (baseline.empty()) {
        baseline = files;
      } else {
        same = same && files == baseline;
      }
    }
    identical += same;
  }
  ::unsetenv("AMRL_THREADS");
  report(identical == runs.size(), "determinism",
         std::to_string(identical) + "/" + std::to_string(runs.size()) +
             " invocations byte-identical across AMRL_THREADS = 1, 4, 1, 3");
}

void stochastic_variants() {
  struct Variant {
    EnvKind env;
    double measure_init;
  };
  const Variant variants[] = {{EnvKind::ChainStochastic, 0.01}, {EnvKind::FrozenLakeSlippery, 10.0}};
  bool ok = true;
  std::string detail;
  for (const Variant& v : variants) {
    for (AgentKind agent : kAgents) {
      ExperimentConfig cfg = experiment(v.env, agent);
      cfg.agent_cfg.measure_init = v.measure_init;
      cfg.keep_histograms = false;
      const ExperimentResult res = run_experiment(cfg);
      const std::size_t tail_start = cfg.episodes - cfg.episodes / 10;
      std::size_t passing = 0;
      for (const auto& trial : res.trials) {
        bool good = true;
        for (std::size_t e = tail_start; e < trial.size(); ++e) {
          good = good && trial[e].terminated_by != EpisodeEnd::StepCap &&
                 std::isfinite(trial[e].costed_return);
        }
        passing += good;
      }
      bool finite = true;
      for (double x : res.steps.mean) {
        finite = finite && std::isfinite(x);
      }
      for (double x : res.costed_return.mean) {
        finite = finite && std::isfinite(x);
      }
      ok = ok && passing >= kTrialQuorum && finite;
      detail += (detail.empty() ? "" : ", ") + std::string(to_string(v.env)) + "/" +
                std::string(to_string(agent)) + " " + std::to_string(passing) + "/20";
    }
  }
  report(ok, "stochastic-variants", detail);
}

std::vector<double> moving_average(const std::vector<double>& v, std::size_t width) {
  // Trailing window; entry e covers episodes e-width+1..e (0-based).
  std::vector<double> out(v.size(), NAN);
  double sum = 0.0;
  for (std::size_t e = 0; e < v.size(); ++e) {
    sum += v[e];
    if (e >= width) {
      sum -= v[e - width];
    }
    if (e + 1 >= width) {
      out[e] = sum / static_cast<double>(width);
    }
  }
  return out;
}

void junior_scientist_shift() {
  const ExperimentResult res = run_experiment(experiment(EnvKind::JuniorScientist, AgentKind::AmrlQ));
  const auto& m = res.measurements.mean;
  const auto& s = res.steps.mean;
  const double early = window_mean(m, 201, 700);
  const auto m_ma = moving_average(m, 100);
  const auto s_ma = moving_average(s, 100);
  std::size_t shift = 0;  // 1-based episode, 0 if none
  for (std::size_t e = 700; e < m.size(); ++e) {
    if (m_ma[e] < kJuniorDropRatio * early) {
      shift = e + 1;
      break;
    }
  }
  if (shift == 0) {
    report(false, "junior-scientist-shift",
           "moving-average measurements never fall below " + fmt(kJuniorDropRatio) +
               " x early mean " + fmt(early));
    return;
  }
  const double pre_steps = window_mean(s, shift - 500, shift - 1);
  double post_max = 0.0;
  for (std::size_t e = shift - 1; e < s.size(); ++e) {
    post_max = std::max(post_max, s_ma[e]);
  }
  const bool ok = post_max <= kJuniorStepRatio * pre_steps;
  report(ok, "junior-scientist-shift",
         "early mean measurements " + fmt(early) + ", shift at episode " + std::to_string(shift) +
             ", pre-shift mean steps " + fmt(pre_steps) + ", post-shift max moving-average steps " +
             fmt(post_max));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  fundamental_matrix_oracle();
  empirical_visits();
  q_propagation();
  const ChainRuns chain = chain_runs();
  chain_convergence(chain);
  measurement_decay(chain);
  costed_return_ordering(chain);
  endpoint("frozen-lake-endpoint", EnvKind::FrozenLake, {13.99, 15.45, 18.52, 10.50}, 300.0);
  endpoint("taxi-endpoint", EnvKind::Taxi, {14.83, 14.67, 15.30, 12.13}, 600.0);
  init_sweep();
  q_table_evolution();
  determinism();
  stochastic_variants();
  junior_scientist_shift();
  std::cout << failures << " criterion(s) failed; total " << fmt(seconds_since(t0), 4) << " s"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
