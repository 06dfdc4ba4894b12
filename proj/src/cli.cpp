#include "amrl/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "amrl/analysis.hpp"

namespace amrl::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> names_of(std::initializer_list<std::string_view> names) {
  return {names.begin(), names.end()};
}

// Config-file values only fill options absent from the command line.
void apply_config(CLI::App& sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot read config file " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  for (const auto& [key, value] : parse_config_text(ss.str())) {
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw UsageError(path + ": unknown key '" + key + "'");
    }
    if (opt->count() == 0) {
      try {
        opt->add_result(value);
        opt->run_callback();
      } catch (const CLI::Error& e) {
        throw UsageError(path + ": " + key + ": " + e.what());
      }
    }
  }
}

std::filesystem::path sibling(const std::string& out, const std::string& suffix,
                              const std::string& ext) {
  std::filesystem::path p(out);
  p.replace_filename(p.stem().string() + suffix + ext);
  return p;
}

bool write_file(const std::filesystem::path& path, const std::string& content, std::ostream& err) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    err << "error: cannot open " << path.string() << " for writing\n";
    return false;
  }
  os << content;
  os.flush();
  if (!os) {
    err << "error: failed writing " << path.string() << '\n';
    return false;
  }
  return true;
}

template <typename Writer>
std::string render_to_string(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) {
      key.erase(0, 2);
    }
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw UsageError("config line " + std::to_string(line_no) + ": empty key");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

CliInvocation parse_args(const std::vector<std::string>& args) {
  CliInvocation inv;
  CLI::App app{"Active-measure reinforcement learning experiments", "amrl"};
  app.require_subcommand(1);

  // run -----------------------------------------------------------------
  CLI::App* run = app.add_subcommand("run", "Run a seeded multi-trial experiment");
  std::string env_name;
  std::string agent_name;
  std::size_t episodes = 0;
  std::size_t max_steps = 0;
  std::size_t length = 11;
  double measure_cost = 0.0;
  double swap_prob = 0.0;
  std::string fallback = "self";
  ExperimentConfig& ex = inv.experiment;
  run->add_option("--config", inv.config_path, "Key = value manifest; flags win");
  run->add_option("--env", env_name, "Environment")
      ->check(CLI::IsMember(names_of({"chain", "chain-stochastic", "frozen-lake",
                                      "frozen-lake-slippery", "taxi", "junior-scientist"})));
  run->add_option("--agent", agent_name, "Agent")
      ->check(CLI::IsMember(names_of({"q", "dyna-q", "amrl-q"})));
  auto* episodes_opt = run->add_option("--episodes", episodes, "Episodes per trial");
  run->add_option("--trials", ex.trials, "Independent trials")->check(CLI::PositiveNumber);
  run->add_option("--seed", ex.base_seed, "Base seed; trial i uses seed + i");
  run->add_option("--alpha", ex.agent_cfg.alpha, "Learning rate")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--gamma", ex.agent_cfg.gamma, "Discount")->check(CLI::Range(0.0, 1.0));
  run->add_option("--epsilon", ex.agent_cfg.epsilon, "Exploration rate")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--measure-init", ex.agent_cfg.measure_init, "Amrl-Q measure-column init")
      ->check(CLI::NonNegativeNumber);
  auto* cost_opt = run->add_option("--measure-cost", measure_cost, "Cost c per measurement")
                       ->check(CLI::NonNegativeNumber);
  auto* swap_opt = run->add_option("--swap-prob", swap_prob, "Chain action-swap probability")
                       ->check(CLI::Range(0.0, 1.0));
  run->add_option("--planning-steps", ex.agent_cfg.planning_steps, "Dyna-Q planning steps");
  auto* steps_opt = run->add_option("--max-steps", max_steps, "Per-episode step cap")
                        ->check(CLI::PositiveNumber);
  run->add_option("--length", length, "Chain length")->check(CLI::Range(2, 1000000));
  run->add_option("--costed-gamma", ex.costed_return_gamma,
                  "Discount applied to the reported costed return")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--snapshot-interval", ex.snapshot_interval, "Episodes between Q snapshots");
  run->add_option("--fallback", fallback, "Estimate for never-measured pairs")
      ->check(CLI::IsMember(names_of({"self", "uniform"})));
  run->add_flag("--baseline-learns-cost", ex.agent_cfg.baseline_learns_cost,
                "Q-learning and Dyna-Q back up r - c instead of r");
  inv.out_path = "results.csv";
  run->add_option("--out", inv.out_path, "Aggregate CSV path");
  run->add_flag("--raw", inv.raw, "Also write per-trial CSV (<out>_raw.csv)");
  run->add_flag("--snapshots", inv.snapshots, "Also write Q snapshots (<out>_snapshots.csv)");
  run->add_flag("--histograms", inv.histograms,
                "Also write state visit histograms (<out>_histogram.csv)");
  run->add_option("--svg", inv.svg_path, "Also plot the learning curves to this SVG");

  // analyze-chain ------------------------------------------------------
  CLI::App* analyze =
      app.add_subcommand("analyze-chain", "Fundamental matrix of a random-policy chain");
  analyze->add_option("--length", inv.chain_length, "Chain length (>= 2)");
  analyze->add_option("--swap-prob", inv.swap_prob, "Action-swap probability")
      ->check(CLI::Range(0.0, 1.0));

  // plot ----------------------------------------------------------------
  CLI::App* plot = app.add_subcommand("plot", "Plot aggregate CSVs to SVG");
  std::string plot_out = "plot.svg";
  plot->add_option("inputs", inv.inputs, "Aggregate CSV files")->required();
  plot->add_option("--out", plot_out, "SVG path");

  std::vector<const char*> argv{"amrl"};
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (analyze->parsed()) {
    inv.command = Subcommand::AnalyzeChain;
    if (inv.chain_length < 2) {
      throw UsageError("--length must be at least 2");
    }
    return inv;
  }
  if (plot->parsed()) {
    inv.command = Subcommand::Plot;
    inv.out_path = plot_out;
    return inv;
  }

  inv.command = Subcommand::Run;
  if (!inv.config_path.empty()) {
    apply_config(*run, inv.config_path);
  }
  if (env_name.empty()) {
    throw UsageError("run: --env is required");
  }
  if (agent_name.empty()) {
    throw UsageError("run: --agent is required");
  }
  // Config values bypass IsMember checks; reparse defensively.
  const auto env_kind = parse_env_kind(env_name);
  const auto agent_kind = parse_agent_kind(agent_name);
  if (!env_kind) {
    throw UsageError("run: unknown environment '" + env_name + "'");
  }
  if (!agent_kind) {
    throw UsageError("run: unknown agent '" + agent_name + "'");
  }
  ex.env = *env_kind;
  ex.agent = *agent_kind;
  ex.episodes = episodes_opt->count() > 0 ? episodes : default_episodes(ex.env);
  ex.max_steps = steps_opt->count() > 0 ? max_steps : default_max_steps(ex.env);
  ex.env_options.chain_length = length;
  if (cost_opt->count() > 0) {
    ex.env_options.measure_cost = measure_cost;
  }
  if (swap_opt->count() > 0) {
    ex.env_options.swap_prob = swap_prob;
  }
  ex.agent_cfg.fallback =
      fallback == "uniform" ? EstimateFallback::Uniform : EstimateFallback::SelfTransition;
  ex.keep_snapshots = inv.snapshots;
  ex.keep_histograms = inv.histograms;
  try {
    ex.validate();
    (void)make_environment(ex.env, ex.env_options);
  } catch (const ConfigError& e) {
    throw UsageError(std::string("run: ") + e.what());
  }
  return inv;
}

int cmd_run(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  const ExperimentResult result = run_experiment(inv.experiment);

  if (!write_file(inv.out_path, render_to_string([&](std::ostream& os) {
                    write_aggregate_csv(os, result);
                  }),
                  err)) {
    return kExitRuntime;
  }
  if (inv.raw && !write_file(sibling(inv.out_path, "_raw", ".csv"),
                             render_to_string([&](std::ostream& os) { write_raw_csv(os, result); }),
                             err)) {
    return kExitRuntime;
  }
  if (inv.snapshots &&
      !write_file(sibling(inv.out_path, "_snapshots", ".csv"),
                  render_to_string([&](std::ostream& os) { write_snapshots_csv(os, result); }),
                  err)) {
    return kExitRuntime;
  }
  if (inv.histograms &&
      !write_file(sibling(inv.out_path, "_histogram", ".csv"),
                  render_to_string([&](std::ostream& os) { write_histogram_csv(os, result); }),
                  err)) {
    return kExitRuntime;
  }
  if (!inv.svg_path.empty()) {
    std::stringstream csv;
    write_aggregate_csv(csv, result);
    const auto curves = read_aggregate_csv(csv);
    if (!write_file(inv.svg_path, svg::render(learning_curve_panels(curves)), err)) {
      return kExitRuntime;
    }
  }

  const std::size_t last = result.steps.mean.size();
  out << to_string(result.config.env) << ' ' << to_string(result.config.agent) << ": "
      << result.config.episodes << " episodes x " << result.config.trials << " trials";
  if (last > 0) {
    out << "; final episode mean steps " << format_number(result.steps.mean[last - 1], 6)
        << ", mean measurements " << format_number(result.measurements.mean[last - 1], 6)
        << ", mean costed return " << format_number(result.costed_return.mean[last - 1], 6);
  }
  out << " -> " << inv.out_path << '\n';
  return kExitOk;
}

int cmd_analyze_chain(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  if (inv.chain_length < 2) {
    err << "error: --length must be at least 2\n";
    return kExitUsage;
  }
  ChainConfig cfg;
  cfg.length = inv.chain_length;
  cfg.swap_prob = inv.swap_prob;
  const ChainEnv chain(cfg);
  const TransientMatrix<double> tm = random_policy_transient(chain);
  const DenseMatrix<double> n = fundamental_matrix(tm.q);

  out << "fundamental matrix N = (I - Q)^-1, " << inv.chain_length
      << "-state chain, uniform-random policy:\n";
  for (Eigen::Index i = 0; i < n.rows(); ++i) {
    for (Eigen::Index j = 0; j < n.cols(); ++j) {
      out << (j == 0 ? "  " : " ") << format_number(n(i, j), 10);
    }
    out << '\n';
  }
  out << "expected visits from state 0:";
  for (Eigen::Index j = 0; j < n.cols(); ++j) {
    out << ' ' << format_number(n(0, j), 10);
  }
  out << '\n';
  return kExitOk;
}

std::vector<svg::Panel> learning_curve_panels(const std::vector<Curve>& curves) {
  static const std::map<std::string, std::string> colors = {
      {"q", "#2ca02c"}, {"dyna-q", "#d62728"}, {"amrl-q", "#1f77b4"}};
  static const std::vector<std::string> spare = {"#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  const std::string measure_color = "#9467bd";

  std::map<std::string, int> agent_uses;
  for (const Curve& c : curves) {
    ++agent_uses[c.agent];
  }
  svg::Panel steps{"Mean steps per episode", "episode", "steps", {}};
  svg::Panel ret{"Mean costed return", "episode", "costed return", {}};
  std::size_t spare_i = 0;
  for (const Curve& c : curves) {
    const std::string label = agent_uses[c.agent] > 1 ? c.env + "/" + c.agent : c.agent;
    std::string color;
    if (const auto it = colors.find(c.agent); it != colors.end() && agent_uses[c.agent] == 1) {
      color = it->second;
    } else {
      color = spare[spare_i++ % spare.size()];
    }
    steps.series.push_back({label, color, c.episode, c.mean_steps, c.std_steps, false});
    if (c.agent == "amrl-q") {
      steps.series.push_back({label + " measurements", measure_color, c.episode,
                              c.mean_measurements, c.std_measurements, true});
    }
    ret.series.push_back({label, color, c.episode, c.mean_costed_return, c.std_costed_return,
                          false});
  }
  return {steps, ret};
}

int cmd_plot(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
  std::vector<Curve> curves;
  for (const auto& path : inv.inputs) {
    std::ifstream in(path);
    if (!in) {
      err << "error: cannot read " << path << '\n';
      return kExitRuntime;
    }
    try {
      auto parsed = read_aggregate_csv(in);
      curves.insert(curves.end(), parsed.begin(), parsed.end());
    } catch (const CsvError& e) {
      err << "error: " << path << ": " << e.what() << '\n';
      return kExitRuntime;
    }
  }
  if (!write_file(inv.out_path, svg::render(learning_curve_panels(curves)), err)) {
    return kExitRuntime;
  }
  out << "plotted " << curves.size() << " curve(s) -> " << inv.out_path << '\n';
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliInvocation inv;
  try {
    inv = parse_args(args);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    switch (inv.command) {
      case Subcommand::Run: return cmd_run(inv, out, err);
      case Subcommand::AnalyzeChain: return cmd_analyze_chain(inv, out, err);
      case Subcommand::Plot: return cmd_plot(inv, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace amrl::cli
