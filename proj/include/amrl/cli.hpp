#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "amrl/csv.hpp"
#include "amrl/harness.hpp"
#include "amrl/svg.hpp"

namespace amrl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

class UsageError : public Error {
 public:
  using Error::Error;
};

// Thrown by parse_args for --help; carries the help text.
class HelpRequested : public Error {
 public:
  using Error::Error;
};

enum class Subcommand { Run, AnalyzeChain, Plot };

struct CliInvocation {
  Subcommand command = Subcommand::Run;
  ExperimentConfig experiment;
  std::string out_path;
  bool raw = false;
  bool snapshots = false;
  bool histograms = false;
  std::string svg_path;
  std::size_t chain_length = 5;
  double swap_prob = 0.0;
  std::vector<std::string> inputs;
  std::string config_path;
};

// Flat "key = value" manifest; keys are flag names without the leading
// dashes. '#' starts a comment.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

// args excludes the program name. Throws UsageError or HelpRequested.
CliInvocation parse_args(const std::vector<std::string>& args);

int cmd_run(const CliInvocation& inv, std::ostream& out, std::ostream& err);
int cmd_analyze_chain(const CliInvocation& inv, std::ostream& out, std::ostream& err);
int cmd_plot(const CliInvocation& inv, std::ostream& out, std::ostream& err);

// Steps (with the Amrl-Q measurement curve overlaid) and costed return.
std::vector<svg::Panel> learning_curve_panels(const std::vector<Curve>& curves);

// Parses and dispatches; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace amrl::cli
