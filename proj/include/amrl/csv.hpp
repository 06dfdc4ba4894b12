#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "amrl/harness.hpp"

namespace amrl {

class CsvError : public Error {
 public:
  using Error::Error;
};

// Shortest round-trip decimal form; independent of the global locale.
std::string format_number(double value);
// At most `digits` significant digits, trailing zeros dropped.
std::string format_number(double value, int digits);

inline constexpr const char* kAggregateHeader =
    "env,agent,episode,mean_steps,std_steps,mean_measurements,std_measurements,"
    "mean_reward_sum,mean_cost_sum,mean_costed_return,std_costed_return";
inline constexpr const char* kRawHeader =
    "env,agent,trial,episode,steps,measurements,reward_sum,cost_sum,costed_return";

// Episodes are numbered from 1 in every export.
void write_aggregate_csv(std::ostream& os, const ExperimentResult& result);
void write_raw_csv(std::ostream& os, const ExperimentResult& result);
// episode,state,mean_visits,mean_measurements,cum_mean_visits,cum_mean_measurements
void write_histogram_csv(std::ostream& os, const ExperimentResult& result);
// trial,episode,state,column,action,measure,value
void write_snapshots_csv(std::ostream& os, const ExperimentResult& result);

// One aggregate learning curve, as read back from an aggregate CSV.
struct Curve {
  std::string env;
  std::string agent;
  std::vector<double> episode;
  std::vector<double> mean_steps;
  std::vector<double> std_steps;
  std::vector<double> mean_measurements;
  std::vector<double> std_measurements;
  std::vector<double> mean_costed_return;
  std::vector<double> std_costed_return;
};

// Parses an aggregate CSV; one curve per (env, agent) in order of appearance.
// Throws CsvError on a bad header, a short row, a non-numeric field, or an
// empty file.
std::vector<Curve> read_aggregate_csv(std::istream& is);

}  // namespace amrl
