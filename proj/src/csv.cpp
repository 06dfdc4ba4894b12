#include "amrl/csv.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "amrl/core.hpp"

namespace amrl {

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return {buf.data(), res.ptr};
}

std::string format_number(double value, int digits) {
  std::array<char, 64> buf{};
  const auto res =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, digits);
  std::string s(buf.data(), res.ptr);
  return s == "-0" ? "0" : s;
}

namespace {

std::string prefix(const ExperimentResult& r) {
  return std::string(to_string(r.config.env)) + "," + std::string(to_string(r.config.agent)) + ",";
}

}  // namespace

void write_aggregate_csv(std::ostream& os, const ExperimentResult& r) {
  os << kAggregateHeader << '\n';
  const std::string head = prefix(r);
  for (std::size_t e = 0; e < r.steps.mean.size(); ++e) {
    os << head << (e + 1) << ',' << format_number(r.steps.mean[e]) << ','
       << format_number(r.steps.std[e]) << ',' << format_number(r.measurements.mean[e]) << ','
       << format_number(r.measurements.std[e]) << ',' << format_number(r.reward_sum.mean[e]) << ','
       << format_number(r.cost_sum.mean[e]) << ',' << format_number(r.costed_return.mean[e]) << ','
       << format_number(r.costed_return.std[e]) << '\n';
  }
}

void write_raw_csv(std::ostream& os, const ExperimentResult& r) {
  os << kRawHeader << '\n';
  const std::string head = prefix(r);
  for (std::size_t t = 0; t < r.trials.size(); ++t) {
    for (std::size_t e = 0; e < r.trials[t].size(); ++e) {
      const EpisodeRecord& rec = r.trials[t][e];
      os << head << t << ',' << (e + 1) << ',' << rec.steps << ',' << rec.measurements << ','
         << format_number(rec.reward_sum) << ',' << format_number(rec.cost_sum) << ','
         << format_number(rec.costed_return) << '\n';
    }
  }
}

void write_histogram_csv(std::ostream& os, const ExperimentResult& r) {
  os << "episode,state,mean_visits,mean_measurements,cum_mean_visits,cum_mean_measurements\n";
  Eigen::RowVectorXd cum_v = Eigen::RowVectorXd::Zero(r.mean_visits.cols());
  Eigen::RowVectorXd cum_m = Eigen::RowVectorXd::Zero(r.mean_visits.cols());
  for (Eigen::Index e = 0; e < r.mean_visits.rows(); ++e) {
    cum_v += r.mean_visits.row(e);
    cum_m += r.mean_measurements.row(e);
    for (Eigen::Index s = 0; s < r.mean_visits.cols(); ++s) {
      os << (e + 1) << ',' << s << ',' << format_number(r.mean_visits(e, s)) << ','
         << format_number(r.mean_measurements(e, s)) << ',' << format_number(cum_v(s)) << ','
         << format_number(cum_m(s)) << '\n';
    }
  }
}

void write_snapshots_csv(std::ostream& os, const ExperimentResult& r) {
  os << "trial,episode,state,column,action,measure,value\n";
  const bool pairs = r.config.agent == AgentKind::AmrlQ;
  for (std::size_t t = 0; t < r.snapshots.size(); ++t) {
    for (const QSnapshot& snap : r.snapshots[t]) {
      const QTable& q = snap.table;
      const std::size_t actions = pairs ? q.num_columns() / 2 : q.num_columns();
      for (std::size_t s = 0; s < q.num_states(); ++s) {
        for (std::size_t c = 0; c < q.num_columns(); ++c) {
          const ActionPair p = pairs ? action_pair_from_index(c, actions) : ActionPair{c, true};
          os << t << ',' << snap.episode << ',' << s << ',' << c << ',' << p.action << ','
             << (p.measure ? 1 : 0) << ',' << format_number(q(s, c)) << '\n';
        }
      }
    }
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw CsvError("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
  }
  return v;
}

}  // namespace

std::vector<Curve> read_aggregate_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw CsvError("empty CSV");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != kAggregateHeader) {
    throw CsvError("unexpected header: " + line);
  }
  std::vector<Curve> curves;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto f = split(line);
    if (f.size() != 11) {
      throw CsvError("line " + std::to_string(line_no) + ": expected 11 fields, got " +
                     std::to_string(f.size()));
    }
    if (curves.empty() || curves.back().env != f[0] || curves.back().agent != f[1]) {
      curves.push_back(Curve{f[0], f[1], {}, {}, {}, {}, {}, {}, {}});
    }
    Curve& c = curves.back();
    c.episode.push_back(parse_double(f[2], line_no));
    c.mean_steps.push_back(parse_double(f[3], line_no));
    c.std_steps.push_back(parse_double(f[4], line_no));
    c.mean_measurements.push_back(parse_double(f[5], line_no));
    c.std_measurements.push_back(parse_double(f[6], line_no));
    c.mean_costed_return.push_back(parse_double(f[9], line_no));
    c.std_costed_return.push_back(parse_double(f[10], line_no));
  }
  if (curves.empty()) {
    throw CsvError("CSV has a header but no rows");
  }
  return curves;
}

}  // namespace amrl
