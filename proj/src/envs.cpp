#include "amrl/envs.hpp"

#include <charconv>
#include <string>

#include "amrl/taxi_walls.hpp"

namespace amrl {

Environment::Environment(EnvSpec spec) : spec_(spec) {
  if (spec_.num_states < 2) {
    throw ConfigError("environment needs at least two states");
  }
  if (spec_.num_actions < 2) {
    throw ConfigError("environment needs at least two actions");
  }
  if (!(spec_.measure_cost >= 0.0)) {
    throw ConfigError("measure cost must be non-negative");
  }
}

void Environment::set_measure_cost(double cost) {
  if (!(cost >= 0.0)) {
    throw ConfigError("measure cost must be non-negative");
  }
  spec_.measure_cost = cost;
}

StateId Environment::reset(RngStream& rng) {
  state_ = on_reset(rng);
  termination_ = Termination::None;
  started_ = true;
  return state_;
}

StepOutcome Environment::step(ActionPair pair, RngStream& rng) {
  if (!started_) {
    throw ProtocolError(std::string(name()) + ": step before reset");
  }
  if (done()) {
    throw ProtocolError(std::string(name()) + ": step after the episode terminated");
  }
  if (pair.action >= spec_.num_actions) {
    throw IndexError(std::string(name()) + ": action " + std::to_string(pair.action) +
                     " out of range");
  }
  const Transition t = on_step(state_, pair.action, rng);
  state_ = t.next;
  termination_ = t.termination;

  StepOutcome out;
  out.reward = t.reward;
  out.done = done();
  if (pair.measure) {
    out.cost = spec_.measure_cost;
    out.observation = state_;
  }
  return out;
}

std::vector<std::pair<StateId, double>> Environment::kernel(StateId, std::size_t) const {
  throw UnsupportedEnvironment(std::string(name()) + " does not expose its transition kernel");
}

// ---------------------------------------------------------------------------
// Chain

namespace {

EnvSpec chain_spec(const ChainConfig& cfg) {
  if (cfg.length < 2) {
    throw ConfigError("chain length must be at least 2");
  }
  if (!(cfg.swap_prob >= 0.0 && cfg.swap_prob <= 1.0)) {
    throw ConfigError("swap probability must lie in [0, 1]");
  }
  return EnvSpec{cfg.length, 2, cfg.measure_cost, cfg.step_reward, cfg.goal_reward,
                 cfg.swap_prob > 0.0, cfg.swap_prob};
}

}  // namespace

ChainEnv::ChainEnv(const ChainConfig& cfg) : Environment(chain_spec(cfg)), cfg_(cfg) {}

StateId ChainEnv::move(StateId state, std::size_t action) const {
  if (action == kRight) {
    return state + 1 < cfg_.length ? state + 1 : state;
  }
  return state > 0 ? state - 1 : 0;
}

StateId ChainEnv::on_reset(RngStream&) { return 0; }

Environment::Transition ChainEnv::on_step(StateId state, std::size_t action, RngStream& rng) {
  if (cfg_.swap_prob > 0.0 && rng.bernoulli(cfg_.swap_prob)) {
    action = action == kLeft ? kRight : kLeft;
  }
  const StateId next = move(state, action);
  if (next == goal()) {
    return {next, cfg_.goal_reward, Termination::Goal};
  }
  return {next, cfg_.step_reward, Termination::None};
}

std::vector<std::pair<StateId, double>> ChainEnv::kernel(StateId state, std::size_t action) const {
  const std::size_t swapped = action == kLeft ? kRight : kLeft;
  const double p = cfg_.swap_prob;
  if (p == 0.0) {
    return {{move(state, action), 1.0}};
  }
  if (p == 1.0) {
    return {{move(state, swapped), 1.0}};
  }
  return {{move(state, action), 1.0 - p}, {move(state, swapped), p}};
}

// ---------------------------------------------------------------------------
// Frozen lake

FrozenLakeEnv::FrozenLakeEnv(bool slippery, double measure_cost)
    : Environment(EnvSpec{kSide * kSide, 4, measure_cost, 0.0, 1.0, slippery,
                          slippery ? 2.0 / 3.0 : 0.0}) {}

bool FrozenLakeEnv::is_terminal(StateId state) const {
  const char c = cell(state);
  return c == 'H' || c == 'G';
}

StateId FrozenLakeEnv::move(StateId state, std::size_t direction) const {
  std::size_t row = state / kSide;
  std::size_t col = state % kSide;
  switch (direction) {
    case 0: col = col > 0 ? col - 1 : col; break;
    case 1: row = row + 1 < kSide ? row + 1 : row; break;
    case 2: col = col + 1 < kSide ? col + 1 : col; break;
    case 3: row = row > 0 ? row - 1 : row; break;
    default: break;
  }
  return row * kSide + col;
}

Environment::Transition FrozenLakeEnv::land(StateId next) const {
  switch (cell(next)) {
    case 'G': return {next, spec_.goal_reward, Termination::Goal};
    case 'H': return {next, spec_.step_reward, Termination::Hole};
    default: return {next, spec_.step_reward, Termination::None};
  }
}

StateId FrozenLakeEnv::on_reset(RngStream&) { return 0; }

Environment::Transition FrozenLakeEnv::on_step(StateId state, std::size_t action, RngStream& rng) {
  std::size_t direction = action;
  if (slippery()) {
    // (action - 1), action, (action + 1) modulo 4, equally likely.
    direction = (action + 3 + rng.uniform_index(3)) % 4;
  }
  return land(move(state, direction));
}

std::vector<std::pair<StateId, double>> FrozenLakeEnv::kernel(StateId state,
                                                             std::size_t action) const {
  if (!slippery()) {
    return {{move(state, action), 1.0}};
  }
  std::vector<std::pair<StateId, double>> out;
  for (std::size_t k = 0; k < 3; ++k) {
    out.emplace_back(move(state, (action + 3 + k) % 4), 1.0 / 3.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Taxi

std::vector<std::array<std::size_t, 3>> parse_taxi_walls(std::string_view text) {
  std::vector<std::array<std::size_t, 3>> walls;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    std::array<std::size_t, 3> wall{};
    std::size_t fields = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      if (*p == ' ' || *p == '\t' || *p == '\r') {
        ++p;
        continue;
      }
      if (fields == 3) {
        throw ConfigError("taxi walls line " + std::to_string(line_no) + ": too many fields");
      }
      auto [next, ec] = std::from_chars(p, end, wall[fields]);
      if (ec != std::errc{}) {
        throw ConfigError("taxi walls line " + std::to_string(line_no) + ": not an integer");
      }
      p = next;
      ++fields;
    }
    if (fields == 0) {
      continue;
    }
    if (fields != 3 || wall[0] >= TaxiEnv::kSide || wall[2] != wall[1] + 1 ||
        wall[2] >= TaxiEnv::kSide) {
      throw ConfigError("taxi walls line " + std::to_string(line_no) +
                        ": expected 'row west_col east_col' with adjacent columns");
    }
    walls.push_back(wall);
  }
  return walls;
}

TaxiEnv::TaxiEnv(double measure_cost)
    : Environment(EnvSpec{kSide * kSide * 5 * 4, 6, measure_cost, -1.0, 20.0, false, 0.0}) {
  for (const auto& [row, west, east] : parse_taxi_walls(detail::kTaxiWalls)) {
    (void)east;
    walls_[row][west] = true;
  }
}

StateId TaxiEnv::encode(const Layout& l) {
  return ((l.row * kSide + l.col) * 5 + l.passenger) * 4 + l.destination;
}

TaxiEnv::Layout TaxiEnv::decode(StateId state) {
  Layout l;
  l.destination = state % 4;
  state /= 4;
  l.passenger = state % 5;
  state /= 5;
  l.col = state % kSide;
  l.row = state / kSide;
  return l;
}

StateId TaxiEnv::on_reset(RngStream& rng) {
  Layout l;
  l.row = rng.uniform_index(kSide);
  l.col = rng.uniform_index(kSide);
  l.passenger = rng.uniform_index(4);
  // Destination is uniform over the three landmarks other than the pickup.
  l.destination = (l.passenger + 1 + rng.uniform_index(3)) % 4;
  return encode(l);
}

Environment::Transition TaxiEnv::on_step(StateId state, std::size_t action, RngStream&) {
  Layout l = decode(state);
  double reward = spec_.step_reward;
  Termination termination = Termination::None;
  const std::pair<std::size_t, std::size_t> here{l.row, l.col};

  switch (action) {
    case kSouth:
      l.row = l.row + 1 < kSide ? l.row + 1 : l.row;
      break;
    case kNorth:
      l.row = l.row > 0 ? l.row - 1 : l.row;
      break;
    case kEast:
      if (l.col + 1 < kSide && !walls_[l.row][l.col]) {
        ++l.col;
      }
      break;
    case kWest:
      if (l.col > 0 && !walls_[l.row][l.col - 1]) {
        --l.col;
      }
      break;
    case kPickup:
      if (l.passenger < kInTaxi && kLandmarks[l.passenger] == here) {
        l.passenger = kInTaxi;
      } else {
        reward = -10.0;
      }
      break;
    case kDropoff:
      if (l.passenger == kInTaxi && kLandmarks[l.destination] == here) {
        l.passenger = l.destination;
        reward = spec_.goal_reward;
        termination = Termination::Goal;
      } else if (l.passenger == kInTaxi) {
        // Dropping at another landmark leaves the passenger there.
        bool at_landmark = false;
        for (std::size_t i = 0; i < kLandmarks.size(); ++i) {
          if (kLandmarks[i] == here) {
            l.passenger = i;
            at_landmark = true;
          }
        }
        if (!at_landmark) {
          reward = -10.0;
        }
      } else {
        reward = -10.0;
      }
      break;
    default:
      break;
  }
  return {encode(l), reward, termination};
}

// ---------------------------------------------------------------------------
// Junior scientist

namespace {

EnvSpec junior_spec(const JuniorScientistConfig& cfg) {
  if (cfg.energy_min > cfg.energy_max || cfg.start_energy < cfg.energy_min ||
      cfg.start_energy > cfg.energy_max || cfg.goal_energy < cfg.energy_min ||
      cfg.goal_energy > cfg.energy_max) {
    throw ConfigError("junior scientist energies must satisfy min <= start, goal <= max");
  }
  if (cfg.start_energy == cfg.goal_energy) {
    throw ConfigError("junior scientist start and goal energies must differ");
  }
  return EnvSpec{static_cast<std::size_t>(cfg.energy_max - cfg.energy_min + 1), 3,
                 cfg.measure_cost, cfg.step_reward, cfg.goal_reward, false, 0.0};
}

}  // namespace

JuniorScientistEnv::JuniorScientistEnv(const JuniorScientistConfig& cfg)
    : Environment(junior_spec(cfg)), cfg_(cfg) {}

StateId JuniorScientistEnv::on_reset(RngStream&) { return start_state(); }

Environment::Transition JuniorScientistEnv::on_step(StateId state, std::size_t action,
                                                   RngStream&) {
  const int energy = energy_of(state);
  switch (action) {
    case kDecrease:
      return {index_of(energy > cfg_.energy_min ? energy - 1 : energy), cfg_.step_reward,
              Termination::None};
    case kIncrease:
      return {index_of(energy < cfg_.energy_max ? energy + 1 : energy), cfg_.step_reward,
              Termination::None};
    default:
      if (energy == cfg_.goal_energy) {
        return {state, cfg_.goal_reward, Termination::Goal};
      }
      return {state, cfg_.step_reward, Termination::None};
  }
}

// ---------------------------------------------------------------------------

std::unique_ptr<Environment> make_chain(const ChainConfig& cfg) {
  return std::make_unique<ChainEnv>(cfg);
}

std::unique_ptr<Environment> make_frozen_lake(bool slippery) {
  return std::make_unique<FrozenLakeEnv>(slippery);
}

std::unique_ptr<Environment> make_taxi() { return std::make_unique<TaxiEnv>(); }

std::unique_ptr<Environment> make_junior_scientist(const JuniorScientistConfig& cfg) {
  return std::make_unique<JuniorScientistEnv>(cfg);
}

}  // namespace amrl
