#include <doctest.h>

#include <cmath>
#include <vector>

#include "amrl/envs.hpp"

using namespace amrl;

namespace {

ChainConfig chain_cfg(std::size_t length = 11, double swap = 0.0) {
  ChainConfig cfg;
  cfg.length = length;
  cfg.swap_prob = swap;
  return cfg;
}

// Walks the chain to `target` with measured right moves.
void advance_chain(ChainEnv& env, RngStream& rng, StateId target) {
  env.reset(rng);
  while (env.true_state() < target) {
    env.step({ChainEnv::kRight, true}, rng);
  }
}

}  // namespace

TEST_CASE("reset returns the start state for free") {
  RngStream rng(1);
  ChainEnv chain(chain_cfg());
  CHECK(chain.reset(rng) == 0);
  FrozenLakeEnv lake(false);
  CHECK(lake.reset(rng) == 0);
  CHECK(lake.cell(0) == 'S');
  JuniorScientistEnv js{JuniorScientistConfig{}};
  CHECK(js.reset(rng) == 10);
  CHECK(js.energy_of(10) == 0);
}

TEST_CASE("chain step semantics") {
  RngStream rng(2);
  ChainEnv chain(chain_cfg());

  chain.reset(rng);
  auto out = chain.step({ChainEnv::kRight, true}, rng);
  CHECK(out.reward == doctest::Approx(-0.01));
  CHECK(out.cost == doctest::Approx(0.05));
  REQUIRE(out.observation.has_value());
  CHECK(*out.observation == 1);
  CHECK_FALSE(out.done);

  chain.reset(rng);
  out = chain.step({ChainEnv::kLeft, true}, rng);
  CHECK(*out.observation == 0);
  CHECK(out.reward == doctest::Approx(-0.01));

  advance_chain(chain, rng, 9);
  out = chain.step({ChainEnv::kRight, false}, rng);
  CHECK(out.reward == 1.0);
  CHECK(out.cost == 0.0);
  CHECK_FALSE(out.observation.has_value());
  CHECK(out.done);
  CHECK_THROWS_AS(chain.step({ChainEnv::kRight, true}, rng), ProtocolError);
}

TEST_CASE("chain construction") {
  CHECK(ChainEnv(chain_cfg(5)).spec().num_states == 5);
  ChainEnv eleven(chain_cfg(11));
  CHECK(eleven.goal() == 10);
  CHECK(eleven.is_terminal(10));
  CHECK_FALSE(eleven.is_terminal(9));
  CHECK_THROWS_AS(ChainEnv(chain_cfg(1)), ConfigError);
  CHECK_THROWS_AS(ChainEnv(chain_cfg(11, 1.5)), ConfigError);

  // Full swap: right always behaves as left.
  RngStream rng(3);
  ChainEnv swapped(chain_cfg(11, 1.0));
  swapped.reset(rng);
  for (int i = 0; i < 20; ++i) {
    CHECK(*swapped.step({ChainEnv::kRight, true}, rng).observation == 0);
  }
}

TEST_CASE("stochastic chain swap frequency") {
  // Long enough that always moving right never reaches the goal; at state 0
  // a swapped move clamps and still shows up as "not right".
  RngStream rng(4);
  ChainEnv chain(chain_cfg(200001, 0.1));
  chain.reset(rng);
  const std::size_t n = 100000;
  std::size_t swaps = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const StateId before = chain.true_state();
    const StateId after = *chain.step({ChainEnv::kRight, true}, rng).observation;
    swaps += after <= before;
  }
  CHECK(std::abs(static_cast<double>(swaps) / n - 0.1) < 0.01);

  const auto k = chain.kernel(5, ChainEnv::kRight);
  REQUIRE(k.size() == 2);
  CHECK(k[0] == std::pair<StateId, double>{6, 0.9});
  CHECK(k[1] == std::pair<StateId, double>{4, 0.1});
}

TEST_CASE("frozen lake dynamics") {
  RngStream rng(5);
  FrozenLakeEnv lake(false);
  CHECK(lake.spec().num_states == 64);
  CHECK(lake.spec().num_actions == 4);
  CHECK(lake.is_terminal(63));
  CHECK(lake.cell(19) == 'H');

  lake.reset(rng);
  auto out = lake.step({3, true}, rng);  // up at the top edge
  CHECK(*out.observation == 0);
  CHECK(out.reward == 0.0);

  // Walk down the right edge; (6, 7) is frozen, below it the goal.
  lake.reset(rng);
  for (int i = 0; i < 7; ++i) {
    lake.step({2, false}, rng);
  }
  for (int i = 0; i < 6; ++i) {
    out = lake.step({1, false}, rng);
    REQUIRE_FALSE(out.done);
  }
  CHECK(lake.true_state() == 55);
  out = lake.step({1, true}, rng);
  CHECK(out.done);
  CHECK(out.reward == 1.0);
  CHECK(lake.termination() == Termination::Goal);

  // Hole at (2, 3) below (1, 3).
  lake.reset(rng);
  lake.step({1, true}, rng);
  for (int i = 0; i < 3; ++i) {
    lake.step({2, true}, rng);
  }
  CHECK(lake.true_state() == 11);
  out = lake.step({1, true}, rng);
  CHECK(out.done);
  CHECK(out.reward == 0.0);
  CHECK(lake.termination() == Termination::Hole);
}

TEST_CASE("slippery frozen lake moves in three directions equally") {
  FrozenLakeEnv lake(true);
  RngStream rng(6);
  std::vector<int> hits(64, 0);
  const int n = 30000;
  for (int i = 0; i < n; ++i) {
    lake.reset(rng);
    lake.step({1, true}, rng);  // down from (0,0): down, right or left (clamped)
    ++hits[lake.true_state()];
  }
  CHECK(hits[8] / double(n) == doctest::Approx(1.0 / 3).epsilon(0.05));
  CHECK(hits[1] / double(n) == doctest::Approx(1.0 / 3).epsilon(0.05));
  CHECK(hits[0] / double(n) == doctest::Approx(1.0 / 3).epsilon(0.05));

  const auto k = lake.kernel(9, 0);
  REQUIRE(k.size() == 3);
  double total = 0.0;
  for (const auto& [s, p] : k) {
    total += p;
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("taxi walls come from the bundled wall list") {
  TaxiEnv taxi;
  CHECK(taxi.spec().num_states == 500);
  CHECK(taxi.spec().num_actions == 6);
  CHECK(taxi.wall_east_of(0, 1));
  CHECK(taxi.wall_east_of(1, 1));
  CHECK_FALSE(taxi.wall_east_of(2, 1));
  CHECK(taxi.wall_east_of(3, 0));
  CHECK(taxi.wall_east_of(4, 2));
  CHECK_FALSE(taxi.wall_east_of(0, 0));

  CHECK(parse_taxi_walls("# c\n0 1 2\n\n 3 2 3 \n").size() == 2);
  CHECK_THROWS_AS(parse_taxi_walls("0 1 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_taxi_walls("0 x 3\n"), ConfigError);
}

TEST_CASE("taxi state encoding round-trips") {
  for (StateId s = 0; s < 500; ++s) {
    CHECK(TaxiEnv::encode(TaxiEnv::decode(s)) == s);
  }
}

TEST_CASE("taxi rewards") {
  RngStream rng(7);
  TaxiEnv taxi;
  // Find an episode whose passenger waits at R(0,0).
  TaxiEnv::Layout l;
  do {
    l = TaxiEnv::decode(taxi.reset(rng));
  } while (l.passenger != 0);
  CHECK(l.destination != l.passenger);

  // Drive to (0, 0): north to row 0, then west is open on rows 0..2 at col <= 1.
  auto out = taxi.step({TaxiEnv::kNorth, true}, rng);
  CHECK(out.reward == -1.0);
  CHECK(out.cost == doctest::Approx(0.01));
  while (TaxiEnv::decode(taxi.true_state()).row > 2) {
    taxi.step({TaxiEnv::kNorth, true}, rng);
  }
  for (int i = 0; i < 4; ++i) {
    taxi.step({TaxiEnv::kWest, true}, rng);
  }
  while (TaxiEnv::decode(taxi.true_state()).row > 0) {
    taxi.step({TaxiEnv::kNorth, true}, rng);
  }
  REQUIRE(TaxiEnv::decode(taxi.true_state()).col == 0);

  // Illegal drop-off: observation is the unchanged state.
  const StateId before = taxi.true_state();
  out = taxi.step({TaxiEnv::kDropoff, true}, rng);
  CHECK(out.reward == -10.0);
  CHECK(out.cost == doctest::Approx(0.01));
  CHECK(*out.observation == before);
  CHECK_FALSE(out.done);

  out = taxi.step({TaxiEnv::kPickup, true}, rng);
  CHECK(out.reward == -1.0);
  CHECK(TaxiEnv::decode(taxi.true_state()).passenger == TaxiEnv::kInTaxi);
  out = taxi.step({TaxiEnv::kPickup, true}, rng);
  CHECK(out.reward == -10.0);

  // Drive to the destination and drop off.
  const auto [drow, dcol] = TaxiEnv::kLandmarks[l.destination];
  // Row 2 has no walls: go there, across, then straight to the target row.
  while (TaxiEnv::decode(taxi.true_state()).row < 2) {
    taxi.step({TaxiEnv::kSouth, false}, rng);
  }
  while (TaxiEnv::decode(taxi.true_state()).col < dcol) {
    taxi.step({TaxiEnv::kEast, false}, rng);
  }
  while (TaxiEnv::decode(taxi.true_state()).row != drow) {
    taxi.step({drow > 2 ? TaxiEnv::kSouth : TaxiEnv::kNorth, false}, rng);
  }
  out = taxi.step({TaxiEnv::kDropoff, false}, rng);
  CHECK(out.reward == 20.0);
  CHECK(out.done);
}

TEST_CASE("taxi movement respects walls") {
  RngStream rng(8);
  TaxiEnv taxi;
  // Place the taxi at (0, 1) by searching resets.
  TaxiEnv::Layout l;
  do {
    l = TaxiEnv::decode(taxi.reset(rng));
  } while (!(l.row == 0 && l.col == 1));
  taxi.step({TaxiEnv::kEast, true}, rng);
  CHECK(TaxiEnv::decode(taxi.true_state()).col == 1);
  taxi.step({TaxiEnv::kWest, true}, rng);
  CHECK(TaxiEnv::decode(taxi.true_state()).col == 0);
}

TEST_CASE("junior scientist") {
  RngStream rng(9);
  JuniorScientistConfig cfg;
  JuniorScientistEnv js(cfg);
  CHECK(js.spec().num_states == 21);
  js.reset(rng);

  auto out = js.step({JuniorScientistEnv::kDone, true}, rng);
  CHECK(out.reward == doctest::Approx(-0.05));
  CHECK_FALSE(out.done);
  CHECK(out.cost == doctest::Approx(0.01));

  for (int i = 0; i < 5; ++i) {
    js.step({JuniorScientistEnv::kIncrease, false}, rng);
  }
  CHECK(js.energy_of(js.true_state()) == 5);
  out = js.step({JuniorScientistEnv::kDone, true}, rng);
  CHECK(out.reward == 1.0);
  CHECK(out.done);

  js.reset(rng);
  for (int i = 0; i < 15; ++i) {
    js.step({JuniorScientistEnv::kIncrease, false}, rng);
  }
  CHECK(js.energy_of(js.true_state()) == 10);
  out = js.step({JuniorScientistEnv::kIncrease, true}, rng);
  CHECK(js.energy_of(*out.observation) == 10);
  CHECK(out.reward == doctest::Approx(-0.05));

  JuniorScientistConfig bad;
  bad.goal_energy = bad.start_energy;
  CHECK_THROWS_AS(JuniorScientistEnv{bad}, ConfigError);
  bad = {};
  bad.goal_energy = 20;
  CHECK_THROWS_AS(JuniorScientistEnv{bad}, ConfigError);
}

namespace {

std::vector<std::unique_ptr<Environment>> all_envs() {
  std::vector<std::unique_ptr<Environment>> v;
  v.push_back(make_chain(chain_cfg()));
  v.push_back(make_chain(chain_cfg(11, 0.1)));
  v.push_back(make_frozen_lake(false));
  v.push_back(make_frozen_lake(true));
  v.push_back(make_taxi());
  v.push_back(make_junior_scientist({}));
  return v;
}

struct Played {
  std::vector<double> rewards;
  std::vector<StateId> states;
  double cost_sum = 0.0;
  std::size_t measured = 0;
};

// Plays a fixed random action script; measure flags drawn from a separate
// stream so the environment stream sees identical calls.
Played play(Environment& env, std::uint64_t env_seed, std::uint64_t script_seed, int measure_mode) {
  RngStream rng(env_seed);
  RngStream script(script_seed);
  RngStream flags(script_seed + 1000);
  Played p;
  env.reset(rng);
  for (int t = 0; t < 300 && !env.done(); ++t) {
    const std::size_t a = script.uniform_index(env.spec().num_actions);
    bool m = measure_mode == 1;
    if (measure_mode == 2) {
      m = flags.bernoulli(0.5);
    }
    const StepOutcome out = env.step({a, m}, rng);
    p.rewards.push_back(out.reward);
    p.states.push_back(env.true_state());
    p.cost_sum += out.cost;
    p.measured += m;
    CHECK(out.observation.has_value() == m);
    if (m) {
      CHECK(*out.observation == env.true_state());
      CHECK(out.cost == env.spec().measure_cost);
    } else {
      CHECK(out.cost == 0.0);
    }
  }
  return p;
}

}  // namespace

TEST_CASE("all environments: cost accounting, fidelity and measurement-independent rewards") {
  for (auto& env : all_envs()) {
    CAPTURE(env->name());
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Played always = play(*env, seed, seed + 50, 1);
      const Played never = play(*env, seed, seed + 50, 0);
      const Played mixed = play(*env, seed, seed + 50, 2);
      CHECK(always.rewards == never.rewards);
      CHECK(always.rewards == mixed.rewards);
      CHECK(always.states == mixed.states);
      CHECK(never.cost_sum == 0.0);
      CHECK(mixed.cost_sum ==
            doctest::Approx(env->spec().measure_cost * static_cast<double>(mixed.measured)));
    }
  }
}

TEST_CASE("deterministic environments ignore the rng") {
  std::vector<std::unique_ptr<Environment>> det;
  det.push_back(make_chain(chain_cfg()));
  det.push_back(make_frozen_lake(false));
  det.push_back(make_junior_scientist({}));
  for (auto& env : det) {
    CAPTURE(env->name());
    const Played a = play(*env, 1, 77, 1);
    const Played b = play(*env, 2, 77, 1);
    CHECK(a.rewards == b.rewards);
    CHECK(a.states == b.states);
  }
}

TEST_CASE("terminal transitions are absorbing") {
  for (auto& env : all_envs()) {
    CAPTURE(env->name());
    RngStream rng(11);
    RngStream script(12);
    for (int episode = 0; episode < 20; ++episode) {
      env->reset(rng);
      for (int t = 0; t < 5000 && !env->done(); ++t) {
        env->step({script.uniform_index(env->spec().num_actions), false}, rng);
      }
      if (env->done()) {
        CHECK_THROWS_AS(env->step({0, true}, rng), ProtocolError);
      }
    }
  }
}

TEST_CASE("environment protocol errors") {
  RngStream rng(13);
  ChainEnv chain(chain_cfg());
  CHECK_THROWS_AS(chain.step({0, true}, rng), ProtocolError);
  chain.reset(rng);
  CHECK_THROWS_AS(chain.step({2, true}, rng), IndexError);
  CHECK_THROWS_AS(chain.set_measure_cost(-1.0), ConfigError);
  CHECK_THROWS_AS(TaxiEnv().kernel(0, 0), UnsupportedEnvironment);
}
