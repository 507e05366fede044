#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "redrl/environments.hpp"
#include "redrl/oracle.hpp"

using namespace redrl;

TEST_CASE("red-pill blue-pill transitions follow the pill") {
  RedPillBluePill env;
  RngStream rng(1, "env");
  for (StateId s : {rpbp::kRedWorld, rpbp::kBlueWorld}) {
    for (int k = 0; k < 100; ++k) {
      CHECK(env.step(s, rpbp::kRedPill, rng).next_state == rpbp::kRedWorld);
      CHECK(env.step(s, rpbp::kBluePill, rng).next_state == rpbp::kBlueWorld);
    }
  }
  CHECK_THROWS_AS(env.step(2, 0, rng), Error);
  CHECK_THROWS_AS(env.step(0, 2, rng), Error);
}

TEST_CASE("red-pill blue-pill reward moments") {
  RedPillBluePill env;
  RngStream rng(2, "env");
  const int n = 1'000'000;
  for (StateId s : {rpbp::kRedWorld, rpbp::kBlueWorld}) {
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
      const double r = env.step(s, rpbp::kRedPill, rng).reward;
      REQUIRE(r <= 0.0);
      sum += r;
      sum2 += r * r;
    }
    const double mean = sum / n, sd = std::sqrt(sum2 / n - mean * mean);
    if (s == rpbp::kRedWorld) {
      CHECK(std::abs(mean + 0.7) < 3 * 0.05 / std::sqrt(n));
      CHECK(sd == doctest::Approx(0.05).epsilon(0.01));
    } else {
      const double exact_sd = std::sqrt(0.05 * 0.05 + 0.16);
      CHECK(std::abs(mean + 0.6) < 3 * exact_sd / std::sqrt(n));
      CHECK(sd == doctest::Approx(exact_sd).epsilon(0.01));
    }
  }
}

TEST_CASE("initial state is uniform over the worlds") {
  RedPillBluePill env;
  RngStream rng(3, "env");
  int blue = 0;
  for (int i = 0; i < 100'000; ++i) blue += env.initial_state(rng) == rpbp::kBlueWorld;
  CHECK(std::abs(blue / 1e5 - 0.5) < 0.005);
}

TEST_CASE("the explicit model matches the simulator") {
  const auto m = rpbp_model();
  CHECK_NOTHROW(m.validate());
  CHECK(m.state_names == std::vector<std::string>{"redworld", "blueworld"});
  CHECK(m.action_names == std::vector<std::string>{"red_pill", "blue_pill"});
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(m.transitions[s][rpbp::kRedPill] == std::vector<double>{1.0, 0.0});
    CHECK(m.transitions[s][rpbp::kBluePill] == std::vector<double>{0.0, 1.0});
  }
  CHECK(m.rewards[0][1].mean() == doctest::Approx(-0.7));
  CHECK(m.rewards[1][0].mean() == doctest::Approx(-0.6));
  CHECK_THROWS_AS(RedPillBluePill(RpbpConfig{.red_stdev = -1.0}), Error);
  CHECK_THROWS_AS(RedPillBluePill(RpbpConfig{.mix_coefficient = 1.5}), Error);
}

TEST_CASE("pendulum reward examples") {
  const PendulumConfig cfg;
  CHECK(pendulum_step(cfg, {0.0, 0.0}, 1).reward == 0.0);
  CHECK(pendulum_step(cfg, {std::numbers::pi, 0.0}, 1).reward ==
        doctest::Approx(-std::numbers::pi * std::numbers::pi));
  CHECK(pendulum_step(cfg, {0.0, 2.0}, 2).reward == doctest::Approx(-(0.1 * 4 + 0.001 * 4)));
  // Upright at rest with no torque is an equilibrium.
  const auto t = pendulum_step(cfg, {0.0, 0.0}, 1);
  CHECK(t.next.angle == 0.0);
  CHECK(t.next.velocity == 0.0);
  CHECK_THROWS_AS(pendulum_step(cfg, {0.0, 0.0}, 3), Error);
}

TEST_CASE("pendulum energy is nearly conserved without torque") {
  // Semi-implicit Euler keeps the energy oscillating about a constant level;
  // the oscillation itself is O(timestep) and large for wide swings, so the
  // drift is measured on 200-step averages.
  const PendulumConfig cfg;
  auto energies = [&](PendulumState s) {
    std::vector<double> out;
    for (int k = 0; k < 1000; ++k) {
      s = pendulum_step(cfg, s, 1).next;
      out.push_back(pendulum_energy(cfg, s));
    }
    return out;
  };
  const PendulumState wide{2.0, 0.0};
  const auto e = energies(wide);
  const double first = std::accumulate(e.begin(), e.begin() + 200, 0.0) / 200;
  const double last = std::accumulate(e.end() - 200, e.end(), 0.0) / 200;
  CHECK(std::abs(last - first) / std::abs(pendulum_energy(cfg, wide)) < 0.05);

  const PendulumState narrow{3.0, 0.0};
  const double e0 = pendulum_energy(cfg, narrow);
  for (double x : energies(narrow)) REQUIRE(std::abs(x - e0) / std::abs(e0) < 0.05);
}

TEST_CASE("pendulum state stays wrapped and clamped") {
  const PendulumConfig cfg;
  CHECK(wrap_angle(std::numbers::pi + 0.5) == doctest::Approx(-std::numbers::pi + 0.5));
  CHECK(wrap_angle(-std::numbers::pi - 0.5) == doctest::Approx(std::numbers::pi - 0.5));
  CHECK(wrap_angle(0.25) == 0.25);
  RngStream rng(5, "probe");
  for (int k = 0; k < 100'000; ++k) {
    const PendulumState s{rng.uniform(-std::numbers::pi, std::numbers::pi), rng.uniform(-8, 8)};
    const auto t = pendulum_step(cfg, s, rng.uniform_index(3));
    REQUIRE(t.next.angle >= -std::numbers::pi);
    REQUIRE(t.next.angle <= std::numbers::pi);
    REQUIRE(std::abs(t.next.velocity) <= cfg.max_speed);
    REQUIRE(t.reward <= 0.0);
  }
}

TEST_CASE("pendulum resets on schedule") {
  PendulumConfig cfg;
  cfg.reset_interval = 10;
  Pendulum env(cfg);
  RngStream rng(6, "env");
  env.reset(rng);
  env.set_state({0.0, 0.0});
  for (int k = 0; k < 9; ++k) {
    const auto st = env.step(1, rng);
    CHECK(st.next_state == std::vector<double>{0.0, 0.0});
    CHECK_FALSE(st.terminal);
  }
  const auto st = env.step(1, rng);
  CHECK(std::abs(st.next_state[1]) <= 1.0);
  CHECK(st.next_state != std::vector<double>{0.0, 0.0});

  cfg.reset_interval = 0;
  Pendulum never(cfg);
  never.reset(rng);
  never.set_state({0.0, 0.0});
  for (int k = 0; k < 5000; ++k) REQUIRE(never.step(1, rng).next_state == std::vector<double>{0.0, 0.0});
}

TEST_CASE("environment and policy streams are isolated") {
  // Drawing from the policy stream must not change the environment's draws.
  RedPillBluePill env;
  RngStream a_env(7, "env"), b_env(7, "env"), b_pol(7, "policy");
  for (int k = 0; k < 1000; ++k) {
    for (int j = 0; j < k % 3; ++j) b_pol.uniform();
    REQUIRE(env.step(1, 0, a_env).reward == env.step(1, 0, b_env).reward);
  }
}
