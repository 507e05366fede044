#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include "redrl/core.hpp"
#include "redrl/mdp_model.hpp"

namespace redrl {

// ---------------------------------------------------------------------------
// Red-pill blue-pill
// ---------------------------------------------------------------------------

namespace rpbp {
inline constexpr StateId kRedWorld = 0;
inline constexpr StateId kBlueWorld = 1;
inline constexpr ActionId kRedPill = 0;
inline constexpr ActionId kBluePill = 1;
}  // namespace rpbp

/// Red world: N(-0.7, 0.05). Blue world: with probability mix_coefficient
/// N(-1.0, 0.05), else N(-0.2, 0.05). Rewards are capped at 0.
struct RpbpConfig {
  double red_mean = -0.7;
  double red_stdev = 0.05;
  double blue_low_mean = -1.0;
  double blue_low_stdev = 0.05;
  double blue_high_mean = -0.2;
  double blue_high_stdev = 0.05;
  double mix_coefficient = 0.5;
  double reward_cap = 0.0;

  void validate() const;
  RewardDistribution red_distribution() const;
  RewardDistribution blue_distribution() const;
};

/// Two states, two actions. The pill taken picks the next state; the reward
/// is drawn from the current state's distribution.
class RedPillBluePill : public DiscreteEnvironment {
 public:
  explicit RedPillBluePill(RpbpConfig config = {});
  std::size_t num_states() const override { return 2; }
  std::size_t num_actions() const override { return 2; }
  /// Uniform over the two worlds.
  StateId initial_state(RngStream& env_rng) override;
  EnvStep step(StateId s, ActionId a, RngStream& env_rng) override;
  const RpbpConfig& config() const noexcept { return config_; }

 private:
  RpbpConfig config_;
};

MdpModel rpbp_model(const RpbpConfig& config = {});

// ---------------------------------------------------------------------------
// Inverted pendulum
// ---------------------------------------------------------------------------

/// Angle 0 is upright. Dynamics: angle'' = (3g / 2l) sin(angle) + 3u / (m l^2),
/// integrated with semi-implicit Euler. Reward is -(angle^2 + 0.1 vel^2 +
/// 0.001 u^2) evaluated at the pre-step state.
struct PendulumConfig {
  double mass = 1.0;
  double length = 1.0;
  double gravity = 10.0;
  double timestep = 0.05;
  std::vector<double> torques{-2.0, 0.0, 2.0};
  double max_speed = 8.0;
  double angle_cost = 1.0;
  double velocity_cost = 0.1;
  double torque_cost = 0.001;
  double init_angle_low = -std::numbers::pi;
  double init_angle_high = std::numbers::pi;
  double init_velocity_low = -1.0;
  double init_velocity_high = 1.0;
  /// Steps between uniform state resets; 0 disables resets.
  std::uint64_t reset_interval = 1000;

  void validate() const;
};

struct PendulumState {
  double angle = 0.0;
  double velocity = 0.0;
};

struct PendulumTransition {
  double reward = 0.0;
  PendulumState next;
  bool terminal = false;
};

double wrap_angle(double angle);

PendulumTransition pendulum_step(const PendulumConfig& config, PendulumState state,
                                 ActionId action);

/// Rod about its pivot: 0.5 (m l^2 / 3) vel^2 + m g (l / 2) cos(angle).
double pendulum_energy(const PendulumConfig& config, PendulumState state);

class Pendulum : public ContinuousEnvironment {
 public:
  explicit Pendulum(PendulumConfig config = {});
  std::size_t state_dim() const override { return 2; }
  std::size_t num_actions() const override { return config_.torques.size(); }
  std::vector<double> reset(RngStream& env_rng) override;
  /// Continuing: every reset_interval steps the next state is redrawn from the
  /// initial-state ranges instead of following the dynamics.
  ContinuousStep step(ActionId a, RngStream& env_rng) override;

  const PendulumConfig& config() const noexcept { return config_; }
  PendulumState state() const noexcept { return state_; }
  void set_state(PendulumState s) { state_ = s; }

 private:
  PendulumState draw_initial(RngStream& env_rng) const;

  PendulumConfig config_;
  PendulumState state_;
  std::uint64_t steps_since_reset_ = 0;
};

}  // namespace redrl
