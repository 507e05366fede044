#include "redrl/environments.hpp"

#include <algorithm>
#include <cmath>

namespace redrl {

void RpbpConfig::validate() const {
  if (!(red_stdev > 0.0 && blue_low_stdev > 0.0 && blue_high_stdev > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "RPBP standard deviations must be positive");
  }
  if (!(mix_coefficient >= 0.0 && mix_coefficient <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "RPBP mix coefficient must lie in [0, 1]");
  }
}

RewardDistribution RpbpConfig::red_distribution() const {
  return RewardDistribution::gaussian(red_mean, red_stdev).with_cap(reward_cap);
}

RewardDistribution RpbpConfig::blue_distribution() const {
  return RewardDistribution::mixture(
             {RewardComponent{ComponentKind::Gaussian, mix_coefficient, blue_low_mean,
                              blue_low_stdev},
              RewardComponent{ComponentKind::Gaussian, 1.0 - mix_coefficient, blue_high_mean,
                              blue_high_stdev}})
      .with_cap(reward_cap);
}

RedPillBluePill::RedPillBluePill(RpbpConfig config) : config_(config) { config_.validate(); }

StateId RedPillBluePill::initial_state(RngStream& env_rng) { return env_rng.uniform_index(2); }

EnvStep RedPillBluePill::step(StateId s, ActionId a, RngStream& env_rng) {
  if (s > 1 || a > 1) throw Error(ErrorCode::InvalidInput, "RPBP state or action out of range");
  EnvStep out;
  out.next_state = a == rpbp::kRedPill ? rpbp::kRedWorld : rpbp::kBlueWorld;
  double reward;
  if (s == rpbp::kRedWorld) {
    reward = env_rng.normal(config_.red_mean, config_.red_stdev);
  } else if (env_rng.uniform() < config_.mix_coefficient) {
    reward = env_rng.normal(config_.blue_low_mean, config_.blue_low_stdev);
  } else {
    reward = env_rng.normal(config_.blue_high_mean, config_.blue_high_stdev);
  }
  out.reward = std::min(config_.reward_cap, reward);
  return out;
}

MdpModel rpbp_model(const RpbpConfig& config) {
  config.validate();
  MdpModel m;
  m.state_names = {"redworld", "blueworld"};
  m.action_names = {"red_pill", "blue_pill"};
  const std::vector<double> to_red{1.0, 0.0}, to_blue{0.0, 1.0};
  m.transitions = {{to_red, to_blue}, {to_red, to_blue}};
  const auto red = config.red_distribution();
  const auto blue = config.blue_distribution();
  m.rewards = {{red, red}, {blue, blue}};
  m.validate();
  return m;
}

void PendulumConfig::validate() const {
  if (!(timestep > 0.0)) throw Error(ErrorCode::InvalidInput, "pendulum timestep must be > 0");
  if (torques.empty()) throw Error(ErrorCode::InvalidInput, "pendulum needs at least one torque");
  if (!(mass > 0.0 && length > 0.0 && max_speed > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "pendulum mass, length and max speed must be > 0");
  }
  if (init_angle_low > init_angle_high || init_velocity_low > init_velocity_high) {
    throw Error(ErrorCode::InvalidInput, "pendulum initial ranges are inverted");
  }
}

double wrap_angle(double angle) {
  constexpr double pi = std::numbers::pi;
  // remainder() lands in [-pi, pi] up to rounding of the 2*pi constant.
  return std::clamp(std::remainder(angle, 2.0 * pi), -pi, pi);
}

PendulumTransition pendulum_step(const PendulumConfig& config, PendulumState state,
                                 ActionId action) {
  if (action >= config.torques.size()) {
    throw Error(ErrorCode::InvalidInput, "pendulum action out of range");
  }
  const double u = config.torques[action];
  const double g = config.gravity, l = config.length, m = config.mass;
  PendulumTransition out;
  out.reward = -(config.angle_cost * state.angle * state.angle +
                 config.velocity_cost * state.velocity * state.velocity +
                 config.torque_cost * u * u);
  const double accel = 3.0 * g / (2.0 * l) * std::sin(state.angle) + 3.0 * u / (m * l * l);
  double velocity = state.velocity + accel * config.timestep;
  velocity = std::clamp(velocity, -config.max_speed, config.max_speed);
  out.next.angle = wrap_angle(state.angle + velocity * config.timestep);
  out.next.velocity = velocity;
  return out;
}

double pendulum_energy(const PendulumConfig& config, PendulumState state) {
  const double m = config.mass, l = config.length;
  return 0.5 * (m * l * l / 3.0) * state.velocity * state.velocity +
         m * config.gravity * 0.5 * l * std::cos(state.angle);
}

Pendulum::Pendulum(PendulumConfig config) : config_(std::move(config)) { config_.validate(); }

PendulumState Pendulum::draw_initial(RngStream& env_rng) const {
  PendulumState s;
  s.angle = env_rng.uniform(config_.init_angle_low, config_.init_angle_high);
  s.velocity = env_rng.uniform(config_.init_velocity_low, config_.init_velocity_high);
  return s;
}

std::vector<double> Pendulum::reset(RngStream& env_rng) {
  state_ = draw_initial(env_rng);
  steps_since_reset_ = 0;
  return {state_.angle, state_.velocity};
}

ContinuousStep Pendulum::step(ActionId a, RngStream& env_rng) {
  const auto t = pendulum_step(config_, state_, a);
  state_ = t.next;
  ++steps_since_reset_;
  if (config_.reset_interval > 0 && steps_since_reset_ >= config_.reset_interval) {
    state_ = draw_initial(env_rng);
    steps_since_reset_ = 0;
  }
  return ContinuousStep{t.reward, {state_.angle, state_.velocity}, false};
}

}  // namespace redrl
