#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "redrl/core.hpp"
#include "redrl/subtask.hpp"
#include "redrl/tabular.hpp"
#include "redrl/trajectory.hpp"

namespace redrl {

/// Grid tile coder with uniformly offset tilings: tiling k is shifted by
/// k / num_tilings of a tile width along every dimension. States outside the
/// bounds are clamped onto them; each tiling contributes exactly one active
/// binary feature.
class TileCoder {
 public:
  TileCoder(std::size_t num_tilings, std::vector<std::size_t> tiles_per_dim,
            std::vector<double> lows, std::vector<double> highs);

  std::size_t num_tilings() const noexcept { return num_tilings_; }
  std::size_t dims() const noexcept { return tiles_.size(); }
  std::size_t tiles_per_tiling() const noexcept { return tiles_per_tiling_; }
  std::size_t num_features() const noexcept { return num_tilings_ * tiles_per_tiling_; }

  /// Writes num_tilings() indices, tiling k's index in [k T, (k + 1) T).
  void active_features(std::span<const double> state, std::vector<std::size_t>& out) const;
  std::vector<std::size_t> active_features(std::span<const double> state) const;

 private:
  std::size_t num_tilings_;
  std::vector<std::size_t> tiles_;
  std::vector<double> lows_, highs_, widths_;
  std::size_t tiles_per_tiling_;
};

/// The pendulum coder: 32 tilings of 8 x 8 over angle [-pi, pi] and angular
/// velocity [-8, 8].
TileCoder pendulum_tile_coder();

/// Sum of w over the active indices (binary features).
double linear_value(std::span<const double> w, std::span<const std::size_t> features);

/// Step sizes for the actor-critic learners. Policy, R-bar and subtask step
/// sizes are eta multiples of the value step size.
struct LinearStepSizes {
  ScheduleKind kind = ScheduleKind::Constant;
  double alpha = 2e-3;
  double eta_pi = 1.0;
  double eta_r_bar = 1e-2;
  std::vector<double> eta_z;

  void validate(std::size_t num_subtasks) const;
  double value_alpha(std::uint64_t n) const;
};

/// Critic weights w (one per feature) and actor weights theta (one block of
/// num_features per action; preference h(s, a) = sum of block a over x(s)).
struct LinearLearnerState {
  std::size_t num_features = 0;
  std::size_t num_actions = 0;
  std::vector<double> w;
  std::vector<double> theta;
  double r_bar = 0.0;
  SubtaskEstimates z;
  LinearStepSizes steps;
  std::uint64_t t = 0;

  static LinearLearnerState make(std::size_t num_features, std::size_t num_actions,
                                 LinearStepSizes steps, SubtaskEstimates z0 = {},
                                 double r_bar0 = 0.0);

  std::vector<double> preferences(std::span<const std::size_t> features) const;
  std::vector<double> policy(std::span<const std::size_t> features) const;
};

struct LinearTransition {
  std::span<const std::size_t> features;
  ActionId action = 0;
  double reward = 0.0;
  std::span<const std::size_t> next_features;
};

/// grad ln pi(a | s) restricted to the active features: entry u is the
/// coefficient (1{u == a} - pi(u | s)) applied to every active index of
/// action block u.
std::vector<double> log_policy_gradient_coefficients(std::span<const double> probabilities,
                                                     ActionId action);

/// One actor-critic update. With f empty this is the Differential
/// actor-critic; otherwise R-tilde = f(R, Z) and every Z_i moves by
/// eta_z[i] alpha beta_i (the VaR step of the CVaR function).
/// delta = R-tilde - R-bar + v(s') - v(s); w += alpha delta x(s);
/// theta += eta_pi alpha delta grad ln pi(A | S); R-bar += eta_r_bar alpha delta.
StepOutcome actor_critic_step(LinearLearnerState& state, const SubtaskFunction* f,
                              const LinearTransition& tr);

struct ActorCriticRunSpec {
  std::uint64_t steps = 1;
  std::optional<SubtaskFunction> subtask_function;
  /// When false the weights never move, so theta = 0 gives a uniform policy.
  bool learn = true;
  double divergence_limit = 1e6;
};

struct ActorCriticRunOutput {
  Trajectory trajectory;
  LinearLearnerState final_state;
};

/// Interaction loop for the actor-critic learners with the same stream
/// discipline as run_loop ("env" for the environment, "policy" for action
/// sampling).
ActorCriticRunOutput run_actor_critic(ContinuousEnvironment& env, const TileCoder& coder,
                                      LinearLearnerState learner, const ActorCriticRunSpec& spec,
                                      std::uint64_t seed);

}  // namespace redrl
