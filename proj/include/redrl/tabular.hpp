#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "redrl/core.hpp"
#include "redrl/subtask.hpp"
#include "redrl/trajectory.hpp"

namespace redrl {

enum class ScheduleKind { Constant, InverseTime };

/// Value step size alpha_n plus multipliers for the scalar estimates:
/// alpha_rbar = eta_r_bar * alpha_n, alpha_z_i = eta_z[i] * alpha_n.
struct StepSizeSchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double value = 0.1;
  double eta_r_bar = 1.0;
  std::vector<double> eta_z;

  static StepSizeSchedule constant(double alpha, double eta_r_bar, std::vector<double> eta_z = {});
  static StepSizeSchedule inverse_time(double eta_r_bar, std::vector<double> eta_z = {});

  void validate(std::size_t num_subtasks) const;
  /// n is the 1-based update count.
  double alpha(std::uint64_t n) const;
  double alpha_r_bar(std::uint64_t n) const { return eta_r_bar * alpha(n); }
  double alpha_z(std::size_t i, std::uint64_t n) const { return eta_z.at(i) * alpha(n); }
};

struct Transition {
  StateId state = 0;
  ActionId action = 0;
  double reward = 0.0;
  StateId next_state = 0;
};

/// Value table (V when num_actions == 1 and built by make_v, otherwise Q),
/// the primary estimate R-bar and the subtask estimates.
struct TabularLearnerState {
  std::size_t num_states = 0;
  std::size_t num_actions = 1;
  bool action_values = false;
  std::vector<double> values;
  double r_bar = 0.0;
  SubtaskEstimates z;
  StepSizeSchedule steps;
  std::uint64_t t = 0;

  static TabularLearnerState make_v(std::size_t num_states, StepSizeSchedule steps,
                                    SubtaskEstimates z0 = {}, double r_bar0 = 0.0);
  static TabularLearnerState make_q(std::size_t num_states, std::size_t num_actions,
                                    StepSizeSchedule steps, SubtaskEstimates z0 = {},
                                    double r_bar0 = 0.0);

  double& v(StateId s) { return values.at(s); }
  double v(StateId s) const { return values.at(s); }
  double& q(StateId s, ActionId a) { return values.at(s * num_actions + a); }
  double q(StateId s, ActionId a) const { return values.at(s * num_actions + a); }
  std::span<const double> q_row(StateId s) const {
    return std::span<const double>(values).subspan(s * num_actions, num_actions);
  }
  double max_q(StateId s) const;
  /// argmax_a Q(s, a) per state, lowest index on ties.
  std::vector<ActionId> greedy_policy() const;
};

struct StepOutcome {
  double delta = 0.0;
  double extended_reward = 0.0;
  std::vector<double> betas;
};

/// delta = r - R-bar + V(s') - V(s); V(s) += alpha rho delta; R-bar += alpha_rbar rho delta.
double differential_td_step(TabularLearnerState& state, const Transition& tr, double rho);

/// delta = r - R-bar + max_a Q(s', a) - Q(s, a); Q(s, a) += alpha delta;
/// R-bar += eta alpha delta.
double differential_q_step(TabularLearnerState& state, const Transition& tr);

/// RED TD-learning step. Extended reward, TD error and every beta_i are
/// computed from the pre-update estimates; V, R-bar and each Z_i then move
/// by their step size times rho times their error.
StepOutcome red_td_step(TabularLearnerState& state, const SubtaskFunction& f,
                        const Transition& tr, double rho);

/// RED Q-learning step: as red_td_step with a max_a Q(s', a) bootstrap and no rho.
StepOutcome red_q_step(TabularLearnerState& state, const SubtaskFunction& f,
                       const Transition& tr);

enum class TabularLearnerKind { DifferentialTd, DifferentialQ, RedTd, RedQ };

struct TabularRunSpec {
  TabularLearnerKind kind = TabularLearnerKind::DifferentialQ;
  std::uint64_t steps = 1;
  /// Exploration for the control learners (epsilon-greedy on Q).
  double epsilon = 0.1;
  /// Prediction learners: target pi and behaviour b. Behaviour defaults to target.
  std::optional<DiscretePolicy> target;
  std::optional<DiscretePolicy> behavior;
  /// Required for RedTd / RedQ.
  std::optional<SubtaskFunction> subtask_function;
  /// Abort once any estimate exceeds this magnitude.
  double divergence_limit = 1e6;
  /// Starting state; drawn from the environment when unset.
  std::optional<StateId> initial_state;
};

struct TabularRunOutput {
  Trajectory trajectory;
  TabularLearnerState final_state;
};

/// Runs the interaction loop. Environment draws come from the "env" stream of
/// seed and action selection from the "policy" stream, so the same (spec,
/// learner, seed) always reproduces the same trajectory. Throws
/// DivergedError carrying the step index when an estimate stops being finite
/// or exceeds divergence_limit.
TabularRunOutput run_loop(DiscreteEnvironment& env, TabularLearnerState learner,
                          const TabularRunSpec& spec, std::uint64_t seed);

}  // namespace redrl
