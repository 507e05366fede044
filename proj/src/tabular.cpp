#include "redrl/tabular.hpp"

#include <algorithm>
#include <cmath>

namespace redrl {

StepSizeSchedule StepSizeSchedule::constant(double alpha, double eta_r_bar,
                                            std::vector<double> eta_z) {
  return StepSizeSchedule{ScheduleKind::Constant, alpha, eta_r_bar, std::move(eta_z)};
}

StepSizeSchedule StepSizeSchedule::inverse_time(double eta_r_bar, std::vector<double> eta_z) {
  return StepSizeSchedule{ScheduleKind::InverseTime, 1.0, eta_r_bar, std::move(eta_z)};
}

void StepSizeSchedule::validate(std::size_t num_subtasks) const {
  if (kind == ScheduleKind::Constant && !(value > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "constant step size must be > 0");
  }
  if (!(eta_r_bar > 0.0)) throw Error(ErrorCode::InvalidInput, "eta for R-bar must be > 0");
  if (eta_z.size() != num_subtasks) {
    throw Error(ErrorCode::InvalidInput, "need one eta per subtask (" +
                                             std::to_string(num_subtasks) + "), got " +
                                             std::to_string(eta_z.size()));
  }
  for (double eta : eta_z) {
    if (!(eta > 0.0)) throw Error(ErrorCode::InvalidInput, "subtask eta must be > 0");
  }
}

double StepSizeSchedule::alpha(std::uint64_t n) const {
  if (kind == ScheduleKind::Constant) return value;
  return 1.0 / static_cast<double>(std::max<std::uint64_t>(n, 1));
}

TabularLearnerState TabularLearnerState::make_v(std::size_t num_states, StepSizeSchedule steps,
                                                SubtaskEstimates z0, double r_bar0) {
  steps.validate(z0.size());
  TabularLearnerState s;
  s.num_states = num_states;
  s.num_actions = 1;
  s.action_values = false;
  s.values.assign(num_states, 0.0);
  s.r_bar = r_bar0;
  s.z = std::move(z0);
  s.steps = std::move(steps);
  return s;
}

TabularLearnerState TabularLearnerState::make_q(std::size_t num_states, std::size_t num_actions,
                                                StepSizeSchedule steps, SubtaskEstimates z0,
                                                double r_bar0) {
  steps.validate(z0.size());
  TabularLearnerState s;
  s.num_states = num_states;
  s.num_actions = num_actions;
  s.action_values = true;
  s.values.assign(num_states * num_actions, 0.0);
  s.r_bar = r_bar0;
  s.z = std::move(z0);
  s.steps = std::move(steps);
  return s;
}

double TabularLearnerState::max_q(StateId s) const {
  const auto row = q_row(s);
  return *std::max_element(row.begin(), row.end());
}

std::vector<ActionId> TabularLearnerState::greedy_policy() const {
  std::vector<ActionId> out(num_states);
  for (StateId s = 0; s < num_states; ++s) out[s] = argmax(q_row(s));
  return out;
}

namespace {

void check_indices(const TabularLearnerState& st, const Transition& tr) {
  if (tr.state >= st.num_states || tr.next_state >= st.num_states ||
      (st.action_values && tr.action >= st.num_actions)) {
    throw Error(ErrorCode::InvalidInput, "transition index out of range");
  }
}

void apply_subtask_updates(TabularLearnerState& st, const SubtaskFunction& f, double r,
                           double r_bar_before, double delta, double rho, std::uint64_t n,
                           StepOutcome& out) {
  reward_extended_td_errors(f, r, st.z, r_bar_before, delta, out.betas);
  for (std::size_t i = 0; i < out.betas.size(); ++i) {
    st.z[i] += st.steps.alpha_z(i, n) * rho * out.betas[i];
  }
}

}  // namespace

double differential_td_step(TabularLearnerState& st, const Transition& tr, double rho) {
  check_indices(st, tr);
  const std::uint64_t n = ++st.t;
  const double delta = tr.reward - st.r_bar + st.v(tr.next_state) - st.v(tr.state);
  st.v(tr.state) += st.steps.alpha(n) * rho * delta;
  st.r_bar += st.steps.alpha_r_bar(n) * rho * delta;
  return delta;
}

double differential_q_step(TabularLearnerState& st, const Transition& tr) {
  check_indices(st, tr);
  const std::uint64_t n = ++st.t;
  const double delta = tr.reward - st.r_bar + st.max_q(tr.next_state) - st.q(tr.state, tr.action);
  st.q(tr.state, tr.action) += st.steps.alpha(n) * delta;
  st.r_bar += st.steps.alpha_r_bar(n) * delta;
  return delta;
}

StepOutcome red_td_step(TabularLearnerState& st, const SubtaskFunction& f, const Transition& tr,
                        double rho) {
  check_indices(st, tr);
  StepOutcome out;
  const std::uint64_t n = ++st.t;
  out.extended_reward = extended_reward(f, tr.reward, st.z);
  out.delta = out.extended_reward - st.r_bar + st.v(tr.next_state) - st.v(tr.state);
  const double r_bar_before = st.r_bar;
  st.v(tr.state) += st.steps.alpha(n) * rho * out.delta;
  st.r_bar += st.steps.alpha_r_bar(n) * rho * out.delta;
  apply_subtask_updates(st, f, tr.reward, r_bar_before, out.delta, rho, n, out);
  return out;
}

StepOutcome red_q_step(TabularLearnerState& st, const SubtaskFunction& f, const Transition& tr) {
  check_indices(st, tr);
  StepOutcome out;
  const std::uint64_t n = ++st.t;
  out.extended_reward = extended_reward(f, tr.reward, st.z);
  out.delta =
      out.extended_reward - st.r_bar + st.max_q(tr.next_state) - st.q(tr.state, tr.action);
  const double r_bar_before = st.r_bar;
  st.q(tr.state, tr.action) += st.steps.alpha(n) * out.delta;
  st.r_bar += st.steps.alpha_r_bar(n) * out.delta;
  apply_subtask_updates(st, f, tr.reward, r_bar_before, out.delta, 1.0, n, out);
  return out;
}

namespace {

bool within(double x, double limit) { return std::isfinite(x) && std::abs(x) <= limit; }

}  // namespace

TabularRunOutput run_loop(DiscreteEnvironment& env, TabularLearnerState learner,
                          const TabularRunSpec& spec, std::uint64_t seed) {
  if (spec.steps < 1) throw Error(ErrorCode::InvalidInput, "run_loop needs steps >= 1");
  const bool control =
      spec.kind == TabularLearnerKind::DifferentialQ || spec.kind == TabularLearnerKind::RedQ;
  const bool red = spec.kind == TabularLearnerKind::RedTd || spec.kind == TabularLearnerKind::RedQ;
  if (learner.num_states != env.num_states()) {
    throw Error(ErrorCode::InvalidInput, "learner and environment disagree on the state count");
  }
  if (control != learner.action_values ||
      (control && learner.num_actions != env.num_actions())) {
    throw Error(ErrorCode::InvalidInput, "learner table shape does not fit the learner kind");
  }
  if (red) {
    if (!spec.subtask_function) {
      throw Error(ErrorCode::InvalidInput, "RED learners need a subtask function");
    }
    require_valid(*spec.subtask_function);
    if (spec.subtask_function->num_subtasks != learner.z.size()) {
      throw Error(ErrorCode::InvalidInput, "subtask count does not match the learner estimates");
    }
  }
  if (!control && !spec.target) {
    throw Error(ErrorCode::InvalidInput, "prediction learners need a target policy");
  }
  const DiscretePolicy* target = spec.target ? &*spec.target : nullptr;
  const DiscretePolicy* behavior = spec.behavior ? &*spec.behavior : target;

  RngStream env_rng(seed, "env");
  RngStream policy_rng(seed, "policy");

  TabularRunOutput out;
  Trajectory& traj = out.trajectory;
  traj.reserve(spec.steps, learner.z.size());

  StateId s = spec.initial_state ? *spec.initial_state : env.initial_state(env_rng);
  for (std::uint64_t step = 0; step < spec.steps; ++step) {
    ActionId a;
    double rho = 1.0;
    if (control) {
      a = epsilon_greedy_select(learner.q_row(s), spec.epsilon, policy_rng);
    } else {
      a = behavior->sample(s, policy_rng);
      rho = importance_ratio(*target, *behavior, s, a);
    }
    const EnvStep es = env.step(s, a, env_rng);
    const Transition tr{s, a, es.reward, es.next_state};
    switch (spec.kind) {
      case TabularLearnerKind::DifferentialTd: differential_td_step(learner, tr, rho); break;
      case TabularLearnerKind::DifferentialQ: differential_q_step(learner, tr); break;
      case TabularLearnerKind::RedTd: red_td_step(learner, *spec.subtask_function, tr, rho); break;
      case TabularLearnerKind::RedQ: red_q_step(learner, *spec.subtask_function, tr); break;
    }

    const double touched = control ? learner.q(s, a) : learner.v(s);
    bool ok = within(touched, spec.divergence_limit) && within(learner.r_bar, spec.divergence_limit);
    for (double z : learner.z) ok = ok && within(z, spec.divergence_limit);
    if (!ok) {
      throw DivergedError(step, "tabular learner diverged at step " + std::to_string(step));
    }

    traj.reward.push_back(es.reward);
    traj.primary_estimate.push_back(learner.r_bar);
    for (std::size_t i = 0; i < learner.z.size(); ++i) {
      traj.subtask_estimates[i].push_back(learner.z[i]);
    }
    traj.state.push_back(static_cast<std::int64_t>(s));
    traj.action.push_back(static_cast<std::int64_t>(a));
    s = es.next_state;
  }
  out.final_state = std::move(learner);
  return out;
}

}  // namespace redrl
