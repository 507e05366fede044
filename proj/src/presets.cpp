#include "redrl/presets.hpp"

namespace redrl {

TabularSetup diff_q_preset(std::size_t num_states, std::size_t num_actions,
                           StepSizeSchedule steps, double initial_r_bar) {
  steps.eta_z.clear();
  return TabularSetup{TabularLearnerKind::DifferentialQ,
                      TabularLearnerState::make_q(num_states, num_actions, std::move(steps), {},
                                                  initial_r_bar),
                      std::nullopt};
}

TabularSetup red_cvar_q_preset(std::size_t num_states, std::size_t num_actions,
                               const CvarParams& params, ScheduleKind kind, double alpha,
                               double eta_cvar, double eta_var) {
  params.validate();
  StepSizeSchedule steps{kind, kind == ScheduleKind::Constant ? alpha : 1.0, eta_cvar, {eta_var}};
  return TabularSetup{TabularLearnerKind::RedQ,
                      TabularLearnerState::make_q(num_states, num_actions, std::move(steps),
                                                  {params.initial_var}, params.initial_cvar),
                      cvar_subtask_function(params.tau)};
}

LinearSetup diff_ac_preset(std::size_t num_features, std::size_t num_actions, double alpha,
                           double eta_pi, double eta_r_bar, double initial_r_bar) {
  LinearStepSizes steps{ScheduleKind::Constant, alpha, eta_pi, eta_r_bar, {}};
  return LinearSetup{
      LinearLearnerState::make(num_features, num_actions, std::move(steps), {}, initial_r_bar),
      std::nullopt};
}

LinearSetup red_cvar_ac_preset(std::size_t num_features, std::size_t num_actions,
                               const CvarParams& params, double alpha, double eta_pi,
                               double eta_cvar, double eta_var) {
  params.validate();
  LinearStepSizes steps{ScheduleKind::Constant, alpha, eta_pi, eta_cvar, {eta_var}};
  return LinearSetup{LinearLearnerState::make(num_features, num_actions, std::move(steps),
                                              {params.initial_var}, params.initial_cvar),
                     cvar_subtask_function(params.tau)};
}

}  // namespace redrl
