#pragma once

#include <optional>

#include "redrl/cvar.hpp"
#include "redrl/linear.hpp"
#include "redrl/tabular.hpp"

namespace redrl {

/// A learner ready for run_loop: kind, initial state and subtask function.
struct TabularSetup {
  TabularLearnerKind kind = TabularLearnerKind::DifferentialQ;
  TabularLearnerState learner;
  std::optional<SubtaskFunction> subtask_function;
};

/// Ready for run_actor_critic. An empty subtask function means Differential.
struct LinearSetup {
  LinearLearnerState learner;
  std::optional<SubtaskFunction> subtask_function;
};

TabularSetup diff_q_preset(std::size_t num_states, std::size_t num_actions,
                           StepSizeSchedule steps, double initial_r_bar = 0.0);

/// RED Q-learning on cvar_subtask_function(tau). The CVaR estimate occupies
/// r_bar (step eta_cvar alpha) and the VaR is the single subtask (step
/// eta_var alpha).
TabularSetup red_cvar_q_preset(std::size_t num_states, std::size_t num_actions,
                               const CvarParams& params, ScheduleKind kind, double alpha,
                               double eta_cvar, double eta_var);

LinearSetup diff_ac_preset(std::size_t num_features, std::size_t num_actions, double alpha,
                           double eta_pi, double eta_r_bar, double initial_r_bar = 0.0);

LinearSetup red_cvar_ac_preset(std::size_t num_features, std::size_t num_actions,
                               const CvarParams& params, double alpha, double eta_pi,
                               double eta_cvar, double eta_var);

}  // namespace redrl
