#pragma once

#include <string>
#include <string_view>

#include "redrl/subtask.hpp"

namespace redrl {

/// Lower-tail CVaR parameters. tau is the tail fraction.
struct CvarParams {
  double tau = 0.25;
  double initial_var = 0.0;
  double initial_cvar = 0.0;

  void validate() const;
};

/// R-tilde = VaR - (1/tau) max(VaR - R, 0) with VaR as the single subtask.
///
/// Segment 0 (R < VaR): b_r = 1/tau, b_VaR = 1 - 1/tau, target uses the CVaR
/// estimate in place of R. Segment 1 (R >= VaR): b_r = 0, b_VaR = 1.
///
/// The CDF of the reward is assumed continuous at the VaR; Gaussian rewards
/// satisfy this. It is not checked.
SubtaskFunction cvar_subtask_function(double tau);

/// VaR step: var + alpha (delta + cvar - var) when r >= var, otherwise
/// var + alpha ((tau / (tau - 1)) delta + cvar - var).
double var_update(double var, double cvar, double delta, double r, double tau, double alpha_var);

/// Learner presets addressable by name from configs and the CLI.
enum class Preset { DiffQ, RedCvarQ, DiffAc, RedCvarAc };

std::string_view preset_name(Preset p);
Preset parse_preset(std::string_view name);
bool preset_is_cvar(Preset p);
bool preset_is_tabular(Preset p);

}  // namespace redrl
