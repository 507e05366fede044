#include "redrl/cvar.hpp"

#include <cmath>

namespace redrl {

void CvarParams::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::InvalidInput, "CVaR tau must lie in (0, 1), got " + std::to_string(tau));
  }
  if (!std::isfinite(initial_var) || !std::isfinite(initial_cvar)) {
    throw Error(ErrorCode::InvalidInput, "initial VaR/CVaR must be finite");
  }
}

SubtaskFunction cvar_subtask_function(double tau) {
  CvarParams{tau}.validate();
  SubtaskFunction f;
  f.num_subtasks = 1;
  f.rule = SegmentRule::EstimateRelative;
  f.pivot_subtask = 0;

  Segment below;
  below.reward_coef = 1.0 / tau;
  below.constant = 0.0;
  below.subtask_coefs = {1.0 - 1.0 / tau};
  below.target_reward = TargetReward::PrimaryEstimate;
  below.label = "R < VaR";

  Segment above;
  above.reward_coef = 0.0;
  above.constant = 0.0;
  above.subtask_coefs = {1.0};
  above.label = "R >= VaR";

  f.segments = {below, above};
  return f;
}

double var_update(double var, double cvar, double delta, double r, double tau, double alpha_var) {
  CvarParams{tau}.validate();
  if (alpha_var < 0.0) throw Error(ErrorCode::InvalidInput, "alpha_var must be non-negative");
  if (r >= var) return var + alpha_var * (delta + cvar - var);
  return var + alpha_var * ((tau / (tau - 1.0)) * delta + cvar - var);
}

std::string_view preset_name(Preset p) {
  switch (p) {
    case Preset::DiffQ: return "diff-q";
    case Preset::RedCvarQ: return "red-cvar-q";
    case Preset::DiffAc: return "diff-ac";
    case Preset::RedCvarAc: return "red-cvar-ac";
  }
  return "unknown";
}

Preset parse_preset(std::string_view name) {
  if (name == "diff-q") return Preset::DiffQ;
  if (name == "red-cvar-q") return Preset::RedCvarQ;
  if (name == "diff-ac") return Preset::DiffAc;
  if (name == "red-cvar-ac") return Preset::RedCvarAc;
  throw Error(ErrorCode::InvalidInput, "unknown algorithm preset '" + std::string(name) + "'");
}

bool preset_is_cvar(Preset p) { return p == Preset::RedCvarQ || p == Preset::RedCvarAc; }

bool preset_is_tabular(Preset p) { return p == Preset::DiffQ || p == Preset::RedCvarQ; }

}  // namespace redrl
