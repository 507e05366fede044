#pragma once

#include <cstdint>
#include <vector>

namespace redrl {

/// Per-step record of one run. Index t holds the reward received on step t
/// and the estimates after that step's update.
struct Trajectory {
  std::vector<double> reward;
  /// R-bar, or the CVaR estimate for the CVaR learners.
  std::vector<double> primary_estimate;
  /// subtask_estimates[i][t]; for the CVaR learners i = 0 is the VaR.
  std::vector<std::vector<double>> subtask_estimates;
  /// Discrete state the step started from; -1 for continuous environments.
  std::vector<std::int64_t> state;
  std::vector<std::int64_t> action;

  std::size_t size() const noexcept { return reward.size(); }

  void reserve(std::size_t steps, std::size_t num_subtasks) {
    reward.reserve(steps);
    primary_estimate.reserve(steps);
    subtask_estimates.assign(num_subtasks, {});
    for (auto& z : subtask_estimates) z.reserve(steps);
    state.reserve(steps);
    action.reserve(steps);
  }

  bool operator==(const Trajectory&) const = default;
};

}  // namespace redrl
