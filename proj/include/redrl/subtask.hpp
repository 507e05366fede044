#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "redrl/core.hpp"

namespace redrl {

/// Current estimates Z_1..Z_n of the subtasks.
using SubtaskEstimates = std::vector<double>;

/// Which reward enters a segment's subtask target.
///
/// Observed uses the sampled reward. PrimaryEstimate substitutes the primary
/// estimate R-bar for it, which is correct when R-bar tracks the conditional
/// mean of the reward on that segment. The left tail of the CVaR function is
/// the case in point: there R-bar is the CVaR estimate, i.e. E[R | R < VaR].
enum class TargetReward { Observed, PrimaryEstimate };

/// One linear piece: b_r * r + b_0 + sum_i b_i * z_i.
struct Segment {
  double reward_coef = 1.0;
  double constant = 0.0;
  std::vector<double> subtask_coefs;
  TargetReward target_reward = TargetReward::Observed;
  std::string label;
};

enum class SegmentRule {
  /// Segment j covers [r_{j-1}, r_j); the last segment is closed.
  FixedBreakpoints,
  /// Two segments split at the current estimate of one subtask:
  /// segment 0 is r < Z_pivot, segment 1 is r >= Z_pivot.
  EstimateRelative,
};

/// Piecewise-linear map from an observed reward and the subtask estimates to
/// an extended reward. Must be invertible in every subtask on every segment.
struct SubtaskFunction {
  std::size_t num_subtasks = 0;
  SegmentRule rule = SegmentRule::FixedBreakpoints;
  /// m + 1 weakly increasing values for FixedBreakpoints (may be +-inf).
  std::vector<double> breakpoints;
  /// Subtask compared against for EstimateRelative.
  std::size_t pivot_subtask = 0;
  std::vector<Segment> segments;

  std::size_t num_segments() const noexcept { return segments.size(); }

  /// R-tilde = R, no subtasks.
  static SubtaskFunction identity();
  /// Single segment b_r * r + b_0 + sum_i b_i z_i.
  static SubtaskFunction linear(double reward_coef, double constant,
                                std::vector<double> subtask_coefs);
};

/// Empty when f is well formed; otherwise a human-readable list of problems.
std::vector<std::string> validate(const SubtaskFunction& f);

/// Throws ErrorCode::InvalidInput listing every violation.
void require_valid(const SubtaskFunction& f);

/// Segment containing r (0-based). Rewards at a breakpoint belong to the
/// upper segment. Fixed-breakpoint rewards outside [r_0, r_m] are clamped to
/// the nearest segment with a warning.
std::size_t segment_index(const SubtaskFunction& f, double r, std::span<const double> z);

/// Value of segment j at (r, z), regardless of which segment r falls in.
double segment_value(const Segment& segment, double r, std::span<const double> z);

double extended_reward(const SubtaskFunction& f, double r, std::span<const double> z);

/// Reward-extended TD error beta_i for subtask i.
///
/// With more than one segment: beta_i = (-1 / b_i^j) (R-tilde_j - R-bar - delta)
/// for the segment j that r falls in. A single-segment (strictly linear)
/// function uses the reduced form beta_i = (-1 / b_i) delta.
double reward_extended_td_error(const SubtaskFunction& f, std::size_t i, double r,
                                std::span<const double> z, double r_bar, double delta);

/// All n errors at once, written into out (resized).
void reward_extended_td_errors(const SubtaskFunction& f, double r, std::span<const double> z,
                               double r_bar, double delta, std::vector<double>& out);

}  // namespace redrl
