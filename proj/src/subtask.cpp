#include "redrl/subtask.hpp"

#include <cmath>
#include <sstream>

namespace redrl {

SubtaskFunction SubtaskFunction::identity() { return linear(1.0, 0.0, {}); }

SubtaskFunction SubtaskFunction::linear(double reward_coef, double constant,
                                        std::vector<double> subtask_coefs) {
  SubtaskFunction f;
  f.num_subtasks = subtask_coefs.size();
  f.rule = SegmentRule::FixedBreakpoints;
  f.breakpoints = {-INFINITY, INFINITY};
  Segment seg;
  seg.reward_coef = reward_coef;
  seg.constant = constant;
  seg.subtask_coefs = std::move(subtask_coefs);
  seg.label = "linear";
  f.segments.push_back(std::move(seg));
  return f;
}

std::vector<std::string> validate(const SubtaskFunction& f) {
  std::vector<std::string> problems;
  if (f.segments.empty()) {
    problems.emplace_back("no segments");
    return problems;
  }
  for (std::size_t j = 0; j < f.segments.size(); ++j) {
    const Segment& seg = f.segments[j];
    if (seg.subtask_coefs.size() != f.num_subtasks) {
      problems.push_back("segment " + std::to_string(j + 1) + " has " +
                         std::to_string(seg.subtask_coefs.size()) + " subtask coefficients, expected " +
                         std::to_string(f.num_subtasks));
      continue;
    }
    if (!std::isfinite(seg.reward_coef) || !std::isfinite(seg.constant)) {
      problems.push_back("segment " + std::to_string(j + 1) + " has a non-finite coefficient");
    }
    for (std::size_t i = 0; i < f.num_subtasks; ++i) {
      const double b = seg.subtask_coefs[i];
      if (b == 0.0 || !std::isfinite(b)) {
        problems.push_back("non-invertible in subtask " + std::to_string(i + 1) + " (segment " +
                           std::to_string(j + 1) + ")");
      }
    }
  }
  switch (f.rule) {
    case SegmentRule::FixedBreakpoints: {
      if (f.breakpoints.size() != f.segments.size() + 1) {
        problems.push_back("expected " + std::to_string(f.segments.size() + 1) +
                           " breakpoints, got " + std::to_string(f.breakpoints.size()));
        break;
      }
      for (std::size_t k = 1; k < f.breakpoints.size(); ++k) {
        if (std::isnan(f.breakpoints[k]) || std::isnan(f.breakpoints[k - 1]) ||
            f.breakpoints[k] < f.breakpoints[k - 1]) {
          problems.emplace_back("breakpoints not ordered");
          break;
        }
      }
      break;
    }
    case SegmentRule::EstimateRelative:
      if (f.segments.size() != 2) {
        problems.emplace_back("estimate-relative rule needs exactly two segments");
      }
      if (f.pivot_subtask >= f.num_subtasks) {
        problems.emplace_back("pivot subtask out of range");
      }
      break;
  }
  return problems;
}

void require_valid(const SubtaskFunction& f) {
  const auto problems = validate(f);
  if (problems.empty()) return;
  std::ostringstream msg;
  msg << "invalid subtask function:";
  for (const auto& p : problems) msg << ' ' << p << ';';
  throw Error(ErrorCode::InvalidInput, msg.str());
}

std::size_t segment_index(const SubtaskFunction& f, double r, std::span<const double> z) {
  if (z.size() != f.num_subtasks) {
    throw Error(ErrorCode::InvalidInput, "subtask estimate count does not match the function");
  }
  if (f.segments.empty()) throw Error(ErrorCode::InvalidInput, "subtask function has no segments");
  if (f.rule == SegmentRule::EstimateRelative) {
    return r < z[f.pivot_subtask] ? 0 : 1;
  }
  const auto& bp = f.breakpoints;
  const std::size_t m = f.segments.size();
  if (bp.size() != m + 1) throw Error(ErrorCode::InvalidInput, "breakpoint count mismatch");
  if (r < bp.front()) {
    log_warning("reward " + std::to_string(r) + " below the first breakpoint; clamped");
    return 0;
  }
  if (r > bp.back()) {
    log_warning("reward " + std::to_string(r) + " above the last breakpoint; clamped");
    return m - 1;
  }
  // Upper-segment convention at interior breakpoints; last segment closed.
  for (std::size_t j = m; j-- > 1;) {
    if (r >= bp[j]) return j;
  }
  return 0;
}

double segment_value(const Segment& segment, double r, std::span<const double> z) {
  double value = segment.reward_coef * r + segment.constant;
  for (std::size_t i = 0; i < segment.subtask_coefs.size(); ++i) {
    value += segment.subtask_coefs[i] * z[i];
  }
  return value;
}

double extended_reward(const SubtaskFunction& f, double r, std::span<const double> z) {
  return segment_value(f.segments[segment_index(f, r, z)], r, z);
}

namespace {

double beta_on_segment(const SubtaskFunction& f, const Segment& seg, std::size_t i, double r,
                       std::span<const double> z, double r_bar, double delta) {
  const double b = seg.subtask_coefs[i];
  if (f.segments.size() == 1) return (-1.0 / b) * delta;
  const double target_reward = seg.target_reward == TargetReward::Observed ? r : r_bar;
  return (-1.0 / b) * (segment_value(seg, target_reward, z) - r_bar - delta);
}

}  // namespace

double reward_extended_td_error(const SubtaskFunction& f, std::size_t i, double r,
                                std::span<const double> z, double r_bar, double delta) {
  if (i >= f.num_subtasks) throw Error(ErrorCode::InvalidInput, "subtask index out of range");
  const Segment& seg = f.segments[segment_index(f, r, z)];
  return beta_on_segment(f, seg, i, r, z, r_bar, delta);
}

void reward_extended_td_errors(const SubtaskFunction& f, double r, std::span<const double> z,
                               double r_bar, double delta, std::vector<double>& out) {
  out.resize(f.num_subtasks);
  if (f.num_subtasks == 0) return;
  const Segment& seg = f.segments[segment_index(f, r, z)];
  for (std::size_t i = 0; i < f.num_subtasks; ++i) {
    out[i] = beta_on_segment(f, seg, i, r, z, r_bar, delta);
  }
}

}  // namespace redrl
