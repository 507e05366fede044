#include "redrl/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace redrl {

TileCoder::TileCoder(std::size_t num_tilings, std::vector<std::size_t> tiles_per_dim,
                     std::vector<double> lows, std::vector<double> highs)
    : num_tilings_(num_tilings),
      tiles_(std::move(tiles_per_dim)),
      lows_(std::move(lows)),
      highs_(std::move(highs)),
      tiles_per_tiling_(1) {
  if (num_tilings_ == 0 || tiles_.empty()) {
    throw Error(ErrorCode::InvalidInput, "tile coder needs tilings and dimensions");
  }
  if (lows_.size() != tiles_.size() || highs_.size() != tiles_.size()) {
    throw Error(ErrorCode::InvalidInput, "tile coder bounds do not match the dimension count");
  }
  widths_.resize(tiles_.size());
  for (std::size_t d = 0; d < tiles_.size(); ++d) {
    if (tiles_[d] == 0 || !(highs_[d] > lows_[d])) {
      throw Error(ErrorCode::InvalidInput, "tile coder dimension " + std::to_string(d) +
                                               " has no tiles or an empty range");
    }
    widths_[d] = (highs_[d] - lows_[d]) / static_cast<double>(tiles_[d]);
    tiles_per_tiling_ *= tiles_[d];
  }
}

void TileCoder::active_features(std::span<const double> state,
                                std::vector<std::size_t>& out) const {
  if (state.size() != tiles_.size()) {
    throw Error(ErrorCode::InvalidInput, "state has " + std::to_string(state.size()) +
                                             " components, tile coder expects " +
                                             std::to_string(tiles_.size()));
  }
  out.resize(num_tilings_);
  const double tilings = static_cast<double>(num_tilings_);
  for (std::size_t k = 0; k < num_tilings_; ++k) {
    const double offset = static_cast<double>(k) / tilings;
    std::size_t flat = 0;
    for (std::size_t d = 0; d < tiles_.size(); ++d) {
      const double x = std::clamp(state[d], lows_[d], highs_[d]);
      const double pos = (x - lows_[d]) / widths_[d] + offset;
      const auto cell = std::min(static_cast<std::size_t>(pos), tiles_[d] - 1);
      flat = flat * tiles_[d] + cell;
    }
    out[k] = k * tiles_per_tiling_ + flat;
  }
}

std::vector<std::size_t> TileCoder::active_features(std::span<const double> state) const {
  std::vector<std::size_t> out;
  active_features(state, out);
  return out;
}

TileCoder pendulum_tile_coder() {
  return TileCoder(32, {8, 8}, {-std::numbers::pi, -8.0}, {std::numbers::pi, 8.0});
}

double linear_value(std::span<const double> w, std::span<const std::size_t> features) {
  double v = 0.0;
  for (std::size_t j : features) {
    if (j >= w.size()) throw Error(ErrorCode::InvalidInput, "feature index out of range");
    v += w[j];
  }
  return v;
}

void LinearStepSizes::validate(std::size_t num_subtasks) const {
  if (kind == ScheduleKind::Constant && !(alpha > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "value step size must be > 0");
  }
  if (!(eta_pi > 0.0) || !(eta_r_bar > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "policy and R-bar etas must be > 0");
  }
  if (eta_z.size() != num_subtasks) {
    throw Error(ErrorCode::InvalidInput, "need one eta per subtask");
  }
  for (double eta : eta_z) {
    if (!(eta > 0.0)) throw Error(ErrorCode::InvalidInput, "subtask eta must be > 0");
  }
}

double LinearStepSizes::value_alpha(std::uint64_t n) const {
  if (kind == ScheduleKind::Constant) return alpha;
  return 1.0 / static_cast<double>(std::max<std::uint64_t>(n, 1));
}

LinearLearnerState LinearLearnerState::make(std::size_t num_features, std::size_t num_actions,
                                            LinearStepSizes steps, SubtaskEstimates z0,
                                            double r_bar0) {
  if (num_features == 0 || num_actions == 0) {
    throw Error(ErrorCode::InvalidInput, "linear learner needs features and actions");
  }
  steps.validate(z0.size());
  LinearLearnerState s;
  s.num_features = num_features;
  s.num_actions = num_actions;
  s.w.assign(num_features, 0.0);
  s.theta.assign(num_features * num_actions, 0.0);
  s.r_bar = r_bar0;
  s.z = std::move(z0);
  s.steps = std::move(steps);
  return s;
}

std::vector<double> LinearLearnerState::preferences(std::span<const std::size_t> features) const {
  std::vector<double> h(num_actions, 0.0);
  for (std::size_t a = 0; a < num_actions; ++a) {
    const std::span<const double> block =
        std::span<const double>(theta).subspan(a * num_features, num_features);
    h[a] = linear_value(block, features);
  }
  return h;
}

std::vector<double> LinearLearnerState::policy(std::span<const std::size_t> features) const {
  return softmax_probabilities(preferences(features));
}

std::vector<double> log_policy_gradient_coefficients(std::span<const double> probabilities,
                                                     ActionId action) {
  if (action >= probabilities.size()) throw Error(ErrorCode::InvalidInput, "action out of range");
  std::vector<double> coef(probabilities.size());
  for (std::size_t u = 0; u < probabilities.size(); ++u) {
    coef[u] = (u == action ? 1.0 : 0.0) - probabilities[u];
  }
  return coef;
}

StepOutcome actor_critic_step(LinearLearnerState& st, const SubtaskFunction* f,
                              const LinearTransition& tr) {
  if (tr.action >= st.num_actions) throw Error(ErrorCode::InvalidInput, "action out of range");
  StepOutcome out;
  const std::uint64_t n = ++st.t;
  const double alpha = st.steps.value_alpha(n);

  out.extended_reward = f ? extended_reward(*f, tr.reward, st.z) : tr.reward;
  out.delta = out.extended_reward - st.r_bar + linear_value(st.w, tr.next_features) -
              linear_value(st.w, tr.features);

  const auto probs = st.policy(tr.features);
  const auto coef = log_policy_gradient_coefficients(probs, tr.action);

  const double critic_step = alpha * out.delta;
  for (std::size_t j : tr.features) st.w[j] += critic_step;

  const double actor_step = st.steps.eta_pi * alpha * out.delta;
  for (std::size_t u = 0; u < st.num_actions; ++u) {
    const double g = actor_step * coef[u];
    double* block = st.theta.data() + u * st.num_features;
    for (std::size_t j : tr.features) block[j] += g;
  }

  const double r_bar_before = st.r_bar;
  st.r_bar += st.steps.eta_r_bar * alpha * out.delta;
  if (f && f->num_subtasks > 0) {
    reward_extended_td_errors(*f, tr.reward, st.z, r_bar_before, out.delta, out.betas);
    for (std::size_t i = 0; i < out.betas.size(); ++i) {
      st.z[i] += st.steps.eta_z.at(i) * alpha * out.betas[i];
    }
  }
  return out;
}

namespace {

bool within(double x, double limit) { return std::isfinite(x) && std::abs(x) <= limit; }

}  // namespace

ActorCriticRunOutput run_actor_critic(ContinuousEnvironment& env, const TileCoder& coder,
                                      LinearLearnerState learner, const ActorCriticRunSpec& spec,
                                      std::uint64_t seed) {
  if (spec.steps < 1) throw Error(ErrorCode::InvalidInput, "run needs steps >= 1");
  if (coder.num_features() != learner.num_features || env.num_actions() != learner.num_actions) {
    throw Error(ErrorCode::InvalidInput, "learner shape does not match the coder/environment");
  }
  if (coder.dims() != env.state_dim()) {
    throw Error(ErrorCode::InvalidInput, "tile coder and environment state sizes differ");
  }
  const SubtaskFunction* f = nullptr;
  if (spec.subtask_function) {
    require_valid(*spec.subtask_function);
    if (spec.subtask_function->num_subtasks != learner.z.size()) {
      throw Error(ErrorCode::InvalidInput, "subtask count does not match the learner estimates");
    }
    f = &*spec.subtask_function;
  }

  RngStream env_rng(seed, "env");
  RngStream policy_rng(seed, "policy");

  ActorCriticRunOutput out;
  Trajectory& traj = out.trajectory;
  traj.reserve(spec.steps, learner.z.size());

  std::vector<double> state = env.reset(env_rng);
  std::vector<std::size_t> features, next_features;
  coder.active_features(state, features);
  for (std::uint64_t step = 0; step < spec.steps; ++step) {
    const ActionId a = softmax_select(learner.preferences(features), policy_rng).first;
    ContinuousStep cs = env.step(a, env_rng);
    coder.active_features(cs.next_state, next_features);
    if (spec.learn) {
      actor_critic_step(learner, f, LinearTransition{features, a, cs.reward, next_features});
      bool ok = within(learner.r_bar, spec.divergence_limit);
      for (double z : learner.z) ok = ok && within(z, spec.divergence_limit);
      for (std::size_t j : features) {
        ok = ok && within(learner.w[j], spec.divergence_limit);
        for (std::size_t u = 0; u < learner.num_actions; ++u) {
          ok = ok && within(learner.theta[u * learner.num_features + j], spec.divergence_limit);
        }
      }
      if (!ok) {
        throw DivergedError(step, "actor-critic diverged at step " + std::to_string(step));
      }
    }
    traj.reward.push_back(cs.reward);
    traj.primary_estimate.push_back(learner.r_bar);
    for (std::size_t i = 0; i < learner.z.size(); ++i) {
      traj.subtask_estimates[i].push_back(learner.z[i]);
    }
    traj.state.push_back(-1);
    traj.action.push_back(static_cast<std::int64_t>(a));
    std::swap(features, next_features);
  }
  out.final_state = std::move(learner);
  return out;
}

}  // namespace redrl
