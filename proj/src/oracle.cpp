#include "redrl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace redrl {

namespace {

void require_stochastic(const Eigen::MatrixXd& p) {
  if (p.rows() == 0 || p.rows() != p.cols()) {
    throw Error(ErrorCode::InvalidInput, "transition matrix must be square and non-empty");
  }
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    if ((p.row(i).array() < 0.0).any() || !p.row(i).allFinite()) {
      throw Error(ErrorCode::InvalidInput, "transition matrix has a negative or non-finite entry");
    }
    if (std::abs(p.row(i).sum() - 1.0) > 1e-10) {
      throw Error(ErrorCode::InvalidInput, "transition matrix row " + std::to_string(i) +
                                               " does not sum to 1");
    }
  }
}

double stationary_residual(const Eigen::MatrixXd& p, const Eigen::VectorXd& mu) {
  return (p.transpose() * mu - mu).cwiseAbs().maxCoeff();
}

bool acceptable(const Eigen::MatrixXd& p, const Eigen::VectorXd& mu) {
  return mu.allFinite() && (mu.array() >= -1e-12).all() && std::abs(mu.sum() - 1.0) <= 1e-10 &&
         stationary_residual(p, mu) <= 1e-8;
}

StationaryDistribution finish(Eigen::VectorXd mu) {
  mu = mu.cwiseMax(0.0);
  mu /= mu.sum();
  return StationaryDistribution(mu.data(), mu.data() + mu.size());
}

}  // namespace

StationaryDistribution stationary_distribution(const Eigen::MatrixXd& p) {
  require_stochastic(p);
  const Eigen::Index n = p.rows();

  // (P^T - I) mu = 0 with the last equation replaced by sum(mu) = 1.
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (lu.isInvertible()) {
    Eigen::VectorXd mu = lu.solve(b);
    if (acceptable(p, mu)) return finish(std::move(mu));
  }

  const Eigen::MatrixXd lazy = 0.5 * (p + Eigen::MatrixXd::Identity(n, n));
  Eigen::VectorXd mu = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 1'000'000; ++it) {
    Eigen::VectorXd next = lazy.transpose() * mu;
    next /= next.sum();
    const double change = (next - mu).cwiseAbs().maxCoeff();
    mu = std::move(next);
    if (change < 1e-12) {
      if (acceptable(p, mu)) return finish(std::move(mu));
      break;
    }
  }
  throw Error(ErrorCode::Numeric, "stationary distribution did not converge");
}

double exact_average_reward(const MdpModel& model, const DiscretePolicy& policy) {
  const auto mu = stationary_distribution(model.policy_transition_matrix(policy));
  const Eigen::VectorXd r = model.policy_reward_means(policy);
  double avg = 0.0;
  for (std::size_t s = 0; s < mu.size(); ++s) avg += mu[s] * r(static_cast<Eigen::Index>(s));
  return avg;
}

PolicyEvaluation exact_policy_evaluation(const MdpModel& model, const DiscretePolicy& policy) {
  const Eigen::MatrixXd p = model.policy_transition_matrix(policy);
  require_stochastic(p);
  const Eigen::VectorXd r = model.policy_reward_means(policy);
  const Eigen::Index n = p.rows();

  // Unknowns (v_0..v_{n-1}, r-bar); n Poisson equations plus v_0 = 0.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  a.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n) - p;
  a.topRightCorner(n, 1).setOnes();
  b.head(n) = r;
  a(n, 0) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::Numeric, "Poisson system is singular (policy chain not unichain?)");
  }
  const Eigen::VectorXd x = lu.solve(b);

  PolicyEvaluation out;
  out.average_reward = x(n);
  out.values.assign(x.data(), x.data() + n);
  const Eigen::VectorXd v = x.head(n);
  out.max_residual = (r.array() - out.average_reward + (p * v).array() - v.array()).abs().maxCoeff();
  if (!(out.max_residual < 1e-8)) {
    throw Error(ErrorCode::Numeric, "Poisson solution residual too large");
  }
  return out;
}

double normal_cvar(double mu, double sigma, double tau) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidInput, "normal_cvar needs sigma > 0");
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::InvalidInput, "tau must lie in (0, 1)");
  return mu - sigma * normal_pdf(normal_quantile(tau)) / tau;
}

double empirical_cvar(std::span<double> samples, double tau) {
  if (samples.empty()) throw Error(ErrorCode::InvalidInput, "empirical_cvar of no samples");
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidInput, "tau must lie in (0, 1]");
  const auto k = std::min<std::size_t>(
      samples.size(),
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::ceil(tau * static_cast<double>(samples.size()) - 1e-9))));
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   samples.end());
  const double sum = std::accumulate(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
  return sum / static_cast<double>(k);
}

McEstimate mc_cvar(const Sampler& sampler, double tau, std::size_t n, RngStream& rng,
                   std::size_t bootstrap_resamples) {
  if (n < 1000) throw Error(ErrorCode::InvalidInput, "mc_cvar needs n >= 1000");
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::InvalidInput, "tau must lie in (0, 1)");
  std::vector<double> samples(n);
  for (auto& x : samples) x = sampler(rng);

  std::vector<double> work(samples);
  McEstimate out;
  out.estimate = empirical_cvar(work, tau);

  if (bootstrap_resamples >= 2) {
    std::vector<double> stats;
    stats.reserve(bootstrap_resamples);
    for (std::size_t b = 0; b < bootstrap_resamples; ++b) {
      for (auto& x : work) x = samples[rng.uniform_index(n)];
      stats.push_back(empirical_cvar(work, tau));
    }
    const double mean = std::accumulate(stats.begin(), stats.end(), 0.0) /
                        static_cast<double>(stats.size());
    double ss = 0.0;
    for (double s : stats) ss += (s - mean) * (s - mean);
    out.standard_error = std::sqrt(ss / static_cast<double>(stats.size() - 1));
  }
  return out;
}

RewardDistribution limiting_reward_distribution(const MdpModel& model,
                                                const DiscretePolicy& policy) {
  const auto mu = stationary_distribution(model.policy_transition_matrix(policy));
  std::vector<double> weights;
  std::vector<RewardDistribution> parts;
  for (StateId s = 0; s < model.num_states(); ++s) {
    for (ActionId a = 0; a < model.num_actions(); ++a) {
      const double w = mu[s] * policy.probability(s, a);
      if (w <= 0.0) continue;
      weights.push_back(w);
      parts.push_back(model.rewards[s][a]);
    }
  }
  return RewardDistribution::combine(weights, parts);
}

PolicyChoice enumerate_optimal_policy(const MdpModel& model, Objective objective, double tau,
                                      double epsilon) {
  model.validate();
  if (objective == Objective::Cvar && !(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::InvalidInput, "tau must lie in (0, 1)");
  }
  const std::size_t ns = model.num_states(), na = model.num_actions();
  constexpr std::uint64_t kLimit = 1ULL << 16;
  std::uint64_t count = 1;
  for (std::size_t s = 0; s < ns; ++s) {
    count *= na;
    if (count > kLimit) {
      throw Error(ErrorCode::Capacity, "too many deterministic policies to enumerate");
    }
  }

  PolicyChoice best;
  best.value = -INFINITY;
  best.all_values.reserve(count);
  std::vector<ActionId> actions(ns, 0);
  for (std::uint64_t index = 0; index < count; ++index) {
    std::uint64_t rest = index;
    for (std::size_t s = 0; s < ns; ++s) {
      actions[s] = static_cast<ActionId>(rest % na);
      rest /= na;
    }
    const auto policy = DiscretePolicy::epsilon_greedy(actions, na, epsilon);
    const double value = objective == Objective::AverageReward
                             ? exact_average_reward(model, policy)
                             : limiting_reward_distribution(model, policy).cvar(tau);
    best.all_values.push_back(value);
    if (value > best.value) {
      best.value = value;
      best.actions = actions;
    }
  }
  return best;
}

}  // namespace redrl
