#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "redrl/core.hpp"
#include "redrl/distributions.hpp"
#include "redrl/mdp_model.hpp"

namespace redrl {

/// mu(s) for a unichain transition matrix.
using StationaryDistribution = std::vector<double>;

/// Left eigenvector of P for eigenvalue 1, normalized to sum to one. Solved
/// directly; falls back to power iteration on the lazy chain (P + I) / 2 when
/// the direct solution is singular or fails the residual check.
/// Throws InvalidInput for non-stochastic P and Numeric on non-convergence.
StationaryDistribution stationary_distribution(const Eigen::MatrixXd& p);

/// r-bar_pi = sum_s mu(s) sum_a pi(a|s) E[R | s, a].
double exact_average_reward(const MdpModel& model, const DiscretePolicy& policy);

struct PolicyEvaluation {
  double average_reward = 0.0;
  /// Differential values with v(s_0) = 0.
  std::vector<double> values;
  /// max_s |r_pi(s) - r-bar + (P v)(s) - v(s)|.
  double max_residual = 0.0;
};

/// Solves v(s) = r_pi(s) - r-bar + sum_s' P_pi(s, s') v(s') with v(0) = 0.
PolicyEvaluation exact_policy_evaluation(const MdpModel& model, const DiscretePolicy& policy);

/// Lower-tail CVaR of N(mu, sigma^2): mu - sigma phi(Phi^-1(tau)) / tau.
double normal_cvar(double mu, double sigma, double tau);

/// Mean of the lowest ceil(tau n) values. Reorders samples.
double empirical_cvar(std::span<double> samples, double tau);

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

using Sampler = std::function<double(RngStream&)>;

/// Monte Carlo CVaR from n draws with a bootstrap standard error.
McEstimate mc_cvar(const Sampler& sampler, double tau, std::size_t n, RngStream& rng,
                   std::size_t bootstrap_resamples = 200);

/// Limiting per-step reward distribution: sum_s mu(s) sum_a pi(a|s) R(s, a).
RewardDistribution limiting_reward_distribution(const MdpModel& model,
                                                const DiscretePolicy& policy);

enum class Objective { AverageReward, Cvar };

struct PolicyChoice {
  std::vector<ActionId> actions;
  double value = 0.0;
  /// Value of every deterministic policy in enumeration order (state 0 is
  /// the least significant digit).
  std::vector<double> all_values;
};

/// Brute force over deterministic policies, each executed epsilon-greedily.
/// CVaR values use the analytic CVaR of the limiting reward distribution.
/// Ties keep the lowest enumeration index. Throws Capacity beyond 2^16
/// policies.
PolicyChoice enumerate_optimal_policy(const MdpModel& model, Objective objective, double tau,
                                      double epsilon);

}  // namespace redrl
