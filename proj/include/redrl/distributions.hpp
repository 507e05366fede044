#pragma once

#include <optional>
#include <vector>

#include "redrl/core.hpp"

namespace redrl {

double normal_pdf(double x);
double normal_cdf(double x);
/// Inverse standard normal CDF: Acklam's rational approximation followed by
/// one Halley step against erfc, good to ~1e-15 in the central region.
double normal_quantile(double p);

enum class ComponentKind { PointMass, Gaussian };

struct RewardComponent {
  ComponentKind kind = ComponentKind::Gaussian;
  double weight = 1.0;
  double mean = 0.0;
  /// Ignored for point masses.
  double stdev = 0.0;
};

/// Finite mixture of point masses and Gaussians with an optional upper cap.
///
/// Samples are min(cap, draw). The analytic moments, CDF, VaR and CVaR
/// ignore the cap; for the configured environments the mass above the cap is
/// far below double precision.
class RewardDistribution {
 public:
  RewardDistribution() = default;
  static RewardDistribution point(double value);
  static RewardDistribution gaussian(double mean, double stdev);
  static RewardDistribution mixture(std::vector<RewardComponent> components);
  /// Weighted union of several distributions (weights renormalized).
  static RewardDistribution combine(const std::vector<double>& weights,
                                    const std::vector<RewardDistribution>& parts);

  RewardDistribution with_cap(std::optional<double> cap) const;

  const std::vector<RewardComponent>& components() const noexcept { return components_; }
  std::optional<double> cap() const noexcept { return cap_; }

  double mean() const;
  double variance() const;
  /// P(R <= x).
  double cdf(double x) const;
  /// P(R < x).
  double cdf_below(double x) const;
  /// E[R 1{R < x}].
  double partial_expectation(double x) const;
  /// Lower tau-quantile: inf{x : P(R <= x) >= tau}.
  double value_at_risk(double tau) const;
  /// Lower-tail CVaR: mean of the worst tau fraction of outcomes.
  double cvar(double tau) const;

  /// Picks a component with one uniform draw, then samples it.
  double sample(RngStream& rng) const;

 private:
  explicit RewardDistribution(std::vector<RewardComponent> components);

  std::vector<RewardComponent> components_;
  std::optional<double> cap_;
};

}  // namespace redrl
