#include "redrl/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace redrl {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -INFINITY;
    if (p == 1.0) return INFINITY;
    throw Error(ErrorCode::InvalidInput, "normal_quantile: p outside [0, 1]");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

RewardDistribution::RewardDistribution(std::vector<RewardComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw Error(ErrorCode::InvalidInput, "distribution has no components");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight) || !std::isfinite(c.mean)) {
      throw Error(ErrorCode::InvalidInput, "bad mixture component");
    }
    if (c.kind == ComponentKind::Gaussian && !(c.stdev > 0.0 && std::isfinite(c.stdev))) {
      throw Error(ErrorCode::InvalidInput, "Gaussian component needs stdev > 0");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidInput, "mixture weights must sum to 1");
  }
}

RewardDistribution RewardDistribution::point(double value) {
  return RewardDistribution({RewardComponent{ComponentKind::PointMass, 1.0, value, 0.0}});
}

RewardDistribution RewardDistribution::gaussian(double mean, double stdev) {
  return RewardDistribution({RewardComponent{ComponentKind::Gaussian, 1.0, mean, stdev}});
}

RewardDistribution RewardDistribution::mixture(std::vector<RewardComponent> components) {
  return RewardDistribution(std::move(components));
}

RewardDistribution RewardDistribution::combine(const std::vector<double>& weights,
                                               const std::vector<RewardDistribution>& parts) {
  if (weights.size() != parts.size() || parts.empty()) {
    throw Error(ErrorCode::InvalidInput, "combine: weights and parts differ in length");
  }
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidInput, "combine: weights sum to zero");
  std::vector<RewardComponent> out;
  std::optional<double> cap;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (weights[k] == 0.0) continue;
    for (auto c : parts[k].components_) {
      c.weight *= weights[k] / total;
      out.push_back(c);
    }
    if (parts[k].cap_) cap = cap ? std::min(*cap, *parts[k].cap_) : *parts[k].cap_;
  }
  // Renormalize away rounding so the constructor's check is about real errors.
  double sum = 0.0;
  for (const auto& c : out) sum += c.weight;
  for (auto& c : out) c.weight /= sum;
  return RewardDistribution(std::move(out)).with_cap(cap);
}

RewardDistribution RewardDistribution::with_cap(std::optional<double> cap) const {
  RewardDistribution copy = *this;
  copy.cap_ = cap;
  return copy;
}

double RewardDistribution::mean() const {
  double m = 0.0;
  for (const auto& c : components_) m += c.weight * c.mean;
  return m;
}

double RewardDistribution::variance() const {
  const double mu = mean();
  double second = 0.0;
  for (const auto& c : components_) {
    const double var = c.kind == ComponentKind::Gaussian ? c.stdev * c.stdev : 0.0;
    second += c.weight * (var + c.mean * c.mean);
  }
  return second - mu * mu;
}

double RewardDistribution::cdf(double x) const {
  double p = 0.0;
  for (const auto& c : components_) {
    if (c.kind == ComponentKind::PointMass) {
      if (c.mean <= x) p += c.weight;
    } else {
      p += c.weight * normal_cdf((x - c.mean) / c.stdev);
    }
  }
  return p;
}

double RewardDistribution::cdf_below(double x) const {
  double p = 0.0;
  for (const auto& c : components_) {
    if (c.kind == ComponentKind::PointMass) {
      if (c.mean < x) p += c.weight;
    } else {
      p += c.weight * normal_cdf((x - c.mean) / c.stdev);
    }
  }
  return p;
}

double RewardDistribution::partial_expectation(double x) const {
  double e = 0.0;
  for (const auto& c : components_) {
    if (c.kind == ComponentKind::PointMass) {
      if (c.mean < x) e += c.weight * c.mean;
    } else {
      const double z = (x - c.mean) / c.stdev;
      e += c.weight * (c.mean * normal_cdf(z) - c.stdev * normal_pdf(z));
    }
  }
  return e;
}

double RewardDistribution::value_at_risk(double tau) const {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::InvalidInput, "tau must lie in (0, 1)");
  // An atom can hold the quantile exactly.
  for (const auto& c : components_) {
    if (c.kind == ComponentKind::PointMass && cdf(c.mean) >= tau && cdf_below(c.mean) < tau) {
      return c.mean;
    }
  }
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& c : components_) {
    const double spread = c.kind == ComponentKind::Gaussian ? 40.0 * c.stdev : 1.0;
    lo = std::min(lo, c.mean - spread);
    hi = std::max(hi, c.mean + spread);
  }
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) >= tau) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double RewardDistribution::cvar(double tau) const {
  const double q = value_at_risk(tau);
  return (partial_expectation(q) + q * (tau - cdf_below(q))) / tau;
}

double RewardDistribution::sample(RngStream& rng) const {
  const RewardComponent* chosen = &components_.back();
  if (components_.size() > 1) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (const auto& c : components_) {
      cumulative += c.weight;
      if (u < cumulative) {
        chosen = &c;
        break;
      }
    }
  }
  double x = chosen->kind == ComponentKind::PointMass ? chosen->mean
                                                      : rng.normal(chosen->mean, chosen->stdev);
  if (cap_) x = std::min(*cap_, x);
  return x;
}

}  // namespace redrl
