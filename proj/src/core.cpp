#include "redrl/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>

namespace redrl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void check_row(std::span<const double> row, std::size_t s) {
  double total = 0.0;
  for (double p : row) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::InvalidInput,
                  "policy row " + std::to_string(s) + " has a negative or non-finite entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidInput, "policy row " + std::to_string(s) + " does not sum to 1");
  }
}

std::atomic<bool> g_warnings_enabled{true};

}  // namespace

void log_warning(const std::string& message) {
  if (g_warnings_enabled.load(std::memory_order_relaxed)) {
    std::clog << "[redrl] warning: " << message << '\n';
  }
}

void set_warnings_enabled(bool enabled) { g_warnings_enabled.store(enabled); }

std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view label) {
  return splitmix64(splitmix64(seed) ^ fnv1a(label));
}

RngStream::RngStream(std::uint64_t seed, std::string_view label)
    : seed_(seed), label_(label), engine_(derive_stream_seed(seed, label)) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidInput, "uniform_index: empty range");
  // Lemire-style rejection keeps the draw unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return static_cast<std::size_t>(x % bound);
  }
}

double RngStream::normal(double mean, double stdev) {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return mean + stdev * z;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * m;
  return mean + stdev * (u * m);
}

DiscretePolicy::DiscretePolicy(PolicyKind kind, std::vector<std::vector<double>> probs,
                               double epsilon)
    : kind_(kind), probs_(std::move(probs)), epsilon_(epsilon) {
  if (probs_.empty()) throw Error(ErrorCode::InvalidInput, "policy has no states");
  const std::size_t na = probs_.front().size();
  if (na == 0) throw Error(ErrorCode::InvalidInput, "policy has no actions");
  for (std::size_t s = 0; s < probs_.size(); ++s) {
    if (probs_[s].size() != na) throw Error(ErrorCode::InvalidInput, "ragged policy table");
    check_row(probs_[s], s);
  }
}

DiscretePolicy DiscretePolicy::fixed(const std::vector<ActionId>& actions,
                                     std::size_t num_actions) {
  std::vector<std::vector<double>> probs(actions.size(), std::vector<double>(num_actions, 0.0));
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] >= num_actions) throw Error(ErrorCode::InvalidInput, "action out of range");
    probs[s][actions[s]] = 1.0;
  }
  return DiscretePolicy(PolicyKind::Fixed, std::move(probs), 0.0);
}

DiscretePolicy DiscretePolicy::epsilon_greedy(const std::vector<ActionId>& greedy_actions,
                                              std::size_t num_actions, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "epsilon must lie in [0, 1]");
  }
  if (num_actions == 0) throw Error(ErrorCode::InvalidInput, "policy has no actions");
  const double explore = epsilon / static_cast<double>(num_actions);
  std::vector<std::vector<double>> probs(greedy_actions.size(),
                                         std::vector<double>(num_actions, explore));
  for (std::size_t s = 0; s < greedy_actions.size(); ++s) {
    if (greedy_actions[s] >= num_actions) {
      throw Error(ErrorCode::InvalidInput, "action out of range");
    }
    probs[s][greedy_actions[s]] += 1.0 - epsilon;
  }
  return DiscretePolicy(PolicyKind::EpsilonGreedy, std::move(probs), epsilon);
}

DiscretePolicy DiscretePolicy::softmax(const std::vector<std::vector<double>>& preferences) {
  std::vector<std::vector<double>> probs;
  probs.reserve(preferences.size());
  for (const auto& row : preferences) probs.push_back(softmax_probabilities(row));
  return DiscretePolicy(PolicyKind::Softmax, std::move(probs), 0.0);
}

DiscretePolicy DiscretePolicy::from_table(std::vector<std::vector<double>> probabilities) {
  return DiscretePolicy(PolicyKind::Fixed, std::move(probabilities), 0.0);
}

double DiscretePolicy::probability(StateId s, ActionId a) const {
  if (s >= probs_.size() || a >= probs_[s].size()) {
    throw Error(ErrorCode::InvalidInput, "policy index out of range");
  }
  return probs_[s][a];
}

std::span<const double> DiscretePolicy::row(StateId s) const {
  if (s >= probs_.size()) throw Error(ErrorCode::InvalidInput, "policy state out of range");
  return probs_[s];
}

ActionId DiscretePolicy::sample(StateId s, RngStream& rng) const {
  return sample_categorical(row(s), rng);
}

ActionId argmax(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidInput, "argmax of an empty row");
  ActionId best = 0;
  for (std::size_t a = 1; a < values.size(); ++a) {
    if (values[a] > values[best]) best = a;
  }
  return best;
}

ActionId epsilon_greedy_select(std::span<const double> q_row, double epsilon, RngStream& rng) {
  if (q_row.empty()) throw Error(ErrorCode::InvalidInput, "epsilon_greedy_select: empty q_row");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "epsilon must lie in [0, 1]");
  }
  for (double q : q_row) {
    if (!std::isfinite(q)) throw Error(ErrorCode::InvalidInput, "non-finite action value");
  }
  if (rng.uniform() < epsilon) return rng.uniform_index(q_row.size());
  return argmax(q_row);
}

std::vector<double> softmax_probabilities(std::span<const double> preferences) {
  if (preferences.empty()) throw Error(ErrorCode::InvalidInput, "softmax of an empty row");
  double top = preferences.front();
  for (double h : preferences) {
    if (!std::isfinite(h)) throw Error(ErrorCode::InvalidInput, "non-finite preference");
    top = std::max(top, h);
  }
  std::vector<double> p(preferences.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(preferences[i] - top);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

std::pair<ActionId, std::vector<double>> softmax_select(std::span<const double> preferences,
                                                        RngStream& rng) {
  auto probs = softmax_probabilities(preferences);
  const ActionId a = sample_categorical(probs, rng);
  return {a, std::move(probs)};
}

std::size_t sample_categorical(std::span<const double> probabilities, RngStream& rng) {
  if (probabilities.empty()) throw Error(ErrorCode::InvalidInput, "empty distribution");
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  // Rounding left u above the final partial sum; take the last non-zero entry.
  for (std::size_t i = probabilities.size(); i-- > 0;) {
    if (probabilities[i] > 0.0) return i;
  }
  return probabilities.size() - 1;
}

double importance_ratio(const DiscretePolicy& target, const DiscretePolicy& behavior, StateId s,
                        ActionId a) {
  const double b = behavior.probability(s, a);
  if (b <= 0.0) {
    throw Error(ErrorCode::CoverageViolation,
                "behavior policy never takes action " + std::to_string(a) + " in state " +
                    std::to_string(s));
  }
  return target.probability(s, a) / b;
}

}  // namespace redrl
