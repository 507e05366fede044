#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace redrl {

using StateId = std::size_t;
using ActionId = std::size_t;

enum class ErrorCode {
  InvalidInput,
  CoverageViolation,
  Numeric,
  Diverged,
  Capacity,
  Io,
};

/// Library-wide exception. Callers that need to branch on the failure kind
/// inspect code(); everyone else can treat it as a std::runtime_error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Thrown by the learners when an estimate leaves the finite range.
class DivergedError : public Error {
 public:
  DivergedError(std::uint64_t step, const std::string& what)
      : Error(ErrorCode::Diverged, what), step_(step) {}
  std::uint64_t step() const noexcept { return step_; }

 private:
  std::uint64_t step_;
};

/// Warnings go to std::clog unless silenced (the sweep runner silences them
/// inside worker threads).
void log_warning(const std::string& message);
void set_warnings_enabled(bool enabled);

struct EnvStep {
  double reward = 0.0;
  StateId next_state = 0;
  bool terminal = false;
};

/// Labeled pseudo-random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Seeds are derived from (seed, label) with SplitMix64 over an
/// FNV-1a hash of the label, and all real-valued draws are produced here
/// rather than through <random> distributions (those are implementation
/// defined), so a given (seed, label) yields the same draws on every
/// conforming platform.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view label);

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& label() const noexcept { return label_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform on {0, ..., n-1}; n must be positive.
  std::size_t uniform_index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }
  /// Marsaglia polar method.
  double normal(double mean = 0.0, double stdev = 1.0);

 private:
  std::uint64_t seed_;
  std::string label_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view label);

enum class PolicyKind { EpsilonGreedy, Softmax, Fixed };

/// Stochastic policy over a finite state/action space, stored as an explicit
/// probability table.
class DiscretePolicy {
 public:
  /// Deterministic policy taking actions[s] in state s.
  static DiscretePolicy fixed(const std::vector<ActionId>& actions, std::size_t num_actions);
  /// epsilon-greedy around a deterministic action map.
  static DiscretePolicy epsilon_greedy(const std::vector<ActionId>& greedy_actions,
                                       std::size_t num_actions, double epsilon);
  /// Softmax over per-state preference rows.
  static DiscretePolicy softmax(const std::vector<std::vector<double>>& preferences);
  /// Arbitrary table; rows are validated to sum to one.
  static DiscretePolicy from_table(std::vector<std::vector<double>> probabilities);

  PolicyKind kind() const noexcept { return kind_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t num_states() const noexcept { return probs_.size(); }
  std::size_t num_actions() const noexcept { return probs_.empty() ? 0 : probs_.front().size(); }
  double probability(StateId s, ActionId a) const;
  std::span<const double> row(StateId s) const;
  ActionId sample(StateId s, RngStream& rng) const;

 private:
  DiscretePolicy(PolicyKind kind, std::vector<std::vector<double>> probs, double epsilon);

  PolicyKind kind_;
  std::vector<std::vector<double>> probs_;
  double epsilon_ = 0.0;
};

/// Index of the largest entry; ties go to the lowest index.
ActionId argmax(std::span<const double> values);

/// With probability 1 - epsilon the greedy action, otherwise uniform over all
/// actions. Always consumes one uniform draw, plus one more when exploring.
ActionId epsilon_greedy_select(std::span<const double> q_row, double epsilon, RngStream& rng);

/// Numerically stable softmax (max-subtracted).
std::vector<double> softmax_probabilities(std::span<const double> preferences);

/// Samples from softmax(preferences); returns the action and the probabilities.
std::pair<ActionId, std::vector<double>> softmax_select(std::span<const double> preferences,
                                                        RngStream& rng);

/// Samples an index from a probability vector using a single uniform draw.
std::size_t sample_categorical(std::span<const double> probabilities, RngStream& rng);

/// Finite continuing environment. Implementations draw randomness only from
/// the stream they are handed (the run's "env" stream).
class DiscreteEnvironment {
 public:
  virtual ~DiscreteEnvironment() = default;
  virtual std::size_t num_states() const = 0;
  virtual std::size_t num_actions() const = 0;
  virtual StateId initial_state(RngStream& env_rng) = 0;
  virtual EnvStep step(StateId s, ActionId a, RngStream& env_rng) = 0;
};

struct ContinuousStep {
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

/// Continuous-state, discrete-action environment that owns its current state.
class ContinuousEnvironment {
 public:
  virtual ~ContinuousEnvironment() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t num_actions() const = 0;
  virtual std::vector<double> reset(RngStream& env_rng) = 0;
  virtual ContinuousStep step(ActionId a, RngStream& env_rng) = 0;
};

/// pi(a|s) / b(a|s).
double importance_ratio(const DiscretePolicy& target, const DiscretePolicy& behavior, StateId s,
                        ActionId a);

}  // namespace redrl
