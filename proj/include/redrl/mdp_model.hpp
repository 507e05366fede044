#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "redrl/core.hpp"
#include "redrl/distributions.hpp"

namespace redrl {

/// Finite MDP with an explicit kernel and analytic reward distributions.
struct MdpModel {
  std::vector<std::string> state_names;
  std::vector<std::string> action_names;
  /// transitions[s][a][s'] = P(s' | s, a).
  std::vector<std::vector<std::vector<double>>> transitions;
  /// rewards[s][a]: reward distribution for taking a in s.
  std::vector<std::vector<RewardDistribution>> rewards;

  std::size_t num_states() const noexcept { return state_names.size(); }
  std::size_t num_actions() const noexcept { return action_names.size(); }

  /// Throws InvalidInput on shape errors or kernel rows not summing to 1 (1e-12).
  void validate() const;

  Eigen::MatrixXd policy_transition_matrix(const DiscretePolicy& policy) const;
  Eigen::VectorXd policy_reward_means(const DiscretePolicy& policy) const;
  /// Per-state reward distribution sum_a pi(a|s) R(s,a).
  RewardDistribution policy_state_reward(const DiscretePolicy& policy, StateId s) const;
};

/// JSON schema:
///   {"states": [names], "actions": [names],
///    "transitions": [[[P(s'|s,a) for s'] for a] for s],
///    "rewards": [[dist for a] for s]}
/// where dist is {"kind": "point", "value": x} | {"kind": "gaussian", "mean":
/// m, "stdev": s} | {"kind": "mixture", "components": [{"weight": w, "kind":
/// ..., ...}]}, each optionally carrying "cap": c.
nlohmann::json model_to_json(const MdpModel& model);
MdpModel model_from_json(const nlohmann::json& j);
nlohmann::json distribution_to_json(const RewardDistribution& d);
RewardDistribution distribution_from_json(const nlohmann::json& j);

/// Samples transitions from an MdpModel. The initial state is uniform.
class ModelEnvironment : public DiscreteEnvironment {
 public:
  explicit ModelEnvironment(MdpModel model);
  std::size_t num_states() const override { return model_.num_states(); }
  std::size_t num_actions() const override { return model_.num_actions(); }
  StateId initial_state(RngStream& env_rng) override;
  EnvStep step(StateId s, ActionId a, RngStream& env_rng) override;
  const MdpModel& model() const noexcept { return model_; }

 private:
  MdpModel model_;
};

}  // namespace redrl
