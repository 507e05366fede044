#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "redrl/cvar.hpp"
#include "redrl/environments.hpp"
#include "redrl/mdp_model.hpp"
#include "redrl/subtask.hpp"
#include "redrl/tabular.hpp"

namespace redrl {

enum class EnvironmentId { Rpbp, Pendulum, Model };

std::string_view environment_name(EnvironmentId id);
EnvironmentId parse_environment(std::string_view name);

/// One sweep dimension: a top-level config key and the values it takes.
struct SweepAxis {
  std::string key;
  std::vector<nlohmann::json> values;
};

/// A single experiment. The JSON form is documented in the README; every key
/// except "environment" and "algorithm" has a default.
///
/// eta_r_bar scales the primary estimate's step, which is the CVaR estimate
/// for the CVaR presets. eta_var scales the VaR step. tau also sets the tail
/// of the rolling reward-CVaR metric for every preset.
struct ExperimentConfig {
  EnvironmentId environment = EnvironmentId::Rpbp;
  RpbpConfig rpbp;
  PendulumConfig pendulum;
  std::optional<MdpModel> model;

  Preset algorithm = Preset::DiffQ;
  ScheduleKind alpha_kind = ScheduleKind::Constant;
  double alpha = 2e-4;
  double eta_r_bar = 1.0;
  double eta_var = 0.1;
  double eta_pi = 1.0;
  double epsilon = 0.1;
  double tau = 0.25;
  std::uint64_t steps = 100'000;
  std::vector<std::uint64_t> seeds{0};
  /// Row cadence for the replication CSVs.
  std::uint64_t record_every = 1;
  std::uint64_t window = 1000;
  double initial_r_bar = 0.0;
  double initial_var = 0.0;
  std::size_t tilings = 32;
  std::size_t tiles_per_dim = 8;
  /// Actor-critic only. False freezes the weights: a uniform random policy.
  bool learn = true;
  double divergence_limit = 1e6;

  std::vector<SweepAxis> sweep;

  /// Throws InvalidInput naming the first violated invariant.
  void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Reads a JSON config file. Io on unreadable files, InvalidInput on bad content.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Copy of config with one top-level key replaced (used for sweep cells).
ExperimentConfig with_override(const ExperimentConfig& config, const std::string& key,
                               const nlohmann::json& value);

/// {"num_subtasks", "rule": "fixed"|"estimate-relative", "breakpoints",
///  "pivot_subtask", "segments": [{"reward_coef", "constant", "subtask_coefs",
///  "target": "observed"|"primary-estimate", "label"}]}. Infinite breakpoints
/// are written as the strings "-inf" / "inf".
nlohmann::json subtask_function_to_json(const SubtaskFunction& f);
SubtaskFunction subtask_function_from_json(const nlohmann::json& j);

}  // namespace redrl
