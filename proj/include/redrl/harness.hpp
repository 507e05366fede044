#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "redrl/config.hpp"
#include "redrl/trajectory.hpp"

namespace redrl {

struct RollingSeries {
  std::vector<double> mean;
  std::vector<double> cvar;
};

/// Trailing-window mean and empirical CVaR (mean of the lowest
/// ceil(tau * w) rewards, w = min(window, t + 1)). Positions before a full
/// window use the available prefix.
RollingSeries rolling_metrics(std::span<const double> series, std::size_t window, double tau);

/// Trailing-window mean only.
std::vector<double> rolling_mean(std::span<const double> series, std::size_t window);

enum class RunStatus { Ok, Diverged };

struct RunSummary {
  double final_rolling_mean = 0.0;
  double final_rolling_cvar = 0.0;
  /// Greedy action per state at the end of the run (tabular presets only).
  std::vector<ActionId> greedy_policy;
  /// Fraction of the final window spent in each discrete state.
  std::vector<double> time_in_state;
  double final_primary_estimate = 0.0;
  std::vector<double> final_subtask_estimates;
};

struct RunResult {
  RunStatus status = RunStatus::Ok;
  std::string message;
  /// Step index at which a diverged run was stopped.
  std::uint64_t diverged_at = 0;
  ExperimentConfig config;
  std::uint64_t seed = 0;
  /// Full per-step series; empty for diverged runs.
  Trajectory series;
  RunSummary summary;
};

/// Everything in RunSummary that the series determines (all but the greedy
/// policy). num_states = 0 leaves time_in_state empty.
RunSummary summarize(const Trajectory& series, std::size_t window, double tau,
                     std::size_t num_states);

/// Executes one configured run. Deterministic in (config, seed). Divergence
/// yields status Diverged, not an exception.
RunResult run(const ExperimentConfig& config, std::uint64_t seed);

/// Objective the sweep maximizes: final rolling CVaR for the CVaR presets,
/// final rolling mean otherwise.
double objective_of(const ExperimentConfig& config, const RunSummary& summary);

/// Calls task(i) for i in [0, n) on at most `workers` threads (0 means the
/// hardware concurrency). Exceptions are rethrown after all tasks finish,
/// lowest index first.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& task);

struct SweepCell {
  /// Key/value per sweep axis, in axis order.
  std::vector<std::pair<std::string, nlohmann::json>> params;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double mean_final_rolling_mean = 0.0;
  double mean_final_rolling_cvar = 0.0;
  double objective = 0.0;
};

struct SweepTable {
  std::vector<SweepCell> cells;
  /// Highest objective among cells with no failures; failing cells are
  /// considered only when every cell failed somewhere. Empty when no run
  /// succeeded.
  std::optional<std::size_t> best;
};

/// Expands the cross product of the config's sweep axes (first axis varies
/// slowest) and runs every cell for every seed. A config without axes is a
/// single cell.
SweepTable sweep(const ExperimentConfig& config, std::size_t workers);

nlohmann::json summary_to_json(const RunResult& result);
nlohmann::json sweep_to_json(const SweepTable& table);

// CSV ------------------------------------------------------------------------

/// Columns: step, reward, primary_estimate, z_0..z_{n-1}, state, action.
void write_series_csv(const std::filesystem::path& path, const Trajectory& series);
Trajectory read_series_csv(const std::filesystem::path& path);

void write_sweep_csv(const std::filesystem::path& path, const SweepTable& table);

/// Generic numeric table reader: header names plus rows of doubles.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

// Replication ----------------------------------------------------------------

struct ReplicateOptions {
  std::size_t runs = 50;
  std::uint64_t steps = 100'000;
  std::uint64_t record_every = 100;
  std::size_t workers = 0;
};

/// Canned configs for the red-pill blue-pill figures.
ExperimentConfig fig2a_config(Preset preset);
ExperimentConfig fig3a_config();
ExperimentConfig figd4_config(double tau);
inline constexpr double kFigD4Taus[] = {0.1, 0.25, 0.5, 0.75, 0.85, 0.9};

/// Writes the CSVs for figure_id (fig2a, fig3a, figD4) into out_dir plus a
/// JSON summary; returns the paths written.
///   fig2a_<preset>.csv: step, run, reward, rolling_mean, rolling_cvar
///   fig3a.csv:          step, run, var_estimate, cvar_estimate
///   figD4.csv:          tau, step, run, time_in_blue
/// Unknown ids raise InvalidInput.
std::vector<std::filesystem::path> replicate(const std::string& figure_id,
                                             const std::filesystem::path& out_dir,
                                             const ReplicateOptions& options);

}  // namespace redrl
