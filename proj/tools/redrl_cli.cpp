// redrl: run, sweep, oracle and replicate entry points.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "redrl/harness.hpp"
#include "redrl/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw redrl::Error(redrl::ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw redrl::Error(redrl::ErrorCode::Io, "error writing '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw redrl::Error(redrl::ErrorCode::Io, "cannot create '" + dir.string() + "'");
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const fs::path& out) {
  const auto config = redrl::load_config(config_path);
  ensure_dir(out);
  const std::uint64_t s = seed.value_or(config.seeds.front());
  const auto result = redrl::run(config, s);
  const std::string stem = "run_seed" + std::to_string(s);
  if (result.status == redrl::RunStatus::Ok) {
    redrl::write_series_csv(out / (stem + ".csv"), result.series);
  }
  const json summary = redrl::summary_to_json(result);
  write_json(out / (stem + ".json"), summary);
  json brief = summary;
  brief.erase("config");
  std::cout << brief.dump(2) << '\n';
  return 0;
}

int cmd_sweep(const std::string& config_path, std::size_t workers, const fs::path& out) {
  const auto config = redrl::load_config(config_path);
  ensure_dir(out);
  const auto table = redrl::sweep(config, workers);
  redrl::write_sweep_csv(out / "sweep.csv", table);
  json j = redrl::sweep_to_json(table);
  j["config"] = redrl::config_to_json(config);
  write_json(out / "sweep.json", j);
  json brief{{"cells", table.cells.size()}, {"best", j["best"]}};
  if (table.best) brief["best_cell"] = j["cells"][*table.best];
  std::size_t failed = 0;
  for (const auto& c : table.cells) failed += c.failures > 0 ? 1 : 0;
  brief["cells_with_failures"] = failed;
  std::cout << brief.dump(2) << '\n';
  return 0;
}

int cmd_oracle(const std::string& model_path, const std::string& objective, double tau,
               double epsilon) {
  std::ifstream in(model_path);
  if (!in) throw redrl::Error(redrl::ErrorCode::Io, "cannot open model '" + model_path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw redrl::Error(redrl::ErrorCode::InvalidInput, std::string("model: ") + e.what());
  }
  const auto model = redrl::model_from_json(j);
  const auto obj = objective == "avg" ? redrl::Objective::AverageReward : redrl::Objective::Cvar;
  const auto best = redrl::enumerate_optimal_policy(model, obj, tau, epsilon);
  json policy = json::object();
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    policy[model.state_names[s]] = model.action_names[best.actions[s]];
  }
  json out{{"objective", objective},
           {"epsilon", epsilon},
           {"value", best.value},
           {"policy", policy},
           {"all_values", best.all_values}};
  if (obj == redrl::Objective::Cvar) out["tau"] = tau;
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward-extended differential learning: runs, sweeps, oracles, replications"};
  app.require_subcommand(1);
  std::size_t workers = 0;
  app.add_option("--workers", workers, "Concurrent runs (0 = all cores)");

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  auto* run = app.add_subcommand("run", "Run one seed of a config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed, "Seed (defaults to the config's first seed)");
  run->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Run every sweep cell for every seed");
  sweep->add_option("config", config_path, "Experiment config (JSON)")->required();
  sweep->add_option("--out", out_dir, "Output directory");

  std::string model_path, objective = "avg";
  double tau = 0.25, epsilon = 0.0;
  auto* oracle = app.add_subcommand("oracle", "Best deterministic policy of a finite model");
  oracle->add_option("model", model_path, "Model file (JSON)")->required();
  oracle->add_option("--objective", objective, "avg or cvar")
      ->check(CLI::IsMember({"avg", "cvar"}));
  oracle->add_option("--tau", tau, "CVaR tail fraction");
  oracle->add_option("--epsilon", epsilon, "Exploration applied to every policy");

  std::string figure;
  redrl::ReplicateOptions ropts;
  auto* replicate = app.add_subcommand("replicate", "Write the CSVs for one figure");
  replicate->add_option("figure", figure, "fig2a, fig3a or figD4")->required();
  replicate->add_option("--out", out_dir, "Output directory")->required();
  replicate->add_option("--runs", ropts.runs, "Runs per configuration");
  replicate->add_option("--steps", ropts.steps, "Steps per run");
  replicate->add_option("--record-every", ropts.record_every, "Row cadence");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seed, out_dir);
    if (*sweep) return cmd_sweep(config_path, workers, out_dir);
    if (*oracle) return cmd_oracle(model_path, objective, tau, epsilon);
    if (*replicate) {
      ropts.workers = workers;
      const auto paths = redrl::replicate(figure, out_dir, ropts);
      json listing = json::array();
      for (const auto& p : paths) listing.push_back(p.string());
      std::cout << json{{"figure", figure}, {"files", listing}}.dump(2) << '\n';
      return 0;
    }
  } catch (const redrl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == redrl::ErrorCode::Io ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
