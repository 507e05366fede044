#include "redrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "redrl/linear.hpp"
#include "redrl/oracle.hpp"
#include "redrl/presets.hpp"

namespace redrl {

using nlohmann::json;

// Rolling metrics ------------------------------------------------------------

namespace {

std::size_t tail_count(double tau, std::size_t n) {
  const auto k = static_cast<std::size_t>(std::ceil(tau * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

/// Window contents split into the k smallest (low) and the rest (high).
class LowestK {
 public:
  void insert(double x) {
    if (!high_.empty() && x > *high_.begin()) {
      high_.insert(x);
    } else {
      low_.insert(x);
      low_sum_ += x;
    }
  }

  void erase(double x) {
    if (!low_.empty() && x <= *low_.rbegin()) {
      low_.erase(low_.find(x));
      low_sum_ -= x;
    } else {
      high_.erase(high_.find(x));
    }
  }

  void rebalance(std::size_t k) {
    while (low_.size() > k) {
      auto it = std::prev(low_.end());
      low_sum_ -= *it;
      high_.insert(*it);
      low_.erase(it);
    }
    while (low_.size() < k && !high_.empty()) {
      auto it = high_.begin();
      low_sum_ += *it;
      low_.insert(*it);
      high_.erase(it);
    }
  }

  double low_mean() const { return low_sum_ / static_cast<double>(low_.size()); }

 private:
  std::multiset<double> low_, high_;
  double low_sum_ = 0.0;
};

}  // namespace

std::vector<double> rolling_mean(std::span<const double> series, std::size_t window) {
  if (window < 1) throw Error(ErrorCode::InvalidInput, "window must be >= 1");
  std::vector<double> out(series.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    sum += series[t];
    if (t >= window) sum -= series[t - window];
    out[t] = sum / static_cast<double>(std::min(t + 1, window));
  }
  return out;
}

RollingSeries rolling_metrics(std::span<const double> series, std::size_t window, double tau) {
  if (window < 1) throw Error(ErrorCode::InvalidInput, "window must be >= 1");
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidInput, "tau must lie in (0, 1]");
  RollingSeries out;
  out.mean = rolling_mean(series, window);
  out.cvar.resize(series.size());
  LowestK tail;
  for (std::size_t t = 0; t < series.size(); ++t) {
    tail.insert(series[t]);
    if (t >= window) tail.erase(series[t - window]);
    tail.rebalance(tail_count(tau, std::min(t + 1, window)));
    out.cvar[t] = tail.low_mean();
  }
  return out;
}

// Runs -----------------------------------------------------------------------

RunSummary summarize(const Trajectory& series, std::size_t window, double tau,
                     std::size_t num_states) {
  RunSummary s;
  const std::size_t n = series.size();
  if (n == 0) return s;
  const std::size_t w = std::min(window, n);
  std::vector<double> last(series.reward.end() - static_cast<std::ptrdiff_t>(w),
                           series.reward.end());
  double sum = 0.0;
  for (double r : last) sum += r;
  s.final_rolling_mean = sum / static_cast<double>(w);
  s.final_rolling_cvar = empirical_cvar(last, tau);
  if (num_states > 0) {
    s.time_in_state.assign(num_states, 0.0);
    for (std::size_t t = n - w; t < n; ++t) {
      const auto st = series.state[t];
      if (st >= 0 && static_cast<std::size_t>(st) < num_states) s.time_in_state[st] += 1.0;
    }
    for (double& f : s.time_in_state) f /= static_cast<double>(w);
  }
  s.final_primary_estimate = series.primary_estimate.back();
  for (const auto& z : series.subtask_estimates) s.final_subtask_estimates.push_back(z.back());
  return s;
}

namespace {

RunResult run_tabular(const ExperimentConfig& c, std::uint64_t seed, RunResult result) {
  std::unique_ptr<DiscreteEnvironment> env;
  if (c.environment == EnvironmentId::Rpbp) {
    env = std::make_unique<RedPillBluePill>(c.rpbp);
  } else {
    env = std::make_unique<ModelEnvironment>(*c.model);
  }
  TabularSetup setup =
      c.algorithm == Preset::DiffQ
          ? diff_q_preset(env->num_states(), env->num_actions(),
                          StepSizeSchedule{c.alpha_kind, c.alpha, c.eta_r_bar, {}},
                          c.initial_r_bar)
          : red_cvar_q_preset(env->num_states(), env->num_actions(),
                              CvarParams{c.tau, c.initial_var, c.initial_r_bar}, c.alpha_kind,
                              c.alpha, c.eta_r_bar, c.eta_var);
  TabularRunSpec spec;
  spec.kind = setup.kind;
  spec.steps = c.steps;
  spec.epsilon = c.epsilon;
  spec.subtask_function = setup.subtask_function;
  spec.divergence_limit = c.divergence_limit;
  auto out = run_loop(*env, std::move(setup.learner), spec, seed);
  result.summary = summarize(out.trajectory, c.window, c.tau, env->num_states());
  result.summary.greedy_policy = out.final_state.greedy_policy();
  result.series = std::move(out.trajectory);
  return result;
}

RunResult run_linear(const ExperimentConfig& c, std::uint64_t seed, RunResult result) {
  Pendulum env(c.pendulum);
  const TileCoder coder(c.tilings, {c.tiles_per_dim, c.tiles_per_dim},
                        {-std::numbers::pi, -c.pendulum.max_speed},
                        {std::numbers::pi, c.pendulum.max_speed});
  LinearSetup setup =
      c.algorithm == Preset::DiffAc
          ? diff_ac_preset(coder.num_features(), env.num_actions(), c.alpha, c.eta_pi,
                           c.eta_r_bar, c.initial_r_bar)
          : red_cvar_ac_preset(coder.num_features(), env.num_actions(),
                               CvarParams{c.tau, c.initial_var, c.initial_r_bar}, c.alpha,
                               c.eta_pi, c.eta_r_bar, c.eta_var);
  ActorCriticRunSpec spec;
  spec.steps = c.steps;
  spec.subtask_function = setup.subtask_function;
  spec.learn = c.learn;
  spec.divergence_limit = c.divergence_limit;
  auto out = run_actor_critic(env, coder, std::move(setup.learner), spec, seed);
  result.summary = summarize(out.trajectory, c.window, c.tau, 0);
  result.series = std::move(out.trajectory);
  return result;
}

}  // namespace

RunResult run(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  RunResult result;
  result.config = config;
  result.seed = seed;
  try {
    return preset_is_tabular(config.algorithm) ? run_tabular(config, seed, std::move(result))
                                               : run_linear(config, seed, std::move(result));
  } catch (const DivergedError& e) {
    RunResult failed;
    failed.status = RunStatus::Diverged;
    failed.message = e.what();
    failed.diverged_at = e.step();
    failed.config = config;
    failed.seed = seed;
    return failed;
  }
}

double objective_of(const ExperimentConfig& config, const RunSummary& summary) {
  return preset_is_cvar(config.algorithm) ? summary.final_rolling_cvar
                                          : summary.final_rolling_mean;
}

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& task) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Sweep ----------------------------------------------------------------------

SweepTable sweep(const ExperimentConfig& config, std::size_t workers) {
  config.validate();
  std::size_t num_cells = 1;
  for (const auto& axis : config.sweep) num_cells *= axis.values.size();

  std::vector<ExperimentConfig> cell_configs;
  SweepTable table;
  table.cells.resize(num_cells);
  for (std::size_t c = 0; c < num_cells; ++c) {
    ExperimentConfig cell = config;
    cell.sweep.clear();
    std::size_t rest = c;
    std::vector<std::size_t> digits(config.sweep.size());
    for (std::size_t a = config.sweep.size(); a-- > 0;) {
      digits[a] = rest % config.sweep[a].values.size();
      rest /= config.sweep[a].values.size();
    }
    for (std::size_t a = 0; a < config.sweep.size(); ++a) {
      const auto& value = config.sweep[a].values[digits[a]];
      cell = with_override(cell, config.sweep[a].key, value);
      table.cells[c].params.emplace_back(config.sweep[a].key, value);
    }
    cell_configs.push_back(std::move(cell));
  }

  const std::size_t num_seeds = config.seeds.size();
  struct Slot {
    bool ok = false;
    RunSummary summary;
  };
  std::vector<Slot> slots(num_cells * num_seeds);
  parallel_for(slots.size(), workers, [&](std::size_t i) {
    const auto& cell = cell_configs[i / num_seeds];
    RunResult r = run(cell, cell.seeds[i % num_seeds]);
    slots[i].ok = r.status == RunStatus::Ok;
    slots[i].summary = std::move(r.summary);
  });

  for (std::size_t c = 0; c < num_cells; ++c) {
    SweepCell& cell = table.cells[c];
    double sum_mean = 0.0, sum_cvar = 0.0;
    std::size_t ok = 0;
    for (std::size_t k = 0; k < num_seeds; ++k) {
      const Slot& s = slots[c * num_seeds + k];
      ++cell.runs;
      if (!s.ok) {
        ++cell.failures;
        continue;
      }
      ++ok;
      sum_mean += s.summary.final_rolling_mean;
      sum_cvar += s.summary.final_rolling_cvar;
    }
    if (ok > 0) {
      cell.mean_final_rolling_mean = sum_mean / static_cast<double>(ok);
      cell.mean_final_rolling_cvar = sum_cvar / static_cast<double>(ok);
      RunSummary mean_summary;
      mean_summary.final_rolling_mean = cell.mean_final_rolling_mean;
      mean_summary.final_rolling_cvar = cell.mean_final_rolling_cvar;
      cell.objective = objective_of(config, mean_summary);
    } else {
      cell.mean_final_rolling_mean = cell.mean_final_rolling_cvar = cell.objective = NAN;
    }
  }

  auto pick = [&](bool clean_only) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < num_cells; ++c) {
      const auto& cell = table.cells[c];
      if (cell.failures == cell.runs || (clean_only && cell.failures > 0)) continue;
      if (!best || cell.objective > table.cells[*best].objective) best = c;
    }
    return best;
  };
  table.best = pick(true);
  if (!table.best) table.best = pick(false);
  return table;
}

// JSON -----------------------------------------------------------------------

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json summary_to_json(const RunResult& r) {
  json j{{"status", r.status == RunStatus::Ok ? "ok" : "diverged"},
         {"seed", r.seed},
         {"steps", r.series.size()},
         {"config", config_to_json(r.config)}};
  if (r.status == RunStatus::Diverged) {
    j["diverged_at"] = r.diverged_at;
    j["message"] = r.message;
    return j;
  }
  j["summary"] = json{{"final_rolling_mean", r.summary.final_rolling_mean},
                      {"final_rolling_cvar", r.summary.final_rolling_cvar},
                      {"greedy_policy", r.summary.greedy_policy},
                      {"time_in_state", r.summary.time_in_state},
                      {"final_primary_estimate", r.summary.final_primary_estimate},
                      {"final_subtask_estimates", r.summary.final_subtask_estimates}};
  if (preset_is_cvar(r.config.algorithm)) {
    j["subtask_function"] = subtask_function_to_json(cvar_subtask_function(r.config.tau));
  }
  return j;
}

json sweep_to_json(const SweepTable& table) {
  json cells = json::array();
  for (const auto& c : table.cells) {
    json params = json::object();
    for (const auto& [k, v] : c.params) params[k] = v;
    cells.push_back(json{{"params", params},
                         {"runs", c.runs},
                         {"failures", c.failures},
                         {"failed", c.failures > 0},
                         {"mean_final_rolling_mean", finite_or_null(c.mean_final_rolling_mean)},
                         {"mean_final_rolling_cvar", finite_or_null(c.mean_final_rolling_cvar)},
                         {"objective", finite_or_null(c.objective)}});
  }
  json j{{"cells", cells}};
  j["best"] = table.best ? json(*table.best) : json(nullptr);
  return j;
}

// CSV ------------------------------------------------------------------------

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw Error(ErrorCode::Io, "error writing '" + path.string() + "'");
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& s, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorCode::InvalidInput, "non-numeric cell '" + s + "' in " + path.string());
  }
  return v;
}

}  // namespace

void write_series_csv(const std::filesystem::path& path, const Trajectory& series) {
  auto out = open_out(path);
  out << "step,reward,primary_estimate";
  for (std::size_t i = 0; i < series.subtask_estimates.size(); ++i) out << ",z_" << i;
  out << ",state,action\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    out << t << ',' << fmt(series.reward[t]) << ',' << fmt(series.primary_estimate[t]);
    for (const auto& z : series.subtask_estimates) out << ',' << fmt(z[t]);
    out << ',' << series.state[t] << ',' << series.action[t] << '\n';
  }
  close_checked(out, path);
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorCode::InvalidInput, "missing CSV column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::InvalidInput, "empty CSV " + path.string());
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw Error(ErrorCode::InvalidInput, "ragged row in " + path.string());
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, path));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Trajectory read_series_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  std::size_t nsub = 0;
  while (std::find(table.header.begin(), table.header.end(), "z_" + std::to_string(nsub)) !=
         table.header.end()) {
    ++nsub;
  }
  const auto c_reward = table.column("reward"), c_primary = table.column("primary_estimate"),
             c_state = table.column("state"), c_action = table.column("action");
  Trajectory t;
  t.reserve(table.rows.size(), nsub);
  for (const auto& row : table.rows) {
    t.reward.push_back(row[c_reward]);
    t.primary_estimate.push_back(row[c_primary]);
    for (std::size_t i = 0; i < nsub; ++i) {
      t.subtask_estimates[i].push_back(row[table.column("z_" + std::to_string(i))]);
    }
    t.state.push_back(static_cast<std::int64_t>(row[c_state]));
    t.action.push_back(static_cast<std::int64_t>(row[c_action]));
  }
  return t;
}

void write_sweep_csv(const std::filesystem::path& path, const SweepTable& table) {
  auto out = open_out(path);
  if (!table.cells.empty()) {
    for (const auto& [k, _] : table.cells.front().params) out << k << ',';
  }
  out << "runs,failures,mean_final_rolling_mean,mean_final_rolling_cvar,objective,best\n";
  for (std::size_t c = 0; c < table.cells.size(); ++c) {
    const auto& cell = table.cells[c];
    for (const auto& [_, v] : cell.params) {
      out << (v.is_string() ? v.get<std::string>() : v.dump()) << ',';
    }
    out << cell.runs << ',' << cell.failures << ',' << fmt(cell.mean_final_rolling_mean) << ','
        << fmt(cell.mean_final_rolling_cvar) << ',' << fmt(cell.objective) << ','
        << (table.best == c ? 1 : 0) << '\n';
  }
  close_checked(out, path);
}

// Replication ----------------------------------------------------------------

ExperimentConfig fig2a_config(Preset preset) {
  ExperimentConfig c;
  c.environment = EnvironmentId::Rpbp;
  c.algorithm = preset;
  c.epsilon = 0.1;
  c.tau = 0.25;
  c.steps = 100'000;
  c.window = 1000;
  if (preset == Preset::DiffQ) {
    c.alpha = 2e-4;
    c.eta_r_bar = 1.0;
  } else if (preset == Preset::RedCvarQ) {
    c.alpha = 2e-2;
    c.eta_r_bar = 0.1;
    c.eta_var = 0.1;
  } else {
    throw Error(ErrorCode::InvalidInput, "fig2a covers diff-q and red-cvar-q only");
  }
  return c;
}

ExperimentConfig fig3a_config() {
  ExperimentConfig c = fig2a_config(Preset::RedCvarQ);
  c.initial_r_bar = 0.0;
  c.initial_var = 0.0;
  return c;
}

ExperimentConfig figd4_config(double tau) {
  ExperimentConfig c = fig2a_config(Preset::RedCvarQ);
  c.tau = tau;
  return c;
}

namespace {

struct ReplicaRun {
  bool ok = false;
  RunSummary summary;
  std::vector<std::vector<double>> rows;
};

bool recorded(std::size_t t, std::size_t n, std::uint64_t every) {
  return (t + 1) % every == 0 || t + 1 == n;
}

using RowBuilder = std::function<std::vector<std::vector<double>>(const RunResult&)>;

std::vector<ReplicaRun> run_replicas(const std::vector<ExperimentConfig>& configs,
                                     std::size_t runs, std::size_t workers,
                                     const RowBuilder& rows) {
  std::vector<ReplicaRun> out(configs.size() * runs);
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const RunResult r = run(configs[i / runs], i % runs);
    out[i].ok = r.status == RunStatus::Ok;
    out[i].summary = r.summary;
    if (out[i].ok) out[i].rows = rows(r);
  });
  return out;
}

json replica_summary(const ExperimentConfig& config, std::span<const ReplicaRun> runs) {
  std::size_t failures = 0, ok = 0, red_both = 0, blue_both = 0;
  double mean = 0.0, cvar = 0.0, blue = 0.0;
  for (const auto& r : runs) {
    if (!r.ok) {
      ++failures;
      continue;
    }
    ++ok;
    mean += r.summary.final_rolling_mean;
    cvar += r.summary.final_rolling_cvar;
    blue += r.summary.time_in_state.at(rpbp::kBlueWorld);
    const auto& g = r.summary.greedy_policy;
    if (std::all_of(g.begin(), g.end(), [](ActionId a) { return a == rpbp::kRedPill; })) ++red_both;
    if (std::all_of(g.begin(), g.end(), [](ActionId a) { return a == rpbp::kBluePill; })) ++blue_both;
  }
  const double n = ok > 0 ? static_cast<double>(ok) : NAN;
  return json{{"config", config_to_json(config)},
              {"runs", runs.size()},
              {"failures", failures},
              {"mean_final_rolling_mean", finite_or_null(mean / n)},
              {"mean_final_rolling_cvar", finite_or_null(cvar / n)},
              {"mean_final_time_in_blue", finite_or_null(blue / n)},
              {"greedy_red_both", red_both},
              {"greedy_blue_both", blue_both}};
}

void write_rows(const std::filesystem::path& path, const std::string& header,
                std::span<const ReplicaRun> runs) {
  auto out = open_out(path);
  out << header << '\n';
  for (const auto& r : runs) {
    for (const auto& row : r.rows) {
      for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << fmt(row[k]);
      out << '\n';
    }
  }
  close_checked(out, path);
}

}  // namespace

std::vector<std::filesystem::path> replicate(const std::string& figure_id,
                                             const std::filesystem::path& out_dir,
                                             const ReplicateOptions& options) {
  if (figure_id != "fig2a" && figure_id != "fig3a" && figure_id != "figD4") {
    throw Error(ErrorCode::InvalidInput,
                "unknown figure id '" + figure_id + "' (expected fig2a, fig3a or figD4)");
  }
  if (options.runs < 1 || options.steps < 1 || options.record_every < 1) {
    throw Error(ErrorCode::InvalidInput, "replicate needs runs, steps and record_every >= 1");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + out_dir.string() + "': " + ec.message());

  auto adjust = [&](ExperimentConfig c) {
    c.steps = options.steps;
    c.window = std::min<std::uint64_t>(c.window, c.steps);
    c.record_every = options.record_every;
    c.seeds.clear();
    for (std::size_t k = 0; k < options.runs; ++k) c.seeds.push_back(k);
    return c;
  };

  std::vector<std::filesystem::path> written;
  json summary{{"figure", figure_id}, {"runs", options.runs}, {"steps", options.steps}};
  const std::size_t runs = options.runs;

  if (figure_id == "fig2a") {
    const std::vector<ExperimentConfig> configs{adjust(fig2a_config(Preset::DiffQ)),
                                                adjust(fig2a_config(Preset::RedCvarQ))};
    const auto results = run_replicas(configs, runs, options.workers, [&](const RunResult& r) {
      const auto rolling = rolling_metrics(r.series.reward, r.config.window, r.config.tau);
      std::vector<std::vector<double>> rows;
      for (std::size_t t = 0; t < r.series.size(); ++t) {
        if (!recorded(t, r.series.size(), r.config.record_every)) continue;
        rows.push_back({static_cast<double>(t + 1), static_cast<double>(r.seed), r.series.reward[t],
                        rolling.mean[t], rolling.cvar[t]});
      }
      return rows;
    });
    for (std::size_t k = 0; k < configs.size(); ++k) {
      const std::span<const ReplicaRun> block(results.data() + k * runs, runs);
      const std::string name(preset_name(configs[k].algorithm));
      const auto path = out_dir / ("fig2a_" + name + ".csv");
      write_rows(path, "step,run,reward,rolling_mean,rolling_cvar", block);
      written.push_back(path);
      summary[name] = replica_summary(configs[k], block);
    }
  } else if (figure_id == "fig3a") {
    const std::vector<ExperimentConfig> configs{adjust(fig3a_config())};
    const auto results = run_replicas(configs, runs, options.workers, [&](const RunResult& r) {
      std::vector<std::vector<double>> rows;
      for (std::size_t t = 0; t < r.series.size(); ++t) {
        if (!recorded(t, r.series.size(), r.config.record_every)) continue;
        rows.push_back({static_cast<double>(t + 1), static_cast<double>(r.seed),
                        r.series.subtask_estimates[0][t], r.series.primary_estimate[t]});
      }
      return rows;
    });
    const auto path = out_dir / "fig3a.csv";
    write_rows(path, "step,run,var_estimate,cvar_estimate", results);
    written.push_back(path);
    summary["red-cvar-q"] = replica_summary(configs[0], results);
  } else {
    std::vector<ExperimentConfig> configs;
    for (double tau : kFigD4Taus) configs.push_back(adjust(figd4_config(tau)));
    const auto results = run_replicas(configs, runs, options.workers, [&](const RunResult& r) {
      std::vector<double> in_blue(r.series.size());
      for (std::size_t t = 0; t < r.series.size(); ++t) {
        in_blue[t] = r.series.state[t] == static_cast<std::int64_t>(rpbp::kBlueWorld) ? 1.0 : 0.0;
      }
      const auto rolling = rolling_mean(in_blue, r.config.window);
      std::vector<std::vector<double>> rows;
      for (std::size_t t = 0; t < r.series.size(); ++t) {
        if (!recorded(t, r.series.size(), r.config.record_every)) continue;
        rows.push_back({r.config.tau, static_cast<double>(t + 1), static_cast<double>(r.seed),
                        rolling[t]});
      }
      return rows;
    });
    const auto path = out_dir / "figD4.csv";
    write_rows(path, "tau,step,run,time_in_blue", results);
    written.push_back(path);
    json per_tau = json::array();
    for (std::size_t k = 0; k < configs.size(); ++k) {
      json s = replica_summary(configs[k], std::span(results.data() + k * runs, runs));
      s["tau"] = configs[k].tau;
      per_tau.push_back(std::move(s));
    }
    summary["taus"] = per_tau;
  }

  const auto json_path = out_dir / (figure_id + "_summary.json");
  auto out = open_out(json_path);
  out << summary.dump(2) << '\n';
  close_checked(out, json_path);
  written.push_back(json_path);
  return written;
}

}  // namespace redrl
