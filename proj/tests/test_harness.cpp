#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "redrl/environments.hpp"
#include "redrl/harness.hpp"

using namespace redrl;
using nlohmann::json;

namespace {

std::pair<double, double> brute_window(std::span<const double> xs, std::size_t t, std::size_t window,
                                       double tau) {
  const std::size_t w = std::min(window, t + 1);
  std::vector<double> tail(xs.begin() + static_cast<std::ptrdiff_t>(t + 1 - w),
                           xs.begin() + static_cast<std::ptrdiff_t>(t + 1));
  const double mean = std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(w);
  std::sort(tail.begin(), tail.end());
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(tau * w - 1e-9)));
  return {mean, std::accumulate(tail.begin(), tail.begin() + static_cast<std::ptrdiff_t>(k), 0.0) / k};
}

ExperimentConfig small(Preset p, std::uint64_t steps = 2000) {
  ExperimentConfig c;
  c.algorithm = p;
  c.alpha = 0.02;
  c.eta_r_bar = 0.1;
  c.steps = steps;
  c.window = std::min<std::uint64_t>(500, steps);
  return c;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "redrl_test_harness" / name;
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("rolling metrics match a brute-force window") {
  RngStream rng(1, "series");
  std::vector<double> xs(3000);
  for (auto& x : xs) x = rng.bernoulli(0.1) ? std::round(rng.normal() * 4) : rng.normal();
  for (std::size_t window : {1u, 7u, 100u, 3000u}) {
    for (double tau : {0.05, 0.25, 0.3, 1.0}) {
      const auto r = rolling_metrics(xs, window, tau);
      REQUIRE(r.mean.size() == xs.size());
      for (std::size_t t = 0; t < xs.size(); ++t) {
        const auto [m, c] = brute_window(xs, t, window, tau);
        REQUIRE(r.mean[t] == doctest::Approx(m).epsilon(1e-9));
        REQUIRE(r.cvar[t] == doctest::Approx(c).epsilon(1e-9));
      }
    }
  }
  CHECK(rolling_mean(xs, 100) == rolling_metrics(xs, 100, 0.5).mean);
}

TEST_CASE("rolling metrics edge cases") {
  const std::vector<double> flat(50, -0.4);
  const auto r = rolling_metrics(flat, 10, 0.25);
  for (std::size_t t = 0; t < flat.size(); ++t) {
    CHECK(r.mean[t] == doctest::Approx(-0.4));
    CHECK(r.cvar[t] == doctest::Approx(-0.4));
  }
  const std::vector<double> xs{3, -1, 2};
  const auto one = rolling_metrics(xs, 1, 0.25);
  CHECK(one.cvar == xs);
  CHECK(one.mean == xs);
  CHECK_THROWS_AS(rolling_metrics(xs, 0, 0.25), Error);
  CHECK_THROWS_AS(rolling_metrics(xs, 2, 0.0), Error);
}

TEST_CASE("rolling CVaR of Gaussian rewards converges to the closed form") {
  const auto d = RewardDistribution::gaussian(-0.7, 0.05);
  RngStream rng(2, "env");
  std::vector<double> xs(1'000'000);
  for (auto& x : xs) x = d.sample(rng);
  const auto r = rolling_metrics(xs, 10'000, 0.25);
  CHECK(std::abs(r.cvar.back() - -0.7636) < 0.01);
  CHECK(std::abs(r.mean.back() - -0.7) < 0.005);
}

TEST_CASE("runs are deterministic in (config, seed)") {
  for (auto p : {Preset::DiffQ, Preset::RedCvarQ}) {
    const auto c = small(p);
    const auto a = run(c, 4), b = run(c, 4), other = run(c, 5);
    CHECK(a.status == RunStatus::Ok);
    CHECK(a.series == b.series);
    CHECK(summary_to_json(a) == summary_to_json(b));
    CHECK_FALSE(a.series == other.series);
    CHECK(a.series.size() == c.steps);
  }
  auto one = small(Preset::RedCvarQ, 1);
  const auto r = run(one, 0);
  CHECK(r.series.size() == 1);
  CHECK(r.summary.final_rolling_cvar == r.series.reward[0]);
  CHECK(r.summary.time_in_state.size() == 2);
}

TEST_CASE("summary JSON carries the learned estimates") {
  const auto r = run(small(Preset::RedCvarQ), 1);
  const auto j = summary_to_json(r);
  CHECK(j["status"] == "ok");
  CHECK(j["summary"]["final_subtask_estimates"].size() == 1);
  CHECK(j.contains("subtask_function"));
  CHECK(j["summary"]["greedy_policy"].size() == 2);
  CHECK(r.summary.final_primary_estimate == r.series.primary_estimate.back());
  CHECK(r.summary.final_subtask_estimates[0] == r.series.subtask_estimates[0].back());
}

TEST_CASE("divergence is reported, not thrown") {
  auto c = small(Preset::DiffQ);
  c.alpha = 50.0;
  c.eta_r_bar = 1.0;
  const auto r = run(c, 0);
  CHECK(r.status == RunStatus::Diverged);
  CHECK(r.series.size() == 0);
  CHECK(r.diverged_at < c.steps);
  CHECK(summary_to_json(r)["status"] == "diverged");
}

TEST_CASE("pendulum runs through the harness") {
  ExperimentConfig c;
  c.environment = EnvironmentId::Pendulum;
  c.algorithm = Preset::RedCvarAc;
  c.alpha = 2e-3;
  c.eta_r_bar = 1e-2;
  c.eta_var = 1e-3;
  c.tau = 0.1;
  c.steps = 3000;
  c.window = 1000;
  const auto r = run(c, 2);
  REQUIRE(r.status == RunStatus::Ok);
  CHECK(r.series.size() == 3000);
  CHECK(r.summary.time_in_state.empty());
  CHECK(r.summary.greedy_policy.empty());
  CHECK(r.series.state.front() == -1);
}

TEST_CASE("a one-cell sweep reproduces run()") {
  auto c = small(Preset::RedCvarQ);
  c.seeds = {3, 8};
  const auto table = sweep(c, 2);
  REQUIRE(table.cells.size() == 1);
  REQUIRE(table.best == std::optional<std::size_t>{0});
  const auto a = run(c, 3), b = run(c, 8);
  const auto& cell = table.cells[0];
  CHECK(cell.runs == 2);
  CHECK(cell.failures == 0);
  CHECK(cell.mean_final_rolling_cvar ==
        doctest::Approx((a.summary.final_rolling_cvar + b.summary.final_rolling_cvar) / 2));
  CHECK(cell.objective == doctest::Approx(cell.mean_final_rolling_cvar));
}

TEST_CASE("sweep grids expand to the cross product") {
  auto c = small(Preset::DiffQ, 50);
  c.window = 10;
  c.sweep = {SweepAxis{"alpha", {json("1/n"), json(0.5), json(0.1), json(0.05), json(0.01)}},
             SweepAxis{"eta_r_bar", {json(0.01), json(0.03), json(0.1), json(0.3), json(1.0), json(3.0)}}};
  auto table = sweep(c, 1);
  CHECK(table.cells.size() == 30);
  CHECK(table.cells[0].params[0].second == "1/n");
  CHECK(table.cells[1].params[1].second == 0.03);
  CHECK(table.cells[6].params[0].second == 0.5);

  c.sweep.push_back(SweepAxis{"epsilon", {json(0.0), json(0.05), json(0.1), json(0.2), json(0.5), json(1.0)}});
  table = sweep(c, 3);
  CHECK(table.cells.size() == 180);
  CHECK(table.best.has_value());
}

TEST_CASE("sweep results do not depend on the worker count") {
  const auto c = load_config(REDRL_TEST_DATA "/small_sweep.json");
  CHECK(sweep_to_json(sweep(c, 1)) == sweep_to_json(sweep(c, 4)));
}

TEST_CASE("failing cells are flagged and skipped for best") {
  auto c = small(Preset::DiffQ);
  c.seeds = {0, 1};
  c.eta_r_bar = 1.0;
  c.sweep = {SweepAxis{"alpha", {json(50.0), json(0.02)}}};
  const auto table = sweep(c, 2);
  CHECK(table.cells[0].failures == 2);
  CHECK(table.cells[1].failures == 0);
  CHECK(table.best == std::optional<std::size_t>{1});

  c.sweep = {SweepAxis{"alpha", {json(50.0), json(60.0)}}};
  CHECK_FALSE(sweep(c, 1).best.has_value());
}

TEST_CASE("parallel_for visits every index and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw Error(ErrorCode::Numeric, "boom");
                               }),
                  Error);
}

TEST_CASE("series CSV round trip reproduces the summary") {
  const auto dir = scratch("csv");
  for (auto p : {Preset::DiffQ, Preset::RedCvarQ}) {
    const auto c = small(p);
    const auto r = run(c, 6);
    const auto path = dir / "series.csv";
    write_series_csv(path, r.series);
    const auto back = read_series_csv(path);
    CHECK(back == r.series);
    const auto s = summarize(back, c.window, c.tau, 2);
    CHECK(s.final_rolling_mean == r.summary.final_rolling_mean);
    CHECK(s.final_rolling_cvar == r.summary.final_rolling_cvar);
    CHECK(s.time_in_state == r.summary.time_in_state);
  }
  const auto table = read_csv(dir / "series.csv");
  CHECK(table.header.front() == "step");
  CHECK(table.column("z_0") == 3);
  CHECK_THROWS_AS(table.column("nope"), Error);
  CHECK_THROWS_AS(read_csv(dir / "absent.csv"), Error);
}

TEST_CASE("replication writes the documented CSVs") {
  const auto dir = scratch("replicate");
  ReplicateOptions o;
  o.runs = 2;
  o.steps = 2000;
  o.record_every = 100;
  o.workers = 2;
  const auto files = replicate("fig2a", dir, o);
  CHECK(files.size() == 3);
  const auto t = read_csv(dir / "fig2a_red-cvar-q.csv");
  CHECK(t.header == std::vector<std::string>{"step", "run", "reward", "rolling_mean", "rolling_cvar"});
  CHECK(t.rows.size() == 2 * 20);
  CHECK_THROWS_AS(replicate("fig9", dir, o), Error);
}
