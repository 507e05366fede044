// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "redrl/cvar.hpp"
#include "redrl/environments.hpp"
#include "redrl/harness.hpp"
#include "redrl/oracle.hpp"
#include "redrl/subtask.hpp"
#include "redrl/tabular.hpp"

using namespace redrl;

namespace {

// Tolerances and thresholds.
constexpr std::size_t kSeeds = 50;
constexpr std::size_t kMinPolicyHits = 45;
constexpr double kMeanBand = 0.02;
constexpr double kLowBlue = 0.2;
constexpr double kHighBlue = 0.8;
constexpr double kEstimateBand = 0.1;
constexpr std::uint64_t kEstimateTail = 10'000;
constexpr std::size_t kEstimateRuns = 10;
constexpr std::size_t kOracleSamples = 1'000'000;
constexpr int kLinearDraws = 10'000;
constexpr int kZeroMeanTransitions = 100'000;
constexpr double kSeBand = 3.0;
constexpr double kCouplingRel = 1e-8;
constexpr double kOracleAgreement = 1e-10;
constexpr double kMcSeBand = 4.0;
constexpr std::size_t kPendulumSeeds = 10;
constexpr double kPendulumImprovement = 0.5;
constexpr double kPendulumAgreement = 0.15;

int failures = 0;

void report(const char* name, bool pass, const std::string& detail) {
  std::printf("%s  %-34s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::vector<RunResult> run_seeds(const ExperimentConfig& c, std::size_t n) {
  std::vector<RunResult> out(n);
  parallel_for(n, workers(), [&](std::size_t i) {
    out[i] = run(c, i);
    out[i].series = Trajectory{};
  });
  return out;
}

double mean_of(const std::vector<RunResult>& rs, auto field) {
  double s = 0;
  for (const auto& r : rs) s += field(r);
  return s / static_cast<double>(rs.size());
}

bool ok_all(const std::vector<RunResult>& rs) {
  return std::all_of(rs.begin(), rs.end(), [](const auto& r) { return r.status == RunStatus::Ok; });
}

const std::vector<ActionId> kAllRed{rpbp::kRedPill, rpbp::kRedPill};
const std::vector<ActionId> kAllBlue{rpbp::kBluePill, rpbp::kBluePill};

// --- 1 and 2 ---------------------------------------------------------------

void rpbp_control() {
  const auto red = run_seeds(fig2a_config(Preset::RedCvarQ), kSeeds);
  const auto diff = run_seeds(fig2a_config(Preset::DiffQ), kSeeds);

  const auto red_hits = std::count_if(red.begin(), red.end(),
                                      [](const auto& r) { return r.summary.greedy_policy == kAllRed; });
  const double red_cvar = mean_of(red, [](const auto& r) { return r.summary.final_rolling_cvar; });
  const double diff_cvar = mean_of(diff, [](const auto& r) { return r.summary.final_rolling_cvar; });
  report("rpbp risk-aware control",
         ok_all(red) && static_cast<std::size_t>(red_hits) >= kMinPolicyHits && red_cvar > diff_cvar,
         fmt("red policy %ld/%zu; rolling CVaR red-cvar-q %.4f vs diff-q %.4f", long(red_hits), kSeeds,
             red_cvar, diff_cvar));

  const double oracle =
      enumerate_optimal_policy(rpbp_model(), Objective::AverageReward, 0.25, 0.1).value;
  const auto blue_hits = std::count_if(diff.begin(), diff.end(),
                                       [](const auto& r) { return r.summary.greedy_policy == kAllBlue; });
  const auto in_band = std::count_if(diff.begin(), diff.end(), [&](const auto& r) {
    return std::abs(r.summary.final_rolling_mean - oracle) <= kMeanBand;
  });
  const double diff_mean = mean_of(diff, [](const auto& r) { return r.summary.final_rolling_mean; });
  report("rpbp risk-neutral baseline",
         ok_all(diff) && static_cast<std::size_t>(blue_hits) >= kMinPolicyHits &&
             static_cast<std::size_t>(in_band) >= kMinPolicyHits,
         fmt("blue policy %ld/%zu; rolling mean within %.2f of %.4f in %ld/%zu (mean %.4f)",
             long(blue_hits), kSeeds, kMeanBand, oracle, long(in_band), kSeeds, diff_mean));
}

// --- 3 ---------------------------------------------------------------------

void tau_flip() {
  bool pass = true;
  std::string detail;
  for (double tau : kFigD4Taus) {
    const auto rs = run_seeds(figd4_config(tau), kSeeds);
    const bool low = tau < 0.8;
    const auto hits = std::count_if(rs.begin(), rs.end(), [&](const auto& r) {
      const double blue = r.summary.time_in_state.at(rpbp::kBlueWorld);
      return low ? blue < kLowBlue : blue > kHighBlue;
    });
    pass = pass && ok_all(rs) && static_cast<std::size_t>(hits) * 2 > kSeeds;
    detail += fmt("%s%.2f:%ld", detail.empty() ? "" : " ", tau, long(hits));
  }
  report("tau flip", pass, "seeds on the expected side per tau: " + detail);
}

// --- 4 ---------------------------------------------------------------------

void estimate_convergence() {
  auto c = fig3a_config();
  const auto model = rpbp_model(c.rpbp);
  double worst_var = 0, worst_cvar = 0;
  bool ok = true;
  for (std::size_t seed = 0; seed < kEstimateRuns; ++seed) {
    const auto r = run(c, seed);
    if (r.status != RunStatus::Ok) {
      ok = false;
      continue;
    }
    const auto& var = r.series.subtask_estimates.at(0);
    const auto& cvar = r.series.primary_estimate;
    const auto n = static_cast<std::ptrdiff_t>(kEstimateTail);
    const double var_mean = std::accumulate(var.end() - n, var.end(), 0.0) / kEstimateTail;
    const double cvar_mean = std::accumulate(cvar.end() - n, cvar.end(), 0.0) / kEstimateTail;

    // Behaviour at the end of the run: epsilon-greedy on the final greedy policy.
    const auto behavior = DiscretePolicy::epsilon_greedy(r.summary.greedy_policy, 2, c.epsilon);
    const auto limit = limiting_reward_distribution(model, behavior);
    RngStream rng(seed, "oracle");
    std::vector<double> draws(kOracleSamples);
    for (auto& x : draws) x = limit.sample(rng);
    const auto k = static_cast<std::size_t>(std::ceil(c.tau * kOracleSamples));
    std::nth_element(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(k - 1), draws.end());
    const double oracle_var = draws[k - 1];
    const double oracle_cvar =
        std::accumulate(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(k), 0.0) / k;
    worst_var = std::max(worst_var, std::abs(var_mean - oracle_var));
    worst_cvar = std::max(worst_cvar, std::abs(cvar_mean - oracle_cvar));
  }
  report("estimate convergence", ok && worst_var <= kEstimateBand && worst_cvar <= kEstimateBand,
         fmt("%zu runs, worst |VaR - oracle| %.4f, worst |CVaR - oracle| %.4f (band %.2f)",
             kEstimateRuns, worst_var, worst_cvar, kEstimateBand));
}

// --- 5 ---------------------------------------------------------------------

bool linear_identity() {
  RngStream rng(101, "linear-f");
  std::vector<double> betas;
  for (int k = 0; k < kLinearDraws; ++k) {
    const std::size_t n = 1 + rng.uniform_index(4);
    std::vector<double> coefs(n), z(n);
    for (auto& b : coefs) b = rng.uniform(0.1, 5.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    for (auto& x : z) x = rng.uniform(-10, 10);
    const auto f = SubtaskFunction::linear(rng.uniform(-3, 3), rng.uniform(-3, 3), coefs);
    const double r = rng.uniform(-10, 10), r_bar = rng.uniform(-10, 10), delta = rng.uniform(-10, 10);
    reward_extended_td_errors(f, r, z, r_bar, delta, betas);
    for (std::size_t i = 0; i < n; ++i) {
      if (betas[i] != (-1.0 / coefs[i]) * delta) return false;
    }
  }
  return true;
}

bool zero_mean_errors(double& worst_z) {
  const double p_low = 0.35;
  MdpModel model;
  model.state_names = {"a", "b", "c"};
  model.action_names = {"only"};
  model.transitions = {{{0.1, 0.6, 0.3}}, {{0.5, 0.2, 0.3}}, {{0.3, 0.3, 0.4}}};
  const std::vector<double> low{-1.2, -0.9, -1.6}, high{0.4, 1.1, 0.8};
  for (std::size_t s = 0; s < 3; ++s) {
    model.rewards.push_back({RewardDistribution::mixture(
        {RewardComponent{ComponentKind::Gaussian, p_low, low[s], 0.05},
         RewardComponent{ComponentKind::Gaussian, 1.0 - p_low, high[s], 0.05}})});
  }
  RngStream draw(102, "coefs");
  SubtaskFunction f;
  f.num_subtasks = 2;
  f.breakpoints = {-INFINITY, 0.0, INFINITY};
  for (int j = 0; j < 2; ++j) {
    Segment seg;
    seg.reward_coef = draw.uniform(0.5, 2.0);
    seg.constant = draw.uniform(-1, 1);
    seg.subtask_coefs = {draw.uniform(0.5, 2.0), -draw.uniform(0.5, 2.0)};
    f.segments.push_back(seg);
  }
  require_valid(f);
  const std::vector<double> z{draw.uniform(-1, 1), draw.uniform(-1, 1)};
  MdpModel extended = model;
  for (std::size_t s = 0; s < 3; ++s) {
    extended.rewards[s][0] = RewardDistribution::point(p_low * segment_value(f.segments[0], low[s], z) +
                                                       (1 - p_low) * segment_value(f.segments[1], high[s], z));
  }
  const auto policy = DiscretePolicy::fixed({0, 0, 0}, 1);
  const auto eval = exact_policy_evaluation(extended, policy);
  const auto mu = stationary_distribution(model.policy_transition_matrix(policy));

  ModelEnvironment env(model);
  RngStream rng(103, "env");
  StateId s = sample_categorical(mu, rng);
  double sum[2] = {0, 0}, sum2[2] = {0, 0};
  std::vector<double> betas;
  for (int t = 0; t < kZeroMeanTransitions; ++t) {
    const EnvStep e = env.step(s, 0, rng);
    const double delta = extended_reward(f, e.reward, z) - eval.average_reward +
                         eval.values[e.next_state] - eval.values[s];
    reward_extended_td_errors(f, e.reward, z, eval.average_reward, delta, betas);
    for (int i = 0; i < 2; ++i) {
      sum[i] += betas[i];
      sum2[i] += betas[i] * betas[i];
    }
    s = e.next_state;
  }
  worst_z = 0;
  for (int i = 0; i < 2; ++i) {
    const double m = sum[i] / kZeroMeanTransitions;
    const double se = std::sqrt((sum2[i] / kZeroMeanTransitions - m * m) / kZeroMeanTransitions);
    worst_z = std::max(worst_z, std::abs(m) / se);
  }
  return worst_z <= kSeBand;
}

bool coupling(double& worst_rel) {
  RedPillBluePill env;
  const double eta = 0.7;
  auto st = TabularLearnerState::make_q(2, 2, StepSizeSchedule::constant(2e-2, eta));
  RngStream rng(104, "env");
  StateId s = env.initial_state(rng);
  worst_rel = 0;
  for (int t = 0; t < 100'000; ++t) {
    const ActionId a = rng.uniform_index(2);
    const EnvStep e = env.step(s, a, rng);
    differential_q_step(st, Transition{s, a, e.reward, e.next_state});
    const double sum_q = std::accumulate(st.values.begin(), st.values.end(), 0.0);
    const double rel = std::abs(st.r_bar - eta * sum_q) / std::max(1e-3, std::abs(st.r_bar));
    worst_rel = std::max(worst_rel, rel);
    s = e.next_state;
  }
  return worst_rel <= kCouplingRel;
}

bool identity_matches_differential() {
  RedPillBluePill env;
  const auto learner = TabularLearnerState::make_q(2, 2, StepSizeSchedule::constant(2e-2, 0.5));
  TabularRunSpec diff{TabularLearnerKind::DifferentialQ, 100'000, 0.1};
  TabularRunSpec red = diff;
  red.kind = TabularLearnerKind::RedQ;
  red.subtask_function = SubtaskFunction::identity();
  for (std::uint64_t seed : {0, 1, 2}) {
    const auto a = run_loop(env, learner, diff, seed);
    const auto b = run_loop(env, learner, red, seed);
    if (!(a.trajectory.reward == b.trajectory.reward &&
          a.trajectory.primary_estimate == b.trajectory.primary_estimate &&
          a.trajectory.action == b.trajectory.action && a.final_state.values == b.final_state.values)) {
      return false;
    }
  }
  return true;
}

void property_suite() {
  const bool a = linear_identity();
  double z = 0, rel = 0;
  const bool b = zero_mean_errors(z);
  const bool c = coupling(rel);
  const bool d = identity_matches_differential();
  report("framework properties", a && b && c && d,
         fmt("(a) linear identity %s; (b) max |mean beta|/SE %.2f; (c) coupling rel err %.1e; "
             "(d) identity RED %s",
             a ? "exact" : "BROKEN", z, rel, d ? "bit-identical" : "DIFFERS"));
}

// --- 6 ---------------------------------------------------------------------

void oracle_consistency() {
  RngStream rng(105, "models");
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    MdpModel m;
    m.state_names = {"s0", "s1", "s2", "s3", "s4"};
    m.action_names = {"a0", "a1"};
    m.transitions.assign(5, std::vector<std::vector<double>>(2, std::vector<double>(5)));
    m.rewards.assign(5, std::vector<RewardDistribution>(2, RewardDistribution::point(0.0)));
    for (std::size_t s = 0; s < 5; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        double total = 0;
        for (auto& p : m.transitions[s][a]) total += p = 0.05 + rng.uniform();
        for (auto& p : m.transitions[s][a]) p /= total;
        m.rewards[s][a] = RewardDistribution::gaussian(rng.uniform(-2, 2), rng.uniform(0.01, 1));
      }
    }
    const auto pol = DiscretePolicy::epsilon_greedy(
        {rng.uniform_index(2), rng.uniform_index(2), rng.uniform_index(2), rng.uniform_index(2),
         rng.uniform_index(2)},
        2, rng.uniform());
    worst = std::max(worst, std::abs(exact_policy_evaluation(m, pol).average_reward -
                                     exact_average_reward(m, pol)));
  }

  const auto model = rpbp_model();
  std::vector<RewardDistribution> dists{RpbpConfig{}.red_distribution(), RpbpConfig{}.blue_distribution()};
  for (const auto& acts : {kAllRed, kAllBlue, std::vector<ActionId>{0, 1}, std::vector<ActionId>{1, 0}}) {
    dists.push_back(limiting_reward_distribution(model, DiscretePolicy::epsilon_greedy(acts, 2, 0.1)));
  }
  double worst_z = 0;
  RngStream mc(106, "mc");
  for (const auto& d : dists) {
    for (double tau : {0.1, 0.25, 0.5, 0.9}) {
      const auto est = mc_cvar([&](RngStream& g) { return d.sample(g); }, tau, kOracleSamples, mc);
      worst_z = std::max(worst_z, std::abs(est.estimate - d.cvar(tau)) / est.standard_error);
    }
  }
  report("oracle self-consistency", worst <= kOracleAgreement && worst_z <= kMcSeBand,
         fmt("max policy-eval gap %.1e on 100 MDPs; max |MC - analytic|/SE %.2f over %zu dists x 4 tau",
             worst, worst_z, dists.size()));
}

// --- 7 ---------------------------------------------------------------------

ExperimentConfig pendulum_config(Preset p) {
  ExperimentConfig c;
  c.environment = EnvironmentId::Pendulum;
  c.algorithm = p;
  c.steps = 100'000;
  c.window = 1000;
  c.alpha = 2e-3;
  if (p == Preset::DiffAc) {
    c.eta_pi = 2.0;
    c.eta_r_bar = 1e-2;
  } else {
    c.eta_pi = 1.0;
    c.eta_r_bar = 1e-2;
    c.eta_var = 1e-3;
    c.tau = 0.1;
  }
  return c;
}

void pendulum() {
  auto random = pendulum_config(Preset::DiffAc);
  random.learn = false;
  const auto base = run_seeds(random, kPendulumSeeds);
  const auto diff = run_seeds(pendulum_config(Preset::DiffAc), kPendulumSeeds);
  const auto red = run_seeds(pendulum_config(Preset::RedCvarAc), kPendulumSeeds);
  auto final_mean = [](const auto& r) { return r.summary.final_rolling_mean; };
  const double b = mean_of(base, final_mean), d = mean_of(diff, final_mean), r = mean_of(red, final_mean);
  const double gain_d = (d - b) / std::abs(b), gain_r = (r - b) / std::abs(b);
  const double gap = std::abs(d - r) / std::max(std::abs(d), std::abs(r));
  report("pendulum agreement",
         ok_all(base) && ok_all(diff) && ok_all(red) && gain_d >= kPendulumImprovement &&
             gain_r >= kPendulumImprovement && gap <= kPendulumAgreement,
         fmt("rolling mean random %.3f, diff-ac %.3f (+%.0f%%), red-cvar-ac %.3f (+%.0f%%), gap %.1f%%", b, d,
             100 * gain_d, r, 100 * gain_r, 100 * gap));
}

}  // namespace

int main() {
  set_warnings_enabled(false);
  const auto start = std::chrono::steady_clock::now();
  try {
    rpbp_control();
    tau_flip();
    estimate_convergence();
    property_suite();
    oracle_consistency();
    pendulum();
  } catch (const std::exception& e) {
    std::printf("FAIL  acceptance aborted: %s\n", e.what());
    return 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d criteria failed (%.0f s)\n", failures, secs);
  return failures;
}
