#include "redrl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace redrl {

using nlohmann::json;

std::string_view environment_name(EnvironmentId id) {
  switch (id) {
    case EnvironmentId::Rpbp: return "rpbp";
    case EnvironmentId::Pendulum: return "pendulum";
    case EnvironmentId::Model: return "model";
  }
  return "unknown";
}

EnvironmentId parse_environment(std::string_view name) {
  if (name == "rpbp") return EnvironmentId::Rpbp;
  if (name == "pendulum") return EnvironmentId::Pendulum;
  if (name == "model") return EnvironmentId::Model;
  throw Error(ErrorCode::InvalidInput, "unknown environment '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidInput, m); };
  if (steps < 1) fail("steps must be >= 1");
  if (seeds.empty()) fail("seeds must be non-empty");
  if (window < 1) fail("window must be >= 1");
  if (window > steps) fail("window (" + std::to_string(window) + ") exceeds steps (" +
                           std::to_string(steps) + ")");
  if (record_every < 1) fail("record_every must be >= 1");
  if (!(tau > 0.0 && tau < 1.0)) fail("tau must lie in (0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) fail("epsilon must lie in [0, 1]");
  if (alpha_kind == ScheduleKind::Constant && !(alpha > 0.0)) fail("alpha must be > 0");
  if (!(eta_r_bar > 0.0) || !(eta_var > 0.0) || !(eta_pi > 0.0)) fail("etas must be > 0");
  if (!std::isfinite(initial_r_bar) || !std::isfinite(initial_var)) {
    fail("initial estimates must be finite");
  }
  if (!(divergence_limit > 0.0)) fail("divergence_limit must be > 0");

  const bool tabular = preset_is_tabular(algorithm);
  switch (environment) {
    case EnvironmentId::Rpbp:
      rpbp.validate();
      if (!tabular) fail("rpbp needs a tabular preset (diff-q or red-cvar-q)");
      break;
    case EnvironmentId::Model:
      if (!model) fail("model environment needs a model");
      model->validate();
      if (!tabular) fail("model environments need a tabular preset");
      break;
    case EnvironmentId::Pendulum:
      pendulum.validate();
      if (tabular) fail("pendulum needs an actor-critic preset (diff-ac or red-cvar-ac)");
      if (tilings < 1 || tiles_per_dim < 1) fail("tile coding needs tilings and tiles >= 1");
      if (alpha_kind != ScheduleKind::Constant) fail("actor-critic presets need a constant alpha");
      break;
  }
}

namespace {

json rpbp_to_json(const RpbpConfig& c) {
  return json{{"red_mean", c.red_mean},
              {"red_stdev", c.red_stdev},
              {"blue_low_mean", c.blue_low_mean},
              {"blue_low_stdev", c.blue_low_stdev},
              {"blue_high_mean", c.blue_high_mean},
              {"blue_high_stdev", c.blue_high_stdev},
              {"mix_coefficient", c.mix_coefficient},
              {"reward_cap", c.reward_cap}};
}

RpbpConfig rpbp_from_json(const json& j) {
  RpbpConfig c;
  c.red_mean = j.value("red_mean", c.red_mean);
  c.red_stdev = j.value("red_stdev", c.red_stdev);
  c.blue_low_mean = j.value("blue_low_mean", c.blue_low_mean);
  c.blue_low_stdev = j.value("blue_low_stdev", c.blue_low_stdev);
  c.blue_high_mean = j.value("blue_high_mean", c.blue_high_mean);
  c.blue_high_stdev = j.value("blue_high_stdev", c.blue_high_stdev);
  c.mix_coefficient = j.value("mix_coefficient", c.mix_coefficient);
  c.reward_cap = j.value("reward_cap", c.reward_cap);
  return c;
}

json pendulum_to_json(const PendulumConfig& c) {
  return json{{"mass", c.mass},
              {"length", c.length},
              {"gravity", c.gravity},
              {"timestep", c.timestep},
              {"torques", c.torques},
              {"max_speed", c.max_speed},
              {"angle_cost", c.angle_cost},
              {"velocity_cost", c.velocity_cost},
              {"torque_cost", c.torque_cost},
              {"init_angle_low", c.init_angle_low},
              {"init_angle_high", c.init_angle_high},
              {"init_velocity_low", c.init_velocity_low},
              {"init_velocity_high", c.init_velocity_high},
              {"reset_interval", c.reset_interval}};
}

PendulumConfig pendulum_from_json(const json& j) {
  PendulumConfig c;
  c.mass = j.value("mass", c.mass);
  c.length = j.value("length", c.length);
  c.gravity = j.value("gravity", c.gravity);
  c.timestep = j.value("timestep", c.timestep);
  c.torques = j.value("torques", c.torques);
  c.max_speed = j.value("max_speed", c.max_speed);
  c.angle_cost = j.value("angle_cost", c.angle_cost);
  c.velocity_cost = j.value("velocity_cost", c.velocity_cost);
  c.torque_cost = j.value("torque_cost", c.torque_cost);
  c.init_angle_low = j.value("init_angle_low", c.init_angle_low);
  c.init_angle_high = j.value("init_angle_high", c.init_angle_high);
  c.init_velocity_low = j.value("init_velocity_low", c.init_velocity_low);
  c.init_velocity_high = j.value("init_velocity_high", c.init_velocity_high);
  c.reset_interval = j.value("reset_interval", c.reset_interval);
  return c;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "environment", "algorithm",    "alpha",         "eta_r_bar",   "eta_var",
      "eta_pi",      "epsilon",      "tau",           "steps",       "seeds",
      "record_every", "window",      "initial_r_bar", "initial_var", "tilings",
      "tiles_per_dim", "learn",      "divergence_limit", "sweep"};
  return keys;
}

json breakpoint_to_json(double b) {
  if (std::isinf(b)) return b < 0 ? json("-inf") : json("inf");
  return json(b);
}

double breakpoint_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "-inf") return -INFINITY;
    if (s == "inf") return INFINITY;
    throw Error(ErrorCode::InvalidInput, "bad breakpoint '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace

json config_to_json(const ExperimentConfig& c) {
  json env{{"id", environment_name(c.environment)}};
  switch (c.environment) {
    case EnvironmentId::Rpbp: env["params"] = rpbp_to_json(c.rpbp); break;
    case EnvironmentId::Pendulum: env["params"] = pendulum_to_json(c.pendulum); break;
    case EnvironmentId::Model:
      if (c.model) env["params"] = model_to_json(*c.model);
      break;
  }
  json j{{"environment", env},
         {"algorithm", preset_name(c.algorithm)},
         {"eta_r_bar", c.eta_r_bar},
         {"eta_var", c.eta_var},
         {"eta_pi", c.eta_pi},
         {"epsilon", c.epsilon},
         {"tau", c.tau},
         {"steps", c.steps},
         {"seeds", c.seeds},
         {"record_every", c.record_every},
         {"window", c.window},
         {"initial_r_bar", c.initial_r_bar},
         {"initial_var", c.initial_var},
         {"tilings", c.tilings},
         {"tiles_per_dim", c.tiles_per_dim},
         {"learn", c.learn},
         {"divergence_limit", c.divergence_limit}};
  j["alpha"] = c.alpha_kind == ScheduleKind::InverseTime ? json("1/n") : json(c.alpha);
  if (!c.sweep.empty()) {
    json sw = json::object();
    for (const auto& axis : c.sweep) sw[axis.key] = axis.values;
    j["sweep"] = sw;
  }
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (!known_keys().contains(key)) {
        throw Error(ErrorCode::InvalidInput, "unknown config key '" + key + "'");
      }
    }
    if (!j.contains("environment") || !j.contains("algorithm")) {
      throw Error(ErrorCode::InvalidInput, "config needs 'environment' and 'algorithm'");
    }
    ExperimentConfig c;
    const json& env = j.at("environment");
    const json params = env.is_object() ? env.value("params", json::object()) : json::object();
    c.environment = parse_environment(env.is_string() ? env.get<std::string>()
                                                      : env.at("id").get<std::string>());
    switch (c.environment) {
      case EnvironmentId::Rpbp: c.rpbp = rpbp_from_json(params); break;
      case EnvironmentId::Pendulum: c.pendulum = pendulum_from_json(params); break;
      case EnvironmentId::Model: c.model = model_from_json(params); break;
    }
    c.algorithm = parse_preset(j.at("algorithm").get<std::string>());

    if (j.contains("alpha")) {
      const json& a = j.at("alpha");
      if (a.is_string()) {
        if (a.get<std::string>() != "1/n") {
          throw Error(ErrorCode::InvalidInput, "alpha must be a number or \"1/n\"");
        }
        c.alpha_kind = ScheduleKind::InverseTime;
        c.alpha = 1.0;
      } else {
        c.alpha_kind = ScheduleKind::Constant;
        c.alpha = a.get<double>();
      }
    }
    c.eta_r_bar = j.value("eta_r_bar", c.eta_r_bar);
    c.eta_var = j.value("eta_var", c.eta_var);
    c.eta_pi = j.value("eta_pi", c.eta_pi);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.tau = j.value("tau", c.tau);
    c.steps = j.value("steps", c.steps);
    if (j.contains("seeds")) {
      const json& s = j.at("seeds");
      if (s.is_object()) {
        const auto count = s.at("count").get<std::uint64_t>();
        const auto start = s.value("start", std::uint64_t{0});
        c.seeds.clear();
        for (std::uint64_t k = 0; k < count; ++k) c.seeds.push_back(start + k);
      } else {
        c.seeds = s.get<std::vector<std::uint64_t>>();
      }
    }
    c.record_every = j.value("record_every", c.record_every);
    c.window = j.value("window", c.window);
    c.initial_r_bar = j.value("initial_r_bar", c.initial_r_bar);
    c.initial_var = j.value("initial_var", c.initial_var);
    c.tilings = j.value("tilings", c.tilings);
    c.tiles_per_dim = j.value("tiles_per_dim", c.tiles_per_dim);
    c.learn = j.value("learn", c.learn);
    c.divergence_limit = j.value("divergence_limit", c.divergence_limit);
    if (j.contains("sweep")) {
      for (const auto& [key, values] : j.at("sweep").items()) {
        if (!known_keys().contains(key) || key == "sweep" || key == "environment" ||
            key == "seeds") {
          throw Error(ErrorCode::InvalidInput, "cannot sweep over '" + key + "'");
        }
        if (!values.is_array() || values.empty()) {
          throw Error(ErrorCode::InvalidInput, "sweep axis '" + key + "' needs a non-empty list");
        }
        c.sweep.push_back(SweepAxis{key, values.get<std::vector<json>>()});
      }
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, "config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig with_override(const ExperimentConfig& config, const std::string& key,
                               const json& value) {
  json j = config_to_json(config);
  j.erase("sweep");
  j[key] = value;
  return config_from_json(j);
}

json subtask_function_to_json(const SubtaskFunction& f) {
  json segs = json::array();
  for (const auto& s : f.segments) {
    segs.push_back(json{{"reward_coef", s.reward_coef},
                        {"constant", s.constant},
                        {"subtask_coefs", s.subtask_coefs},
                        {"target", s.target_reward == TargetReward::Observed ? "observed"
                                                                             : "primary-estimate"},
                        {"label", s.label}});
  }
  json bps = json::array();
  for (double b : f.breakpoints) bps.push_back(breakpoint_to_json(b));
  return json{{"num_subtasks", f.num_subtasks},
              {"rule", f.rule == SegmentRule::FixedBreakpoints ? "fixed" : "estimate-relative"},
              {"breakpoints", bps},
              {"pivot_subtask", f.pivot_subtask},
              {"segments", segs}};
}

SubtaskFunction subtask_function_from_json(const json& j) {
  try {
    SubtaskFunction f;
    f.num_subtasks = j.at("num_subtasks").get<std::size_t>();
    const auto rule = j.value("rule", std::string("fixed"));
    if (rule == "fixed") {
      f.rule = SegmentRule::FixedBreakpoints;
    } else if (rule == "estimate-relative") {
      f.rule = SegmentRule::EstimateRelative;
    } else {
      throw Error(ErrorCode::InvalidInput, "unknown segment rule '" + rule + "'");
    }
    for (const auto& b : j.value("breakpoints", json::array())) {
      f.breakpoints.push_back(breakpoint_from_json(b));
    }
    f.pivot_subtask = j.value("pivot_subtask", std::size_t{0});
    for (const auto& s : j.at("segments")) {
      Segment seg;
      seg.reward_coef = s.at("reward_coef").get<double>();
      seg.constant = s.value("constant", 0.0);
      seg.subtask_coefs = s.at("subtask_coefs").get<std::vector<double>>();
      const auto target = s.value("target", std::string("observed"));
      if (target == "observed") {
        seg.target_reward = TargetReward::Observed;
      } else if (target == "primary-estimate") {
        seg.target_reward = TargetReward::PrimaryEstimate;
      } else {
        throw Error(ErrorCode::InvalidInput, "unknown segment target '" + target + "'");
      }
      seg.label = s.value("label", std::string());
      f.segments.push_back(std::move(seg));
    }
    require_valid(f);
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("subtask function: ") + e.what());
  }
}

}  // namespace redrl
