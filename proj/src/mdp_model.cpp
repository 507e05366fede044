#include "redrl/mdp_model.hpp"

#include <cmath>

namespace redrl {

using nlohmann::json;

void MdpModel::validate() const {
  const std::size_t ns = num_states(), na = num_actions();
  if (ns == 0 || na == 0) throw Error(ErrorCode::InvalidInput, "model needs states and actions");
  if (transitions.size() != ns || rewards.size() != ns) {
    throw Error(ErrorCode::InvalidInput, "model tables do not match the state count");
  }
  for (std::size_t s = 0; s < ns; ++s) {
    if (transitions[s].size() != na || rewards[s].size() != na) {
      throw Error(ErrorCode::InvalidInput, "model tables do not match the action count");
    }
    for (std::size_t a = 0; a < na; ++a) {
      const auto& row = transitions[s][a];
      if (row.size() != ns) throw Error(ErrorCode::InvalidInput, "kernel row has wrong length");
      double total = 0.0;
      for (double p : row) {
        if (!(p >= 0.0)) throw Error(ErrorCode::InvalidInput, "negative transition probability");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-12) {
        throw Error(ErrorCode::InvalidInput, "kernel row (" + std::to_string(s) + ", " +
                                                 std::to_string(a) + ") does not sum to 1");
      }
    }
  }
}

Eigen::MatrixXd MdpModel::policy_transition_matrix(const DiscretePolicy& policy) const {
  const std::size_t ns = num_states(), na = num_actions();
  if (policy.num_states() != ns || policy.num_actions() != na) {
    throw Error(ErrorCode::InvalidInput, "policy shape does not match the model");
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(ns, ns);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      const double pa = policy.probability(s, a);
      if (pa == 0.0) continue;
      for (std::size_t t = 0; t < ns; ++t) p(s, t) += pa * transitions[s][a][t];
    }
  }
  return p;
}

Eigen::VectorXd MdpModel::policy_reward_means(const DiscretePolicy& policy) const {
  const std::size_t ns = num_states(), na = num_actions();
  if (policy.num_states() != ns || policy.num_actions() != na) {
    throw Error(ErrorCode::InvalidInput, "policy shape does not match the model");
  }
  Eigen::VectorXd r = Eigen::VectorXd::Zero(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) r(s) += policy.probability(s, a) * rewards[s][a].mean();
  }
  return r;
}

RewardDistribution MdpModel::policy_state_reward(const DiscretePolicy& policy, StateId s) const {
  std::vector<double> w(policy.row(s).begin(), policy.row(s).end());
  return RewardDistribution::combine(w, rewards.at(s));
}

namespace {

json component_to_json(const RewardComponent& c) {
  if (c.kind == ComponentKind::PointMass) {
    return json{{"kind", "point"}, {"weight", c.weight}, {"value", c.mean}};
  }
  return json{{"kind", "gaussian"}, {"weight", c.weight}, {"mean", c.mean}, {"stdev", c.stdev}};
}

RewardComponent component_from_json(const json& j, double weight) {
  const std::string kind = j.at("kind").get<std::string>();
  RewardComponent c;
  c.weight = j.value("weight", weight);
  if (kind == "point") {
    c.kind = ComponentKind::PointMass;
    c.mean = j.at("value").get<double>();
  } else if (kind == "gaussian") {
    c.kind = ComponentKind::Gaussian;
    c.mean = j.at("mean").get<double>();
    c.stdev = j.at("stdev").get<double>();
  } else {
    throw Error(ErrorCode::InvalidInput, "unknown reward component kind '" + kind + "'");
  }
  return c;
}

}  // namespace

json distribution_to_json(const RewardDistribution& d) {
  json j;
  const auto& comps = d.components();
  if (comps.size() == 1) {
    j = component_to_json(comps.front());
    j.erase("weight");
  } else {
    j["kind"] = "mixture";
    j["components"] = json::array();
    for (const auto& c : comps) j["components"].push_back(component_to_json(c));
  }
  if (d.cap()) j["cap"] = *d.cap();
  return j;
}

RewardDistribution distribution_from_json(const json& j) {
  try {
    RewardDistribution d;
    if (j.at("kind").get<std::string>() == "mixture") {
      std::vector<RewardComponent> comps;
      for (const auto& cj : j.at("components")) comps.push_back(component_from_json(cj, 0.0));
      d = RewardDistribution::mixture(std::move(comps));
    } else {
      d = RewardDistribution::mixture({component_from_json(j, 1.0)});
    }
    if (j.contains("cap")) d = d.with_cap(j.at("cap").get<double>());
    return d;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("bad reward distribution: ") + e.what());
  }
}

json model_to_json(const MdpModel& model) {
  json j;
  j["states"] = model.state_names;
  j["actions"] = model.action_names;
  j["transitions"] = model.transitions;
  json rewards = json::array();
  for (const auto& row : model.rewards) {
    json r = json::array();
    for (const auto& d : row) r.push_back(distribution_to_json(d));
    rewards.push_back(std::move(r));
  }
  j["rewards"] = std::move(rewards);
  return j;
}

MdpModel model_from_json(const json& j) {
  MdpModel m;
  try {
    m.state_names = j.at("states").get<std::vector<std::string>>();
    m.action_names = j.at("actions").get<std::vector<std::string>>();
    m.transitions = j.at("transitions").get<std::vector<std::vector<std::vector<double>>>>();
    for (const auto& row : j.at("rewards")) {
      std::vector<RewardDistribution> r;
      for (const auto& d : row) r.push_back(distribution_from_json(d));
      m.rewards.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("bad model file: ") + e.what());
  }
  m.validate();
  return m;
}

ModelEnvironment::ModelEnvironment(MdpModel model) : model_(std::move(model)) {
  model_.validate();
}

StateId ModelEnvironment::initial_state(RngStream& env_rng) {
  return env_rng.uniform_index(model_.num_states());
}

EnvStep ModelEnvironment::step(StateId s, ActionId a, RngStream& env_rng) {
  EnvStep out;
  out.reward = model_.rewards.at(s).at(a).sample(env_rng);
  out.next_state = sample_categorical(model_.transitions[s][a], env_rng);
  return out;
}

}  // namespace redrl
