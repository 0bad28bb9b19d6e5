#include "mirl/env.hpp"

#include <algorithm>
#include <cmath>

#include "mirl/seeding.hpp"

namespace mirl {

int Road::lane_of(double y) const {
  const int lane = static_cast<int>(std::floor(y / lane_width));
  return std::clamp(lane, 0, lane_count - 1);
}

bool Limits::feasible(const Action& a) const {
  return std::abs(a.ax) <= ax_max && std::abs(a.vy) <= vy_max;
}

std::string to_string(Terminal t) {
  switch (t) {
    case Terminal::none: return "none";
    case Terminal::collision: return "collision";
    case Terminal::invalid_state: return "invalid_state";
    case Terminal::invalid_action: return "invalid_action";
  }
  return "none";
}

Terminal terminal_from_string(const std::string& s) {
  if (s == "none") return Terminal::none;
  if (s == "collision") return Terminal::collision;
  if (s == "invalid_state") return Terminal::invalid_state;
  if (s == "invalid_action") return Terminal::invalid_action;
  throw ConfigError("unknown terminal flag '" + s + "'");
}

void Scenario::validate() const {
  auto fail = [this](const std::string& what) {
    throw ConfigError("scenario '" + name + "': " + what);
  };
  if (road.lane_count < 1) fail("lane_count must be >= 1");
  if (!(road.lane_width > 0.0)) fail("lane_width must be > 0");
  if (!(road.length > 0.0)) fail("road length must be > 0");
  if (horizon < 0) fail("horizon must be >= 0");
  if (!(dt > 0.0)) fail("dt must be > 0");
  if (agents.empty()) fail("at least one agent required");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    if (a.desired_lane < 0 || a.desired_lane >= road.lane_count)
      fail("agent " + std::to_string(i) + ": desired_lane out of range");
    if (!(a.desired_velocity > 0.0))
      fail("agent " + std::to_string(i) + ": desired_velocity must be > 0");
    if (a.std_x < 0.0 || a.std_y < 0.0 || a.start_v < 0.0)
      fail("agent " + std::to_string(i) + ": negative std or start speed");
  }
  if (!(limits.ax_max > 0.0) || !(limits.vy_max > 0.0)) fail("action limits must be > 0");
  if (!(footprint.length > 0.0) || !(footprint.width > 0.0)) fail("footprint must be > 0");
}

AgentState sample_start_state(const Scenario& scenario, std::size_t agent_index,
                              std::uint64_t seed) {
  const AgentSpec& spec = scenario.agents.at(agent_index);
  Rng rng = make_rng(derive_seed(seed, {agent_index}));
  const double zx = standard_normal(rng);
  const double zy = standard_normal(rng);
  AgentState s;
  s.x = std::clamp(spec.mean_x + spec.std_x * zx, 0.0, scenario.road.length);
  s.y = std::clamp(spec.mean_y + spec.std_y * zy, 0.0, scenario.road.width());
  s.v = spec.start_v;
  return s;
}

JointState sample_start_states(const Scenario& scenario, std::uint64_t seed) {
  JointState states;
  states.reserve(scenario.agents.size());
  for (std::size_t i = 0; i < scenario.agents.size(); ++i)
    states.push_back(sample_start_state(scenario, i, seed));
  return states;
}

AgentState step(const AgentState& s, const Action& a) {
  AgentState n;
  n.x = s.x + s.v * a.dt + 0.5 * a.ax * a.dt * a.dt;
  n.v = std::max(0.0, s.v + a.ax * a.dt);
  n.y = s.y + a.vy * a.dt;
  return n;
}

bool off_road(const AgentState& s, const Road& road) {
  return s.y < 0.0 || s.y > road.width();
}

namespace {

bool overlaps(double a_min, double a_max, double b_min, double b_max) {
  return a_min < b_max && b_min < a_max;
}

}  // namespace

std::vector<Terminal> classify_step(std::span<const AgentState> states,
                                    std::span<const Action> actions, const Road& road,
                                    std::span<const Obstacle> obstacles,
                                    const Limits& limits, const Footprint& footprint) {
  const std::size_t n = states.size();
  if (actions.size() != n) throw std::invalid_argument("classify_step: one action per agent");
  const double hl = 0.5 * footprint.length;
  const double hw = 0.5 * footprint.width;

  std::vector<bool> collided(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (overlaps(states[i].x - hl, states[i].x + hl, states[j].x - hl, states[j].x + hl) &&
          overlaps(states[i].y - hw, states[i].y + hw, states[j].y - hw, states[j].y + hw)) {
        collided[i] = collided[j] = true;
      }
    }
    for (const Obstacle& o : obstacles) {
      if (overlaps(states[i].x - hl, states[i].x + hl, o.x_min, o.x_max) &&
          overlaps(states[i].y - hw, states[i].y + hw, o.y_min, o.y_max)) {
        collided[i] = true;
      }
    }
  }

  std::vector<Terminal> flags(n, Terminal::none);
  for (std::size_t i = 0; i < n; ++i) {
    if (collided[i])
      flags[i] = Terminal::collision;
    else if (off_road(states[i], road))
      flags[i] = Terminal::invalid_state;
    else if (!limits.feasible(actions[i]))
      flags[i] = Terminal::invalid_action;
  }
  return flags;
}

Transition transition(const Scenario& scenario, const JointState& states,
                      const JointAction& actions) {
  if (actions.size() != states.size())
    throw std::invalid_argument("transition: one action per agent required");
  Transition tr;
  tr.next.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) tr.next.push_back(step(states[i], actions[i]));
  tr.flags = classify_step(tr.next, actions, scenario.road, scenario.obstacles, scenario.limits,
                           scenario.footprint);
  tr.any_terminal = std::any_of(tr.flags.begin(), tr.flags.end(),
                                [](Terminal f) { return f != Terminal::none; });
  return tr;
}

std::vector<Trajectory> rollout(const Scenario& scenario, const JointPolicy& policy,
                                std::uint64_t seed) {
  JointState states = sample_start_states(scenario, seed);
  std::vector<Trajectory> trajs(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    trajs[i].agent_id = static_cast<int>(i);
    trajs[i].dt = scenario.dt;
    trajs[i].horizon = scenario.horizon;
    trajs[i].start = states[i];
  }
  for (int t = 0; t < scenario.horizon; ++t) {
    JointAction actions = policy(t, states);
    if (actions.size() != states.size())
      throw std::runtime_error("rollout: policy returned wrong number of actions");
    for (auto& a : actions) a.dt = scenario.dt;
    Transition tr = transition(scenario, states, actions);
    for (std::size_t i = 0; i < states.size(); ++i) {
      trajs[i].steps.push_back({states[i], actions[i]});
      trajs[i].terminal = tr.flags[i];
    }
    if (tr.any_terminal) break;
    states = std::move(tr.next);
  }
  return trajs;
}

bool replay_consistent(const Trajectory& traj) {
  if (traj.steps.empty()) return true;
  if (!(traj.steps.front().state == traj.start)) return false;
  for (std::size_t t = 0; t + 1 < traj.steps.size(); ++t) {
    if (!(step(traj.steps[t].state, traj.steps[t].action) == traj.steps[t + 1].state))
      return false;
  }
  return true;
}

}  // namespace mirl
