#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mirl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Road {
  int lane_count = 1;
  double lane_width = 3.5;  // m
  double length = 500.0;    // m

  double width() const { return lane_count * lane_width; }
  double lane_center(int lane) const { return (lane + 0.5) * lane_width; }
  /// Lane index of lateral position y, clamped to the road's lanes.
  int lane_of(double y) const;
};

struct AgentState {
  double x = 0.0;  // m
  double y = 0.0;  // m
  double v = 0.0;  // m/s

  bool operator==(const AgentState&) const = default;
};

struct Action {
  double ax = 0.0;  // m/s^2
  double vy = 0.0;  // m/s
  double dt = 0.8;  // s

  bool operator==(const Action&) const = default;
};

struct Limits {
  double ax_max = 4.0;
  double vy_max = 2.0;

  bool feasible(const Action& a) const;
};

struct Footprint {
  double length = 5.0;
  double width = 2.0;
};

/// Axis-aligned static obstacle.
struct Obstacle {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
};

struct AgentSpec {
  double mean_x = 0.0;
  double std_x = 0.0;
  double mean_y = 0.0;
  double std_y = 0.0;
  double start_v = 0.0;
  int desired_lane = 0;
  double desired_velocity = 1.0;
};

enum class Terminal { none, collision, invalid_state, invalid_action };

std::string to_string(Terminal t);
Terminal terminal_from_string(const std::string& s);

struct Scenario {
  std::string name;
  Road road;
  std::vector<AgentSpec> agents;
  std::vector<Obstacle> obstacles;
  int horizon = 13;  // decision steps
  double dt = 0.8;   // s per step
  Limits limits;
  Footprint footprint;

  double duration() const { return horizon * dt; }
  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

struct Step {
  AgentState state;
  Action action;

  bool operator==(const Step&) const = default;
};

/// One agent's path through the environment. steps[t] is the pair
/// (s_t, a_t); if terminal != none the last step is the one that triggered it.
struct Trajectory {
  int agent_id = 0;
  double dt = 0.8;
  int horizon = 0;
  AgentState start;
  std::vector<Step> steps;
  Terminal terminal = Terminal::none;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  bool operator==(const Trajectory&) const = default;
};

using JointState = std::vector<AgentState>;
using JointAction = std::vector<Action>;
/// Returns one action per agent given the time index and joint state.
using JointPolicy = std::function<JointAction(int t, const JointState&)>;

AgentState sample_start_state(const Scenario& scenario, std::size_t agent_index,
                              std::uint64_t seed);
JointState sample_start_states(const Scenario& scenario, std::uint64_t seed);

/// Deterministic point-mass transition with speed clamped at zero.
AgentState step(const AgentState& s, const Action& a);

bool off_road(const AgentState& s, const Road& road);

/// Per-agent terminal flag for the given joint states and actions.
/// Priority: collision > invalid_state > invalid_action.
std::vector<Terminal> classify_step(std::span<const AgentState> states,
                                    std::span<const Action> actions, const Road& road,
                                    std::span<const Obstacle> obstacles,
                                    const Limits& limits, const Footprint& footprint);

/// Result of applying a joint action: successor states and the flag of
/// each agent's (s_t, a_t) step, classified on the successor states.
struct Transition {
  JointState next;
  std::vector<Terminal> flags;
  bool any_terminal = false;
};

Transition transition(const Scenario& scenario, const JointState& states,
                      const JointAction& actions);

std::vector<Trajectory> rollout(const Scenario& scenario, const JointPolicy& policy,
                                std::uint64_t seed);

/// Replays the stored actions from the start state; true iff every stored
/// state is reproduced exactly.
bool replay_consistent(const Trajectory& traj);

}  // namespace mirl
