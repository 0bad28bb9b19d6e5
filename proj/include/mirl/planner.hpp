#pragma once

#include <cstdint>
#include <vector>

#include "mirl/env.hpp"
#include "mirl/reward.hpp"

namespace mirl {

struct PlannerConfig {
  int budget = 2000;         // MCTS iterations per decision step
  double c = 5.0;            // softmax coefficient
  double exploration = 1.0;  // UCT constant
  double pw_k = 2.0;
  double pw_alpha = 0.5;
  std::vector<double> ax_template{-3.0, -1.0, 0.0, 1.0, 3.0};
  /// Empty means {-w/t_lc, 0, +w/t_lc} with t_lc = lane_change_time.
  std::vector<double> vy_template;
  double lane_change_time = 3.2;
  double jitter_ax = 0.25;
  double jitter_vy = 0.1;
  double gamma = 1.0;

  bool operator==(const PlannerConfig&) const = default;
};

/// Cartesian product of the ax and vy templates with the scenario's dt.
std::vector<Action> action_templates(const Scenario& scenario, const PlannerConfig& cfg);

/// Search root: joint state at time t, the previous joint state (equal to
/// the current one at t = 0) and each agent's discounted reward so far.
struct SearchRoot {
  int t = 0;
  JointState states;
  JointState prev;
  std::vector<double> prefix;

  static SearchRoot initial(JointState s);
};

/// Explored root actions of one agent with visit counts and mean values.
struct AgentQ {
  std::vector<Action> actions;
  std::vector<double> q;
  std::vector<int> visits;

  std::size_t argmax() const;
};

/// Per-step reward of one agent; prev is the agent's state one step earlier.
double step_reward(const RewardModel& model, const AgentSpec& spec, const Road& road,
                   const AgentState& prev, const AgentState& state, const Action& action,
                   Terminal flag);

/// Runs `budget` iterations of decoupled UCT with progressive widening.
/// Q values estimate each agent's length-normalized trajectory return.
std::vector<AgentQ> mcts_q_estimate(const RewardModel& model, const Scenario& scenario,
                                    const SearchRoot& root, const PlannerConfig& cfg,
                                    std::uint64_t seed);

struct AgentSelection {
  std::size_t index = 0;
  Action action;
  double prob = 1.0;
  std::vector<double> distribution;
};

struct PlanStepResult {
  std::vector<AgentSelection> agents;
};

/// Softmax over c * Q per agent (max-subtracted), one sampled action each.
PlanStepResult softmax_q_proposal(const std::vector<AgentQ>& q, double c, std::uint64_t seed);
/// Argmax-Q per agent (lowest index on ties) with a degenerate distribution.
PlanStepResult greedy_selection(const std::vector<AgentQ>& q);

std::vector<double> softmax(const std::vector<double>& q, double c);

struct StepRecord {
  std::vector<double> distribution;
  std::size_t chosen = 0;
};

/// One sampled agent trajectory with its sampling log-probability.
struct SampledBatchEntry {
  Trajectory trajectory;
  double log_prob = 0.0;
  std::uint64_t seed = 0;
  std::vector<StepRecord> records;
};

/// Sum of log chosen-probabilities reconstructed from the stored records.
double replay_log_prob(const SampledBatchEntry& entry);

/// Samples s0, then at every step re-plans, samples each agent's action
/// from the softmax proposal and advances the environment. One entry per agent.
std::vector<SampledBatchEntry> generate_samples(const RewardModel& model,
                                                const Scenario& scenario,
                                                const PlannerConfig& cfg, std::uint64_t seed);

/// As generate_samples with greedy final selection; log_prob is 0.
std::vector<SampledBatchEntry> plan_expert(const Scenario& scenario,
                                           const RewardModel& baseline,
                                           const PlannerConfig& cfg, std::uint64_t seed);

}  // namespace mirl
