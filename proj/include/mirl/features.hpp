#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "mirl/env.hpp"

namespace mirl {

inline constexpr double kGravity = 9.81;
inline constexpr std::size_t kNumFeatures = 7;
inline constexpr std::size_t kNumAugmented = 10;

enum FeatureIndex : std::size_t {
  kDesLane = 0,
  kDesVelocity,
  kLaneCenter,
  kAcceleration,
  kCollision,
  kInvalidState,
  kInvalidAction,
};

/// Column names in storage order.
extern const std::array<const char*, kNumFeatures> kFeatureNames;
extern const std::array<const char*, kNumAugmented> kAugmentedNames;

/// Continuous components in [-1, 1]; terminal components in {0, 1}.
using FeatureVector = std::array<double, kNumFeatures>;
/// FeatureVector plus the previous step's desLane, desVelocity, laneCenter.
using AugmentedFeatureVector = std::array<double, kNumAugmented>;

/// Acceleration proxy c_acc of one step: (1/g) * RMS of a(t) over the step.
/// Longitudinal ax and lateral (vy - prev_vy)/dt are constant over the
/// step, so the integral reduces to their Euclidean norm.
double acceleration_cost(const Action& action, double prev_vy);

FeatureVector feature_step(const AgentState& state, const Action& action,
                           const AgentState& prev_state, const AgentSpec& spec,
                           const Road& road, Terminal flag);

/// Per-step features of a trajectory; prev_state of step 0 is the state itself.
std::vector<FeatureVector> feature_sequence(const Trajectory& traj, const AgentSpec& spec,
                                            const Road& road);

/// Component-wise mean of the per-step features. Throws on empty trajectories.
FeatureVector feature_trajectory(const Trajectory& traj, const AgentSpec& spec,
                                 const Road& road);

std::vector<AugmentedFeatureVector> augment(std::span<const FeatureVector> sequence);

/// One CSV row per (trajectory, step) with the feature columns in storage order.
void write_feature_csv(std::ostream& os,
                       std::span<const std::vector<FeatureVector>> per_trajectory);

}  // namespace mirl
