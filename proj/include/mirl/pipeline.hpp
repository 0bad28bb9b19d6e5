#pragma once

#include <cstdint>
#include <vector>

#include "mirl/eval.hpp"
#include "mirl/io.hpp"
#include "mirl/planner.hpp"
#include "mirl/reward.hpp"

namespace mirl {

/// Seed stream tags for the master -> scenario -> episode hierarchy.
enum class SeedStream : std::uint64_t { experts = 1, train = 2, eval = 3 };

std::uint64_t scenario_seed(std::uint64_t master, std::size_t scenario_index, SeedStream stream);

/// Greedy demonstrations under the baseline reward. Runs ceil(count / agents)
/// episodes and keeps the first `count` trajectories.
BatchFile generate_experts(const Scenario& scenario, const RewardModel& baseline,
                           const PlannerConfig& planner, std::size_t count, std::uint64_t seed,
                           int workers);

/// Softmax-proposal samples under `model`, `episodes` joint episodes.
BatchFile sample_model(const Scenario& scenario, const RewardModel& model,
                       const PlannerConfig& planner, int episodes, std::uint64_t seed,
                       int workers);

}  // namespace mirl
