#include "mirl/pipeline.hpp"

#include "mirl/parallel.hpp"
#include "mirl/seeding.hpp"

namespace mirl {

std::uint64_t scenario_seed(std::uint64_t master, std::size_t scenario_index, SeedStream stream) {
  return derive_seed(master, {scenario_index, static_cast<std::uint64_t>(stream)});
}

namespace {

BatchFile run_batch(const Scenario& scenario, const RewardModel& model,
                    const PlannerConfig& planner, std::size_t episodes, std::uint64_t seed,
                    int workers, bool greedy) {
  std::vector<std::vector<SampledBatchEntry>> results(episodes);
  parallel_for(episodes, workers, [&](std::size_t e) {
    const std::uint64_t s = derive_seed(seed, {e});
    results[e] = greedy ? plan_expert(scenario, model, planner, s)
                        : generate_samples(model, scenario, planner, s);
  });
  std::vector<SampledBatchEntry> flat;
  for (auto& r : results)
    for (auto& e : r) flat.push_back(std::move(e));
  return make_batch(scenario, flat);
}

}  // namespace

BatchFile generate_experts(const Scenario& scenario, const RewardModel& baseline,
                           const PlannerConfig& planner, std::size_t count, std::uint64_t seed,
                           int workers) {
  const std::size_t m = scenario.agents.size();
  const std::size_t episodes = (count + m - 1) / m;
  BatchFile b = run_batch(scenario, baseline, planner, episodes, seed, workers, true);
  b.records.resize(count);
  b.header.count = count;
  return b;
}

BatchFile sample_model(const Scenario& scenario, const RewardModel& model,
                       const PlannerConfig& planner, int episodes, std::uint64_t seed,
                       int workers) {
  return run_batch(scenario, model, planner, static_cast<std::size_t>(std::max(0, episodes)),
                   seed, workers, false);
}

}  // namespace mirl
