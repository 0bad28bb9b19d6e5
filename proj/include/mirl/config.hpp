#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mirl/eval.hpp"
#include "mirl/irl.hpp"
#include "mirl/planner.hpp"

namespace mirl {

struct ExpertConfig {
  std::size_t count = 50;  // trajectories per scenario
  /// Stand-in for a hand-tuned baseline: positive on the continuous
  /// features, strongly negative on the terminal ones.
  FeatureVector baseline_weights{1.0, 1.0, 0.5, 0.5, -10.0, -10.0, -10.0};
  PlannerConfig planner;
};

struct EvalConfig {
  ReportThresholds thresholds;
  int episodes = 20;
};

struct RunConfig {
  std::vector<std::string> scenarios;  // resolved paths
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int workers = 1;
  ExpertConfig experts;
  TrainerConfig trainer;
  EvalConfig eval;

  bool operator==(const RunConfig&) const;
};

/// Parses a run config; relative scenario paths resolve against base_dir.
/// Throws ConfigError on malformed input.
RunConfig run_config_from_json(const std::string& text, const std::string& base_dir = "");
std::string run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::string& path);

PlannerConfig planner_from_json(const std::string& text);
std::string planner_to_json(const PlannerConfig& cfg);

}  // namespace mirl
