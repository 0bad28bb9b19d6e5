#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mirl/env.hpp"
#include "mirl/planner.hpp"

namespace mirl {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr int kBatchSchemaVersion = 1;

Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::string& path);

/// One trajectory record of a batch file.
struct BatchRecord {
  Trajectory trajectory;
  std::uint64_t seed = 0;
  double log_prob = 0.0;
};

struct BatchHeader {
  std::string scenario;
  double dt = 0.8;
  int horizon = 0;
  std::size_t count = 0;
};

struct BatchFile {
  BatchHeader header;
  std::vector<BatchRecord> records;
};

/// JSON-lines: a header line followed by one record per trajectory
/// {agent_id, seed, start, steps[[x, y, v, ax, vy]], terminal, log_prob}.
void write_batch(std::ostream& os, const BatchFile& batch);
BatchFile read_batch(std::istream& is);
void save_batch(const BatchFile& batch, const std::string& path);
BatchFile load_batch(const std::string& path);

BatchFile make_batch(const Scenario& scenario, const std::vector<SampledBatchEntry>& entries);
std::vector<Trajectory> trajectories(const BatchFile& batch);

}  // namespace mirl
