#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mirl/env.hpp"

namespace mirl {

struct TrajectoryDistance {
  double mu = 0.0;     // m
  double sigma = 0.0;  // m
  int k = 1;
};

/// Mean Euclidean (x, y) distance over the scenario grid; the shorter
/// trajectory holds its final position. Throws on mismatched grids.
double pairwise_distance(const Trajectory& a, const Trajectory& b);

/// Per sample: mean distance to its k nearest experts.
std::vector<double> knn_sample_distances(std::span<const Trajectory> samples,
                                         std::span<const Trajectory> experts, int k);

/// Mean and (population) standard deviation of a set of distances.
TrajectoryDistance summarize(std::span<const double> distances, int k);

TrajectoryDistance knn_distance(std::span<const Trajectory> samples,
                                std::span<const Trajectory> experts, int k);

/// Samples are compared only to experts of the same agent.
std::vector<double> knn_by_agent(std::span<const Trajectory> samples,
                                 std::span<const Trajectory> experts, int k);

struct ReportThresholds {
  int k = 3;
  double velocity_band = 0.1;

  bool operator==(const ReportThresholds&) const = default;
};

struct ReportValues {
  double collision = 0.0;
  double invalid = 0.0;
  double desired_lane = 0.0;
  double desired_velocity = 0.0;
  double mu_d = 0.0;
  double sigma_d = 0.0;
};

struct ScenarioReport {
  std::string scenario;
  ReportValues values;
  TrajectoryDistance distance;
  std::optional<ReportValues> delta;
};

/// Column names, in report order.
extern const std::vector<std::string> kReportColumns;

ScenarioReport scenario_report(std::span<const Trajectory> samples,
                               std::span<const Trajectory> experts, const Scenario& scenario,
                               const ReportThresholds& thresholds,
                               const ScenarioReport* baseline = nullptr);

ReportValues report_delta(const ReportValues& a, const ReportValues& b);

/// Writes absolute values, or the deltas when `deltas` is set (rows
/// without a delta are an error in that mode).
void write_report_csv(std::ostream& os, std::span<const ScenarioReport> reports, bool deltas);

struct CurvePoint {
  long step = 0;
  double mu = 0.0;
  double sigma = 0.0;
};

struct TrainingLogRecord;

/// Steps carrying an evaluation snapshot, in log order.
std::vector<CurvePoint> convergence_curve(std::span<const TrainingLogRecord> log);

void write_curve_csv(std::ostream& os, std::span<const CurvePoint> curve);
/// Minimal static line chart of mu(d) with a +-sigma band.
void write_curve_svg(std::ostream& os, std::span<const CurvePoint> curve,
                     const std::string& title);

}  // namespace mirl
