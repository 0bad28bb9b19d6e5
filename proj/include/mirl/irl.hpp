#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mirl/planner.hpp"
#include "mirl/reward.hpp"
#include "mirl/training_log.hpp"

namespace mirl {

/// A trajectory reduced to what the likelihood needs: per-step augmented
/// features and the log-probability of the policy that sampled it.
struct FeaturizedTrajectory {
  std::vector<AugmentedFeatureVector> steps;
  double log_prob = 0.0;
};

FeaturizedTrajectory featurize(const Trajectory& traj, const Scenario& scenario,
                               double log_prob = 0.0);

struct SampleBatch {
  std::vector<FeaturizedTrajectory> entries;
  long model_snapshot_id = 0;
};

/// (1/n) sum x_i exp(p_log_i - q_log_i).
double importance_mean(std::span<const double> values, std::span<const double> p_log,
                       std::span<const double> q_log);

/// log of Z_hat = (1/n) sum exp(R(tau)) / pi_s(tau), evaluated in log space.
double partition_estimate(const RewardModel& model, std::span<const FeaturizedTrajectory> batch,
                          double gamma);

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GradientEstimate {
  ParamVector grad;
  double log_z = 0.0;
  double expert_mean_return = 0.0;
  double log_likelihood = 0.0;  // expert_mean_return - log_z
  std::vector<double> weights;  // self-normalized importance weights
  double ess = 0.0;
};

/// Expert mean of grad R minus the importance-weighted sample mean of grad R.
/// Throws DivergenceError when any return is non-finite.
GradientEstimate gradient_estimate(const RewardModel& model,
                                   std::span<const FeaturizedTrajectory> experts,
                                   std::span<const FeaturizedTrajectory> samples, double gamma);

struct TrainerConfig {
  double learning_rate = 0.0005;
  int outer_steps = 200;      // M
  int samples_per_step = 4;   // N episodes per scenario per step
  double gamma = 1.0;
  std::uint64_t seed = 0;
  std::string model_kind = "linear";
  int hidden = 16;
  PlannerConfig planner;
  int workers = 1;
  int eval_interval = 10;  // steps between mu(d) snapshots; 0 disables
  int knn_k = 3;

  bool operator==(const TrainerConfig&) const = default;
};

struct TrainingScenario {
  Scenario scenario;
  std::vector<Trajectory> experts;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<TrainingLogRecord> log;
};

/// Called after every outer step with the new checkpoint and its log row.
using StepCallback = std::function<void(const Checkpoint&, const TrainingLogRecord&)>;

RewardModel initial_model(const TrainerConfig& cfg);

/// Gradient ascent on the sampled max-ent likelihood. Starts from `resume`
/// when given (its step counter selects the next outer step), otherwise
/// from the seeded initial model. `stop_at` ends the run early at that
/// step without changing what any completed step computes. On divergence
/// throws TrainingDiverged carrying the last finite checkpoint.
TrainResult train(std::span<const TrainingScenario> scenarios, const TrainerConfig& cfg,
                  const std::optional<Checkpoint>& resume = std::nullopt,
                  const StepCallback& on_step = {},
                  std::optional<long> stop_at = std::nullopt);

struct TrainingDiverged : DivergenceError {
  TrainingDiverged(const std::string& what, Checkpoint last, std::vector<TrainingLogRecord> log)
      : DivergenceError(what), last_finite(std::move(last)), log(std::move(log)) {}
  Checkpoint last_finite;
  std::vector<TrainingLogRecord> log;
};

}  // namespace mirl
