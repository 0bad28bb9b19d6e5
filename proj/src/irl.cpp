#include "mirl/irl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mirl/eval.hpp"
#include "mirl/parallel.hpp"
#include "mirl/seeding.hpp"

namespace mirl {

FeaturizedTrajectory featurize(const Trajectory& traj, const Scenario& scenario,
                               double log_prob) {
  const AgentSpec& spec = scenario.agents.at(static_cast<std::size_t>(traj.agent_id));
  const auto seq = feature_sequence(traj, spec, scenario.road);
  return {augment(seq), log_prob};
}

double importance_mean(std::span<const double> values, std::span<const double> p_log,
                       std::span<const double> q_log) {
  if (values.size() != p_log.size() || values.size() != q_log.size())
    throw std::invalid_argument("importance_mean: length mismatch");
  if (values.empty()) throw std::invalid_argument("importance_mean: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    sum += values[i] * std::exp(p_log[i] - q_log[i]);
  return sum / static_cast<double>(values.size());
}

namespace {

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

std::vector<double> log_ratios(const RewardModel& model,
                               std::span<const FeaturizedTrajectory> batch, double gamma) {
  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto& e : batch) out.push_back(return_of(model, e.steps, gamma) - e.log_prob);
  return out;
}

}  // namespace

double partition_estimate(const RewardModel& model, std::span<const FeaturizedTrajectory> batch,
                          double gamma) {
  if (batch.empty()) throw std::invalid_argument("partition_estimate: empty batch");
  const auto lr = log_ratios(model, batch, gamma);
  return log_sum_exp(lr) - std::log(static_cast<double>(batch.size()));
}

GradientEstimate gradient_estimate(const RewardModel& model,
                                   std::span<const FeaturizedTrajectory> experts,
                                   std::span<const FeaturizedTrajectory> samples, double gamma) {
  if (experts.empty() || samples.empty())
    throw std::invalid_argument("gradient_estimate: empty batch");
  GradientEstimate out;
  out.grad.assign(model.param_count(), 0.0);

  const double inv_e = 1.0 / static_cast<double>(experts.size());
  for (const auto& e : experts) {
    const double r = return_of(model, e.steps, gamma);
    if (!std::isfinite(r)) throw DivergenceError("gradient_estimate: non-finite expert return");
    out.expert_mean_return += r * inv_e;
    const auto g = grad_return(model, e.steps, gamma);
    for (std::size_t k = 0; k < g.size(); ++k) out.grad[k] += inv_e * g[k];
  }

  const auto lr = log_ratios(model, samples, gamma);
  for (double v : lr)
    if (!std::isfinite(v)) throw DivergenceError("gradient_estimate: non-finite sample return");
  const double lse = log_sum_exp(lr);
  const double log_n = std::log(static_cast<double>(samples.size()));
  out.log_z = lse - log_n;
  out.log_likelihood = out.expert_mean_return - out.log_z;

  // w = exp(R - log pi_s - log Z_hat - log n), which sums to one.
  out.weights.resize(samples.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.weights[i] = std::exp(lr[i] - out.log_z - log_n);
    sq += out.weights[i] * out.weights[i];
  }
  out.ess = 1.0 / sq;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (out.weights[i] == 0.0) continue;
    const auto g = grad_return(model, samples[i].steps, gamma);
    for (std::size_t k = 0; k < g.size(); ++k) out.grad[k] -= out.weights[i] * g[k];
  }
  return out;
}

RewardModel initial_model(const TrainerConfig& cfg) {
  const std::uint64_t seed = derive_seed(cfg.seed, {0});
  if (cfg.model_kind == "linear") return RewardModel::random_linear(seed);
  if (cfg.model_kind == "mlp") return RewardModel::random_mlp(cfg.hidden, seed);
  throw ConfigError("unknown model kind '" + cfg.model_kind + "'");
}

TrainResult train(std::span<const TrainingScenario> scenarios, const TrainerConfig& cfg,
                  const std::optional<Checkpoint>& resume, const StepCallback& on_step,
                  std::optional<long> stop_at) {
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
  if (cfg.outer_steps < 0 || cfg.samples_per_step < 1)
    throw ConfigError("train: outer_steps >= 0 and samples_per_step >= 1 required");
  if (scenarios.empty()) throw ConfigError("train: no training scenarios");

  std::vector<std::vector<FeaturizedTrajectory>> experts(scenarios.size());
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    if (scenarios[s].experts.empty())
      throw ConfigError("train: scenario '" + scenarios[s].scenario.name + "' has no experts");
    for (const auto& t : scenarios[s].experts)
      if (!t.empty()) experts[s].push_back(featurize(t, scenarios[s].scenario));
  }

  PlannerConfig planner = cfg.planner;
  planner.gamma = cfg.gamma;

  TrainResult result;
  result.checkpoint = resume ? *resume : Checkpoint{initial_model(cfg), 0};
  const std::size_t S = scenarios.size();
  const auto N = static_cast<std::size_t>(cfg.samples_per_step);

  const long end = stop_at ? std::min<long>(*stop_at, cfg.outer_steps) : cfg.outer_steps;
  for (long i = result.checkpoint.step; i < end; ++i) {
    const RewardModel& model = result.checkpoint.model;

    std::vector<std::vector<SampledBatchEntry>> episodes(S * N);
    parallel_for(S * N, cfg.workers, [&](std::size_t job) {
      const std::size_t s = job / N, j = job % N;
      episodes[job] = generate_samples(
          model, scenarios[s].scenario, planner,
          derive_seed(cfg.seed, {10, static_cast<std::uint64_t>(i), s, j}));
    });

    ParamVector grad(model.param_count(), 0.0);
    TrainingLogRecord rec;
    rec.step = i;
    std::vector<double> distances;
    const bool eval_now =
        cfg.eval_interval > 0 && (i % cfg.eval_interval == 0 || i + 1 == cfg.outer_steps);
    try {
      for (std::size_t s = 0; s < S; ++s) {
        std::vector<FeaturizedTrajectory> samples;
        std::vector<Trajectory> trajs;
        for (std::size_t j = 0; j < N; ++j) {
          for (const auto& e : episodes[s * N + j]) {
            if (e.trajectory.empty()) continue;
            samples.push_back(featurize(e.trajectory, scenarios[s].scenario, e.log_prob));
            trajs.push_back(e.trajectory);
          }
        }
        const GradientEstimate ge = gradient_estimate(model, experts[s], samples, cfg.gamma);
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += ge.grad[k] / static_cast<double>(S);
        rec.log_likelihood += ge.log_likelihood / static_cast<double>(S);
        rec.log_z += ge.log_z / static_cast<double>(S);
        rec.ess += ge.ess / static_cast<double>(S);
        if (eval_now) {
          const auto& ex = scenarios[s].experts;
          std::size_t min_per_agent = ex.size();
          for (std::size_t a = 0; a < scenarios[s].scenario.agents.size(); ++a) {
            const auto c = static_cast<std::size_t>(std::count_if(
                ex.begin(), ex.end(), [a](const Trajectory& t) { return t.agent_id == static_cast<int>(a); }));
            min_per_agent = std::min(min_per_agent, c);
          }
          const int k = std::max(1, std::min(cfg.knn_k, static_cast<int>(min_per_agent)));
          const auto d = knn_by_agent(trajs, ex, k);
          distances.insert(distances.end(), d.begin(), d.end());
        }
      }
    } catch (const DivergenceError& e) {
      throw TrainingDiverged(std::string(e.what()) + " at step " + std::to_string(i),
                             result.checkpoint, result.log);
    }

    double norm = 0.0;
    for (double g : grad) norm += g * g;
    rec.grad_norm = std::sqrt(norm);
    if (eval_now) {
      const auto summary = summarize(distances, cfg.knn_k);
      rec.mu_d = summary.mu;
      rec.sigma_d = summary.sigma;
    }

    ParamVector params = model.params();
    for (std::size_t k = 0; k < params.size(); ++k) params[k] += cfg.learning_rate * grad[k];
    RewardModel next = model;
    next.set_params(params);
    if (!next.finite() || !std::isfinite(rec.grad_norm)) {
      throw TrainingDiverged("train: non-finite parameters after step " + std::to_string(i),
                             result.checkpoint, result.log);
    }
    result.checkpoint = Checkpoint{std::move(next), i + 1};
    result.log.push_back(rec);
    if (on_step) on_step(result.checkpoint, rec);
  }
  return result;
}

}  // namespace mirl
