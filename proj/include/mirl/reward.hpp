#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mirl/features.hpp"

namespace mirl {

struct LinearParams {
  FeatureVector theta{};
};

/// Two-layer network r = W2 * relu(W1 * phi+) without biases.
/// w1 is hidden x 10 row-major, w2 has length hidden.
struct MlpParams {
  int hidden = 16;
  std::vector<double> w1;
  std::vector<double> w2;

  explicit MlpParams(int hidden_dim = 16);
};

double reward_linear(const LinearParams& p, std::span<const double> features);
double reward_mlp(const MlpParams& p, std::span<const double> augmented);

/// Flat parameter vector. Linear: theta. Mlp: w1 (row-major) followed by w2.
using ParamVector = std::vector<double>;

class RewardModel {
 public:
  RewardModel() = default;
  RewardModel(LinearParams p) : params_(std::move(p)) {}
  RewardModel(MlpParams p) : params_(std::move(p)) {}

  static RewardModel random_linear(std::uint64_t seed);
  static RewardModel random_mlp(int hidden, std::uint64_t seed);

  bool is_linear() const { return std::holds_alternative<LinearParams>(params_); }
  std::string kind() const { return is_linear() ? "linear" : "mlp"; }
  const LinearParams& linear() const { return std::get<LinearParams>(params_); }
  const MlpParams& mlp() const { return std::get<MlpParams>(params_); }

  /// Per-step reward on an augmented feature vector; the linear model
  /// reads only the first seven entries.
  double reward(const AugmentedFeatureVector& f) const;

  /// Adds scale * d reward(f) / d params into grad (flat layout).
  void accumulate_grad(const AugmentedFeatureVector& f, double scale,
                       std::span<double> grad) const;

  std::size_t param_count() const;
  ParamVector params() const;
  void set_params(std::span<const double> flat);
  bool finite() const;

 private:
  std::variant<LinearParams, MlpParams> params_;
};

/// Length-normalized discounted return: sum_t gamma^t r_t / T_actual.
double return_of(const RewardModel& model, std::span<const AugmentedFeatureVector> steps,
                 double gamma);
double return_of(const RewardModel& model, const Trajectory& traj, const AgentSpec& spec,
                 const Road& road, double gamma);

/// Exact gradient of return_of with respect to the flat parameters.
/// ReLU subgradient at exactly zero is zero.
ParamVector grad_return(const RewardModel& model,
                        std::span<const AugmentedFeatureVector> steps, double gamma);
ParamVector grad_return(const RewardModel& model, const Trajectory& traj,
                        const AgentSpec& spec, const Road& road, double gamma);

struct Checkpoint {
  RewardModel model;
  long step = 0;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mirl
