#include "mirl/reward.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mirl/seeding.hpp"

namespace mirl {

MlpParams::MlpParams(int hidden_dim)
    : hidden(hidden_dim),
      w1(static_cast<std::size_t>(hidden_dim) * kNumAugmented, 0.0),
      w2(static_cast<std::size_t>(hidden_dim), 0.0) {
  if (hidden_dim < 1) throw std::invalid_argument("MlpParams: hidden_dim must be >= 1");
}

double reward_linear(const LinearParams& p, std::span<const double> features) {
  if (features.size() != kNumFeatures)
    throw std::invalid_argument("reward_linear: expected 7 features");
  double r = 0.0;
  for (std::size_t i = 0; i < kNumFeatures; ++i) r += p.theta[i] * features[i];
  return r;
}

double reward_mlp(const MlpParams& p, std::span<const double> augmented) {
  if (augmented.size() != kNumAugmented)
    throw std::invalid_argument("reward_mlp: expected 10 inputs");
  double r = 0.0;
  for (int h = 0; h < p.hidden; ++h) {
    const double* row = &p.w1[static_cast<std::size_t>(h) * kNumAugmented];
    double z = 0.0;
    for (std::size_t i = 0; i < kNumAugmented; ++i) z += row[i] * augmented[i];
    if (z > 0.0) r += p.w2[h] * z;
  }
  return r;
}

RewardModel RewardModel::random_linear(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  LinearParams p;
  for (double& t : p.theta) t = 2.0 * uniform01(rng) - 1.0;
  return RewardModel(p);
}

RewardModel RewardModel::random_mlp(int hidden, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  MlpParams p(hidden);
  const double b1 = 1.0 / std::sqrt(static_cast<double>(kNumAugmented));
  const double b2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& w : p.w1) w = b1 * (2.0 * uniform01(rng) - 1.0);
  for (double& w : p.w2) w = b2 * (2.0 * uniform01(rng) - 1.0);
  return RewardModel(std::move(p));
}

double RewardModel::reward(const AugmentedFeatureVector& f) const {
  if (is_linear()) return reward_linear(linear(), std::span<const double>(f.data(), kNumFeatures));
  return reward_mlp(mlp(), f);
}

void RewardModel::accumulate_grad(const AugmentedFeatureVector& f, double scale,
                                  std::span<double> grad) const {
  if (grad.size() != param_count()) throw std::invalid_argument("accumulate_grad: size mismatch");
  if (is_linear()) {
    for (std::size_t i = 0; i < kNumFeatures; ++i) grad[i] += scale * f[i];
    return;
  }
  const MlpParams& p = mlp();
  const std::size_t w2_off = p.w1.size();
  for (int h = 0; h < p.hidden; ++h) {
    const std::size_t row_off = static_cast<std::size_t>(h) * kNumAugmented;
    double z = 0.0;
    for (std::size_t i = 0; i < kNumAugmented; ++i) z += p.w1[row_off + i] * f[i];
    if (z <= 0.0) continue;
    grad[w2_off + h] += scale * z;
    const double back = scale * p.w2[h];
    for (std::size_t i = 0; i < kNumAugmented; ++i) grad[row_off + i] += back * f[i];
  }
}

std::size_t RewardModel::param_count() const {
  if (is_linear()) return kNumFeatures;
  return mlp().w1.size() + mlp().w2.size();
}

ParamVector RewardModel::params() const {
  if (is_linear()) return ParamVector(linear().theta.begin(), linear().theta.end());
  ParamVector out(mlp().w1);
  out.insert(out.end(), mlp().w2.begin(), mlp().w2.end());
  return out;
}

void RewardModel::set_params(std::span<const double> flat) {
  if (flat.size() != param_count()) throw std::invalid_argument("set_params: size mismatch");
  if (auto* lin = std::get_if<LinearParams>(&params_)) {
    std::copy(flat.begin(), flat.end(), lin->theta.begin());
    return;
  }
  auto& p = std::get<MlpParams>(params_);
  std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(p.w1.size()), p.w1.begin());
  std::copy(flat.begin() + static_cast<std::ptrdiff_t>(p.w1.size()), flat.end(), p.w2.begin());
}

bool RewardModel::finite() const {
  for (double v : params())
    if (!std::isfinite(v)) return false;
  return true;
}

double return_of(const RewardModel& model, std::span<const AugmentedFeatureVector> steps,
                 double gamma) {
  if (steps.empty()) throw std::invalid_argument("return_of: empty trajectory");
  double g = 0.0;
  double discount = 1.0;
  for (const auto& f : steps) {
    g += discount * model.reward(f);
    discount *= gamma;
  }
  return g / static_cast<double>(steps.size());
}

ParamVector grad_return(const RewardModel& model,
                        std::span<const AugmentedFeatureVector> steps, double gamma) {
  if (steps.empty()) throw std::invalid_argument("grad_return: empty trajectory");
  ParamVector grad(model.param_count(), 0.0);
  const double norm = 1.0 / static_cast<double>(steps.size());
  double discount = 1.0;
  for (const auto& f : steps) {
    model.accumulate_grad(f, discount * norm, grad);
    discount *= gamma;
  }
  return grad;
}

double return_of(const RewardModel& model, const Trajectory& traj, const AgentSpec& spec,
                 const Road& road, double gamma) {
  const auto seq = feature_sequence(traj, spec, road);
  return return_of(model, augment(seq), gamma);
}

ParamVector grad_return(const RewardModel& model, const Trajectory& traj,
                        const AgentSpec& spec, const Road& road, double gamma) {
  const auto seq = feature_sequence(traj, spec, road);
  return grad_return(model, augment(seq), gamma);
}

using nlohmann::json;

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  json j;
  j["kind"] = ckpt.model.kind();
  j["step"] = ckpt.step;
  if (ckpt.model.is_linear()) {
    j["dims"] = {{"features", kNumFeatures}};
    j["theta"] = ckpt.model.linear().theta;
  } else {
    const auto& p = ckpt.model.mlp();
    j["dims"] = {{"inputs", kNumAugmented}, {"hidden", p.hidden}};
    j["w1"] = p.w1;
    j["w2"] = p.w2;
  }
  return j.dump(2);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  try {
    Checkpoint ckpt;
    ckpt.step = j.at("step").get<long>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
      LinearParams p;
      const auto theta = j.at("theta").get<std::vector<double>>();
      if (theta.size() != kNumFeatures) throw ConfigError("checkpoint: theta must have 7 entries");
      std::copy(theta.begin(), theta.end(), p.theta.begin());
      ckpt.model = RewardModel(p);
    } else if (kind == "mlp") {
      const int hidden = j.at("dims").at("hidden").get<int>();
      MlpParams p(hidden);
      p.w1 = j.at("w1").get<std::vector<double>>();
      p.w2 = j.at("w2").get<std::vector<double>>();
      if (p.w1.size() != static_cast<std::size_t>(hidden) * kNumAugmented ||
          p.w2.size() != static_cast<std::size_t>(hidden))
        throw ConfigError("checkpoint: mlp weight arrays do not match dims");
      ckpt.model = RewardModel(std::move(p));
    } else {
      throw ConfigError("checkpoint: unknown model kind '" + kind + "'");
    }
    if (!ckpt.model.finite()) throw ConfigError("checkpoint: non-finite parameters");
    return ckpt;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path);
  os << checkpoint_to_json(ckpt) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read checkpoint " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace mirl
