#pragma once

// Small enumerable environments shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mirl/env.hpp"
#include "mirl/features.hpp"
#include "mirl/irl.hpp"
#include "mirl/planner.hpp"
#include "mirl/reward.hpp"
#include "mirl/seeding.hpp"

namespace mirl::testing {

/// One agent, one lane, deterministic start, speed slightly off target.
inline Scenario chain_scenario(int horizon, double start_v = 18.0) {
  Scenario s;
  s.name = "chain";
  s.road = {1, 3.5, 1000.0};
  s.horizon = horizon;
  s.dt = 0.8;
  s.limits = {20.0, 2.0};
  AgentSpec a;
  a.mean_x = 10.0;
  a.mean_y = 1.75;
  a.start_v = start_v;
  a.desired_lane = 0;
  a.desired_velocity = 20.0;
  s.agents = {a};
  return s;
}

/// Planner restricted to a fixed discrete longitudinal action set.
inline PlannerConfig discrete_planner(std::vector<double> ax, int budget) {
  PlannerConfig p;
  p.budget = budget;
  p.ax_template = std::move(ax);
  p.vy_template = {0.0};
  p.jitter_ax = 0.0;
  p.jitter_vy = 0.0;
  return p;
}

/// Every action sequence of length `horizon` over `actions`, rolled out from
/// the scenario's (deterministic) start state. Sequences cut short by a
/// terminal are kept once.
inline std::vector<std::vector<Trajectory>> enumerate_episodes(const Scenario& s,
                                                               const std::vector<Action>& actions) {
  std::vector<std::vector<Trajectory>> out;
  std::vector<std::size_t> idx(static_cast<std::size_t>(s.horizon), 0);
  const std::size_t n = actions.size();
  std::size_t total = 1;
  for (int t = 0; t < s.horizon; ++t) total *= n;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (auto& i : idx) {
      i = c % n;
      c /= n;
    }
    auto policy = [&](int t, const JointState& st) {
      return JointAction(st.size(), actions[idx[static_cast<std::size_t>(t)]]);
    };
    auto trajs = rollout(s, policy, 0);
    // Skip duplicates of sequences that terminated before their tail differs.
    bool dup = false;
    const std::size_t len = trajs.front().steps.size();
    for (std::size_t t = len; t < idx.size(); ++t)
      if (idx[t] != 0) dup = true;
    if (!dup) out.push_back(std::move(trajs));
  }
  return out;
}

/// Rewards target speed and smooth driving; used by the chain optimality checks.
inline RewardModel chain_model() {
  LinearParams p;
  p.theta[kDesVelocity] = 1.0;
  p.theta[kAcceleration] = 0.5;
  return RewardModel(p);
}

inline const std::vector<double>& chain_actions() {
  static const std::vector<double> ax{-1.0, 0.0, 1.0, 2.5};
  return ax;
}

/// Best single-agent return over every action sequence of the chain.
inline double chain_optimum(const Scenario& s, const RewardModel& model,
                            const std::vector<double>& ax) {
  std::vector<Action> actions;
  for (double a : ax) actions.push_back({a, 0.0, s.dt});
  double best = -1e300;
  for (const auto& ep : enumerate_episodes(s, actions))
    best = std::max(best, return_of(model, ep[0], s.agents[0], s.road, 1.0));
  return best;
}

/// Two-step chain with a small discrete action set. Every trajectory is
/// enumerated, so Z and the likelihood gradient are available exactly.
struct EnumerableMdp {
  Scenario scenario;
  std::vector<double> ax;
  std::vector<FeaturizedTrajectory> all;  // index = first * |ax| + second

  explicit EnumerableMdp(std::vector<double> actions = {-1.0, 0.0, 1.5})
      : scenario(chain_scenario(2)), ax(std::move(actions)) {
    for (double a0 : ax)
      for (double a1 : ax) {
        const std::vector<double> seq{a0, a1};
        auto trajs = rollout(
            scenario,
            [&](int t, const JointState&) {
              return JointAction{{seq[static_cast<std::size_t>(t)], 0.0, scenario.dt}};
            },
            0);
        all.push_back(featurize(trajs[0], scenario));
      }
  }

  std::size_t size() const { return all.size(); }

  std::vector<double> returns(const RewardModel& m) const {
    std::vector<double> r;
    for (const auto& f : all) r.push_back(return_of(m, f.steps, 1.0));
    return r;
  }

  double exact_log_z(const RewardModel& m) const {
    const auto r = returns(m);
    const double mx = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (double v : r) s += std::exp(v - mx);
    return mx + std::log(s);
  }

  /// Mean expert gradient minus the exact model expectation of grad R.
  ParamVector exact_gradient(const RewardModel& m, const std::vector<std::size_t>& experts) const {
    ParamVector g(m.param_count(), 0.0);
    for (std::size_t e : experts) {
      const auto ge = grad_return(m, all[e].steps, 1.0);
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += ge[k] / static_cast<double>(experts.size());
    }
    const auto r = returns(m);
    const double log_z = exact_log_z(m);
    for (std::size_t i = 0; i < all.size(); ++i) {
      const double p = std::exp(r[i] - log_z);
      const auto gi = grad_return(m, all[i].steps, 1.0);
      for (std::size_t k = 0; k < g.size(); ++k) g[k] -= p * gi[k];
    }
    return g;
  }

  double exact_log_likelihood(const RewardModel& m, const std::vector<std::size_t>& experts) const {
    double mean = 0.0;
    for (std::size_t e : experts) mean += return_of(m, all[e].steps, 1.0);
    return mean / static_cast<double>(experts.size()) - exact_log_z(m);
  }

  /// Per-step softmax policy: the first action by its best continuation,
  /// the second by half the full return. The tempered second step keeps it
  /// away from exp(R)/Z even when returns separate across steps.
  std::vector<double> proposal_log_probs(const RewardModel& m) const {
    const std::size_t n = ax.size();
    const auto r = returns(m);
    std::vector<double> first(n), out(r.size());
    for (std::size_t i = 0; i < n; ++i)
      first[i] = *std::max_element(r.begin() + static_cast<std::ptrdiff_t>(i * n),
                                   r.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    auto log_norm = [](const double* v, std::size_t len) {
      const double mx = *std::max_element(v, v + len);
      double s = 0.0;
      for (std::size_t k = 0; k < len; ++k) s += std::exp(v[k] - mx);
      return mx + std::log(s);
    };
    std::vector<double> half(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) half[k] = 0.5 * r[k];
    const double lz0 = log_norm(first.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      const double lz1 = log_norm(&half[i * n], n);
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] = first[i] - lz0 + half[i * n + j] - lz1;
    }
    return out;
  }

  /// n trajectories from the proposal, each carrying its log-probability.
  std::vector<FeaturizedTrajectory> sample(const RewardModel& m, std::size_t n,
                                           std::uint64_t seed) const {
    const auto lp = proposal_log_probs(m);
    std::vector<double> cdf(lp.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < lp.size(); ++i) cdf[i] = acc += std::exp(lp[i]);
    Rng rng = make_rng(seed);
    std::vector<FeaturizedTrajectory> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double u = uniform01(rng) * acc;
      const auto i = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                   static_cast<std::ptrdiff_t>(cdf.size()) - 1));
      FeaturizedTrajectory f = all[i];
      f.log_prob = lp[i];
      out.push_back(std::move(f));
    }
    return out;
  }

  std::vector<FeaturizedTrajectory> pick(const std::vector<std::size_t>& idx) const {
    std::vector<FeaturizedTrajectory> out;
    for (std::size_t i : idx) out.push_back(all[i]);
    return out;
  }
};

/// Random model plus random per-step inputs for gradient checks.
struct GradientFixture {
  RewardModel model;
  std::vector<AugmentedFeatureVector> steps;
  double gamma = 1.0;
};

inline bool near_relu_kink(const RewardModel& m, const std::vector<AugmentedFeatureVector>& steps,
                           double margin) {
  if (m.is_linear()) return false;
  const MlpParams& p = m.mlp();
  for (const auto& f : steps)
    for (int h = 0; h < p.hidden; ++h) {
      double z = 0.0;
      for (std::size_t i = 0; i < kNumAugmented; ++i)
        z += p.w1[static_cast<std::size_t>(h) * kNumAugmented + i] * f[i];
      if (std::abs(z) < margin) return true;
    }
  return false;
}

/// Draws fixtures until no hidden unit sits within `margin` of its kink,
/// where the finite-difference reference itself is undefined.
inline GradientFixture gradient_fixture(std::uint64_t seed, bool mlp, double margin = 1e-3) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng = make_rng(derive_seed(seed, {attempt}));
    GradientFixture fx;
    fx.model = mlp ? RewardModel::random_mlp(8, derive_seed(seed, {attempt, 1}))
                   : RewardModel::random_linear(derive_seed(seed, {attempt, 1}));
    const int len = 1 + static_cast<int>(uniform01(rng) * 13.0);
    std::vector<FeatureVector> seq(static_cast<std::size_t>(len));
    for (auto& f : seq)
      for (std::size_t i = 0; i < 4; ++i) f[i] = 2.0 * uniform01(rng) - 1.0;
    const int flag = static_cast<int>(uniform01(rng) * 4.0);
    if (flag > 0) seq.back()[kCollision + static_cast<std::size_t>(flag - 1)] = 1.0;
    fx.steps = augment(seq);
    fx.gamma = 0.5 + 0.5 * uniform01(rng);
    if (!near_relu_kink(fx.model, fx.steps, margin)) return fx;
  }
}

/// Largest relative error between grad_return and central differences over
/// coordinates whose derivative magnitude exceeds `floor`.
inline double fd_max_relative_error(const GradientFixture& fx, double h = 1e-5,
                                    double floor = 1e-8) {
  const ParamVector analytic = grad_return(fx.model, fx.steps, fx.gamma);
  const ParamVector base = fx.model.params();
  double worst = 0.0;
  for (std::size_t k = 0; k < base.size(); ++k) {
    RewardModel plus = fx.model, minus = fx.model;
    ParamVector p = base;
    p[k] += h;
    plus.set_params(p);
    p[k] = base[k] - h;
    minus.set_params(p);
    const double fd =
        (return_of(plus, fx.steps, fx.gamma) - return_of(minus, fx.steps, fx.gamma)) / (2.0 * h);
    const double scale = std::max(std::abs(fd), std::abs(analytic[k]));
    if (scale <= floor) continue;
    worst = std::max(worst, std::abs(fd - analytic[k]) / scale);
  }
  return worst;
}

}  // namespace mirl::testing
