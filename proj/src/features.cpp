#include "mirl/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mirl/format.hpp"

namespace mirl {

const std::array<const char*, kNumFeatures> kFeatureNames = {
    "f_desLane",   "f_desVelocity",   "f_laneCenter",    "f_acceleration",
    "f_collision", "f_invalid_state", "f_invalid_action"};

const std::array<const char*, kNumAugmented> kAugmentedNames = {
    "f_desLane",        "f_desVelocity",   "f_laneCenter",    "f_acceleration",
    "f_collision",      "f_invalid_state", "f_invalid_action", "prev_desLane",
    "prev_desVelocity", "prev_laneCenter"};

double acceleration_cost(const Action& action, double prev_vy) {
  const double lateral = (action.vy - prev_vy) / action.dt;
  return std::hypot(action.ax, lateral) / kGravity;
}

FeatureVector feature_step(const AgentState& state, const Action& action,
                           const AgentState& prev_state, const AgentSpec& spec,
                           const Road& road, Terminal flag) {
  FeatureVector f{};
  const int lane = road.lane_of(state.y);
  f[kDesLane] = std::max(1.0 - std::abs(lane - spec.desired_lane), -1.0);
  f[kDesVelocity] =
      std::max(1.0 - 10.0 * std::abs(state.v / spec.desired_velocity - 1.0), -1.0);
  f[kLaneCenter] =
      std::max(1.0 - std::abs(road.lane_center(lane) - state.y) / (road.lane_width / 4.0), -1.0);

  // The lateral velocity of the previous step is recovered from the
  // position change; it is zero at t = 0 where prev_state == state.
  const double prev_vy = (state.y - prev_state.y) / action.dt;
  const double c_acc = acceleration_cost(action, prev_vy);
  f[kAcceleration] = std::max(1.0 - c_acc / (kGravity / 8.0), -1.0);

  f[kCollision] = flag == Terminal::collision ? 1.0 : 0.0;
  f[kInvalidState] = flag == Terminal::invalid_state ? 1.0 : 0.0;
  f[kInvalidAction] = flag == Terminal::invalid_action ? 1.0 : 0.0;
  return f;
}

std::vector<FeatureVector> feature_sequence(const Trajectory& traj, const AgentSpec& spec,
                                            const Road& road) {
  std::vector<FeatureVector> out;
  out.reserve(traj.steps.size());
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const Step& s = traj.steps[t];
    const AgentState& prev = t == 0 ? s.state : traj.steps[t - 1].state;
    const bool last = t + 1 == traj.steps.size();
    out.push_back(feature_step(s.state, s.action, prev, spec, road,
                               last ? traj.terminal : Terminal::none));
  }
  return out;
}

FeatureVector feature_trajectory(const Trajectory& traj, const AgentSpec& spec,
                                 const Road& road) {
  if (traj.steps.empty()) throw std::invalid_argument("feature_trajectory: empty trajectory");
  const auto seq = feature_sequence(traj, spec, road);
  FeatureVector mean{};
  for (const auto& f : seq)
    for (std::size_t i = 0; i < kNumFeatures; ++i) mean[i] += f[i];
  for (double& m : mean) m /= static_cast<double>(seq.size());
  return mean;
}

std::vector<AugmentedFeatureVector> augment(std::span<const FeatureVector> sequence) {
  std::vector<AugmentedFeatureVector> out;
  out.reserve(sequence.size());
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    const FeatureVector& cur = sequence[t];
    const FeatureVector& prev = t == 0 ? cur : sequence[t - 1];
    AugmentedFeatureVector a{};
    std::copy(cur.begin(), cur.end(), a.begin());
    a[7] = prev[kDesLane];
    a[8] = prev[kDesVelocity];
    a[9] = prev[kLaneCenter];
    out.push_back(a);
  }
  return out;
}

void write_feature_csv(std::ostream& os,
                       std::span<const std::vector<FeatureVector>> per_trajectory) {
  os << "trajectory,step";
  for (const char* name : kFeatureNames) os << ',' << name;
  os << '\n';
  for (std::size_t k = 0; k < per_trajectory.size(); ++k) {
    for (std::size_t t = 0; t < per_trajectory[k].size(); ++t) {
      os << k << ',' << t;
      for (double v : per_trajectory[k][t]) os << ',' << fmt_double(v);
      os << '\n';
    }
  }
}

}  // namespace mirl
