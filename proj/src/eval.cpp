#include "mirl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mirl/format.hpp"
#include "mirl/training_log.hpp"

namespace mirl {

namespace {

const AgentState& position_at(const Trajectory& t, std::size_t k) {
  if (t.steps.empty()) return t.start;
  return t.steps[std::min(k, t.steps.size() - 1)].state;
}

const AgentState& final_state(const Trajectory& t) {
  return t.steps.empty() ? t.start : t.steps.back().state;
}

}  // namespace

double pairwise_distance(const Trajectory& a, const Trajectory& b) {
  if (a.horizon != b.horizon || a.dt != b.dt)
    throw std::invalid_argument("pairwise_distance: trajectories on different time grids");
  const auto horizon = static_cast<std::size_t>(a.horizon);
  if (horizon == 0) return std::hypot(a.start.x - b.start.x, a.start.y - b.start.y);
  double sum = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const AgentState& pa = position_at(a, t);
    const AgentState& pb = position_at(b, t);
    sum += std::hypot(pa.x - pb.x, pa.y - pb.y);
  }
  return sum / static_cast<double>(horizon);
}

std::vector<double> knn_sample_distances(std::span<const Trajectory> samples,
                                         std::span<const Trajectory> experts, int k) {
  if (k < 1) throw std::invalid_argument("knn_distance: k must be >= 1");
  if (experts.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument("knn_distance: fewer experts than k");
  std::vector<double> out;
  out.reserve(samples.size());
  std::vector<double> d(experts.size());
  for (const Trajectory& s : samples) {
    for (std::size_t e = 0; e < experts.size(); ++e) d[e] = pairwise_distance(s, experts[e]);
    std::partial_sort(d.begin(), d.begin() + k, d.end());
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += d[static_cast<std::size_t>(j)];
    out.push_back(sum / k);
  }
  return out;
}

TrajectoryDistance summarize(std::span<const double> distances, int k) {
  TrajectoryDistance r;
  r.k = k;
  if (distances.empty()) return r;
  double mean = 0.0;
  for (double d : distances) mean += d;
  mean /= static_cast<double>(distances.size());
  double var = 0.0;
  for (double d : distances) var += (d - mean) * (d - mean);
  var /= static_cast<double>(distances.size());
  r.mu = mean;
  r.sigma = std::sqrt(var);
  return r;
}

TrajectoryDistance knn_distance(std::span<const Trajectory> samples,
                                std::span<const Trajectory> experts, int k) {
  const auto d = knn_sample_distances(samples, experts, k);
  return summarize(d, k);
}

std::vector<double> knn_by_agent(std::span<const Trajectory> samples,
                                 std::span<const Trajectory> experts, int k) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const Trajectory& s : samples) {
    std::vector<Trajectory> same;
    for (const Trajectory& e : experts)
      if (e.agent_id == s.agent_id) same.push_back(e);
    const auto d = knn_sample_distances(std::span<const Trajectory>(&s, 1), same, k);
    out.push_back(d.front());
  }
  return out;
}

const std::vector<std::string> kReportColumns = {
    "collision", "invalid", "desired_lane", "desired_velocity", "mu_d", "sigma_d"};

ReportValues report_delta(const ReportValues& a, const ReportValues& b) {
  return {a.collision - b.collision,         a.invalid - b.invalid,
          a.desired_lane - b.desired_lane,   a.desired_velocity - b.desired_velocity,
          a.mu_d - b.mu_d,                   a.sigma_d - b.sigma_d};
}

ScenarioReport scenario_report(std::span<const Trajectory> samples,
                               std::span<const Trajectory> experts, const Scenario& scenario,
                               const ReportThresholds& thresholds,
                               const ScenarioReport* baseline) {
  if (samples.empty() || experts.empty())
    throw std::invalid_argument("scenario_report: empty batch");
  ScenarioReport rep;
  rep.scenario = scenario.name;
  const double n = static_cast<double>(samples.size());
  for (const Trajectory& t : samples) {
    const AgentSpec& spec = scenario.agents.at(static_cast<std::size_t>(t.agent_id));
    if (t.terminal == Terminal::collision) rep.values.collision += 1.0;
    if (t.terminal == Terminal::invalid_state || t.terminal == Terminal::invalid_action)
      rep.values.invalid += 1.0;
    const AgentState& last = final_state(t);
    if (scenario.road.lane_of(last.y) == spec.desired_lane) rep.values.desired_lane += 1.0;
    if (std::abs(last.v / spec.desired_velocity - 1.0) <= thresholds.velocity_band)
      rep.values.desired_velocity += 1.0;
  }
  rep.values.collision /= n;
  rep.values.invalid /= n;
  rep.values.desired_lane /= n;
  rep.values.desired_velocity /= n;

  const auto d = knn_by_agent(samples, experts, thresholds.k);
  rep.distance = summarize(d, thresholds.k);
  rep.values.mu_d = rep.distance.mu;
  rep.values.sigma_d = rep.distance.sigma;
  if (baseline) rep.delta = report_delta(rep.values, baseline->values);
  return rep;
}

void write_report_csv(std::ostream& os, std::span<const ScenarioReport> reports, bool deltas) {
  os << "scenario";
  for (const auto& c : kReportColumns) os << ',' << c;
  os << '\n';
  for (const auto& r : reports) {
    if (deltas && !r.delta) throw std::invalid_argument("write_report_csv: report has no delta");
    const ReportValues& v = deltas ? *r.delta : r.values;
    os << r.scenario << ',' << fmt_double(v.collision) << ',' << fmt_double(v.invalid) << ','
       << fmt_double(v.desired_lane) << ',' << fmt_double(v.desired_velocity) << ','
       << fmt_double(v.mu_d) << ',' << fmt_double(v.sigma_d) << '\n';
  }
}

std::vector<CurvePoint> convergence_curve(std::span<const TrainingLogRecord> log) {
  std::vector<CurvePoint> out;
  for (const auto& r : log) {
    if (r.mu_d && r.sigma_d) out.push_back({r.step, *r.mu_d, *r.sigma_d});
  }
  return out;
}

void write_curve_csv(std::ostream& os, std::span<const CurvePoint> curve) {
  os << "step,mu_d,sigma_d\n";
  for (const auto& p : curve)
    os << p.step << ',' << fmt_double(p.mu) << ',' << fmt_double(p.sigma) << '\n';
}

void write_curve_svg(std::ostream& os, std::span<const CurvePoint> curve,
                     const std::string& title) {
  constexpr double W = 640, H = 360, L = 60, R = 20, T = 40, B = 50;
  double max_step = 1.0, max_y = 1.0;
  for (const auto& p : curve) {
    max_step = std::max(max_step, static_cast<double>(p.step));
    max_y = std::max(max_y, p.mu + p.sigma);
  }
  auto px = [&](double s) { return L + (W - L - R) * s / max_step; };
  auto py = [&](double y) { return H - B - (H - T - B) * y / max_y; };
  auto num = [](double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">step</text>\n";
  os << "<text x=\"14\" y=\"" << H / 2 << "\" transform=\"rotate(-90 14 " << H / 2
     << ")\" text-anchor=\"middle\">mu(d) [m]</text>\n";
  os << "<text x=\"" << L - 6 << "\" y=\"" << py(max_y) + 4 << "\" text-anchor=\"end\">"
     << num(max_y) << "</text>\n";
  os << "<text x=\"" << L - 6 << "\" y=\"" << py(0) + 4 << "\" text-anchor=\"end\">0</text>\n";
  os << "<text x=\"" << W - R << "\" y=\"" << H - B + 16 << "\" text-anchor=\"end\">"
     << num(max_step) << "</text>\n";
  if (!curve.empty()) {
    os << "<polygon fill=\"steelblue\" fill-opacity=\"0.2\" points=\"";
    for (const auto& p : curve) os << num(px(p.step)) << ',' << num(py(p.mu + p.sigma)) << ' ';
    for (auto it = curve.rbegin(); it != curve.rend(); ++it)
      os << num(px(it->step)) << ',' << num(py(std::max(0.0, it->mu - it->sigma))) << ' ';
    os << "\"/>\n<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& p : curve) os << num(px(p.step)) << ',' << num(py(p.mu)) << ' ';
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace mirl
