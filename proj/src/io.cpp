#include "mirl/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace mirl {

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    const int version = j.at("schema_version").get<int>();
    if (version != kScenarioSchemaVersion)
      throw ConfigError("scenario: unsupported schema_version " + std::to_string(version));
    Scenario s;
    s.name = j.value("name", "scenario");
    const auto& r = j.at("road");
    s.road.lane_count = r.at("lane_count").get<int>();
    s.road.lane_width = r.at("lane_width").get<double>();
    s.road.length = r.at("length").get<double>();
    s.horizon = j.at("horizon").get<int>();
    s.dt = j.at("dt").get<double>();
    if (j.contains("limits")) {
      s.limits.ax_max = j["limits"].at("ax_max").get<double>();
      s.limits.vy_max = j["limits"].at("vy_max").get<double>();
    }
    if (j.contains("footprint")) {
      s.footprint.length = j["footprint"].at("length").get<double>();
      s.footprint.width = j["footprint"].at("width").get<double>();
    }
    for (const auto& a : j.at("agents")) {
      AgentSpec spec;
      spec.mean_x = a.at("mean_x").get<double>();
      spec.std_x = a.value("std_x", 0.0);
      spec.mean_y = a.at("mean_y").get<double>();
      spec.std_y = a.value("std_y", 0.0);
      spec.start_v = a.at("start_v").get<double>();
      spec.desired_lane = a.at("desired_lane").get<int>();
      spec.desired_velocity = a.at("desired_velocity").get<double>();
      s.agents.push_back(spec);
    }
    if (j.contains("obstacles")) {
      for (const auto& o : j["obstacles"]) {
        s.obstacles.push_back({o.at("x_min").get<double>(), o.at("x_max").get<double>(),
                               o.at("y_min").get<double>(), o.at("y_max").get<double>()});
      }
    }
    if (j.contains("duration")) {
      const double d = j["duration"].get<double>();
      if (std::abs(s.duration() - d) > 1e-9)
        throw ConfigError("scenario '" + s.name + "': horizon * dt does not equal duration");
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["name"] = s.name;
  j["road"] = {{"lane_count", s.road.lane_count},
               {"lane_width", s.road.lane_width},
               {"length", s.road.length}};
  j["horizon"] = s.horizon;
  j["dt"] = s.dt;
  j["duration"] = s.duration();
  j["limits"] = {{"ax_max", s.limits.ax_max}, {"vy_max", s.limits.vy_max}};
  j["footprint"] = {{"length", s.footprint.length}, {"width", s.footprint.width}};
  j["agents"] = json::array();
  for (const auto& a : s.agents) {
    j["agents"].push_back({{"mean_x", a.mean_x},
                           {"std_x", a.std_x},
                           {"mean_y", a.mean_y},
                           {"std_y", a.std_y},
                           {"start_v", a.start_v},
                           {"desired_lane", a.desired_lane},
                           {"desired_velocity", a.desired_velocity}});
  }
  j["obstacles"] = json::array();
  for (const auto& o : s.obstacles)
    j["obstacles"].push_back(
        {{"x_min", o.x_min}, {"x_max", o.x_max}, {"y_min", o.y_min}, {"y_max", o.y_max}});
  return j.dump(2);
}

Scenario load_scenario(const std::string& path) { return scenario_from_json(slurp(path)); }

void write_batch(std::ostream& os, const BatchFile& batch) {
  json h = {{"type", "header"},
            {"schema_version", kBatchSchemaVersion},
            {"scenario", batch.header.scenario},
            {"dt", batch.header.dt},
            {"horizon", batch.header.horizon},
            {"count", batch.records.size()}};
  os << h.dump() << '\n';
  for (const auto& r : batch.records) {
    const Trajectory& t = r.trajectory;
    json steps = json::array();
    for (const auto& s : t.steps)
      steps.push_back({s.state.x, s.state.y, s.state.v, s.action.ax, s.action.vy});
    json rec = {{"agent_id", t.agent_id},
                {"seed", r.seed},
                {"start", {t.start.x, t.start.y, t.start.v}},
                {"steps", steps},
                {"terminal", to_string(t.terminal)},
                {"log_prob", r.log_prob}};
    os << rec.dump() << '\n';
  }
}

BatchFile read_batch(std::istream& is) {
  BatchFile batch;
  std::string line;
  try {
    if (!std::getline(is, line)) throw ConfigError("batch: missing header");
    const json h = json::parse(line);
    if (h.value("type", "") != "header") throw ConfigError("batch: first line is not a header");
    if (h.at("schema_version").get<int>() != kBatchSchemaVersion)
      throw ConfigError("batch: unsupported schema_version");
    batch.header.scenario = h.at("scenario").get<std::string>();
    batch.header.dt = h.at("dt").get<double>();
    batch.header.horizon = h.at("horizon").get<int>();
    batch.header.count = h.at("count").get<std::size_t>();
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      BatchRecord r;
      r.seed = j.at("seed").get<std::uint64_t>();
      r.log_prob = j.at("log_prob").get<double>();
      Trajectory& t = r.trajectory;
      t.agent_id = j.at("agent_id").get<int>();
      t.dt = batch.header.dt;
      t.horizon = batch.header.horizon;
      const auto start = j.at("start").get<std::vector<double>>();
      if (start.size() != 3) throw ConfigError("batch: start must be [x, y, v]");
      t.start = {start[0], start[1], start[2]};
      for (const auto& s : j.at("steps")) {
        const auto v = s.get<std::vector<double>>();
        if (v.size() != 5) throw ConfigError("batch: step must be [x, y, v, ax, vy]");
        t.steps.push_back({{v[0], v[1], v[2]}, {v[3], v[4], t.dt}});
      }
      t.terminal = terminal_from_string(j.at("terminal").get<std::string>());
      batch.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("batch: ") + e.what());
  }
  if (batch.records.size() != batch.header.count)
    throw ConfigError("batch: header count does not match records");
  return batch;
}

void save_batch(const BatchFile& batch, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_batch(os, batch);
  if (!os) throw std::runtime_error("write failed: " + path);
}

BatchFile load_batch(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path);
  return read_batch(is);
}

BatchFile make_batch(const Scenario& scenario, const std::vector<SampledBatchEntry>& entries) {
  BatchFile b;
  b.header = {scenario.name, scenario.dt, scenario.horizon, entries.size()};
  for (const auto& e : entries) b.records.push_back({e.trajectory, e.seed, e.log_prob});
  return b;
}

std::vector<Trajectory> trajectories(const BatchFile& batch) {
  std::vector<Trajectory> out;
  out.reserve(batch.records.size());
  for (const auto& r : batch.records) out.push_back(r.trajectory);
  return out;
}

}  // namespace mirl
