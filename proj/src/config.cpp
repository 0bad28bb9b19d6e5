#include "mirl/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mirl {

using nlohmann::json;

namespace {

json planner_json(const PlannerConfig& p) {
  return {{"budget", p.budget},
          {"c", p.c},
          {"exploration", p.exploration},
          {"pw_k", p.pw_k},
          {"pw_alpha", p.pw_alpha},
          {"ax_template", p.ax_template},
          {"vy_template", p.vy_template},
          {"lane_change_time", p.lane_change_time},
          {"jitter_ax", p.jitter_ax},
          {"jitter_vy", p.jitter_vy},
          {"gamma", p.gamma}};
}

PlannerConfig planner_parse(const json& j, PlannerConfig p = {}) {
  p.budget = j.value("budget", p.budget);
  p.c = j.value("c", p.c);
  p.exploration = j.value("exploration", p.exploration);
  p.pw_k = j.value("pw_k", p.pw_k);
  p.pw_alpha = j.value("pw_alpha", p.pw_alpha);
  p.ax_template = j.value("ax_template", p.ax_template);
  p.vy_template = j.value("vy_template", p.vy_template);
  p.lane_change_time = j.value("lane_change_time", p.lane_change_time);
  p.jitter_ax = j.value("jitter_ax", p.jitter_ax);
  p.jitter_vy = j.value("jitter_vy", p.jitter_vy);
  p.gamma = j.value("gamma", p.gamma);
  if (p.budget < 1) throw ConfigError("planner: budget must be >= 1");
  if (!(p.c > 0.0)) throw ConfigError("planner: c must be > 0");
  if (p.ax_template.empty()) throw ConfigError("planner: ax_template must not be empty");
  if (!(p.gamma > 0.0 && p.gamma <= 1.0)) throw ConfigError("planner: gamma must be in (0, 1]");
  return p;
}

}  // namespace

PlannerConfig planner_from_json(const std::string& text) {
  try {
    return planner_parse(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("planner config: ") + e.what());
  }
}

std::string planner_to_json(const PlannerConfig& cfg) { return planner_json(cfg).dump(2); }

bool RunConfig::operator==(const RunConfig& o) const {
  return scenarios == o.scenarios && output_dir == o.output_dir && seed == o.seed &&
         workers == o.workers && experts.count == o.experts.count &&
         experts.baseline_weights == o.experts.baseline_weights &&
         experts.planner == o.experts.planner && trainer == o.trainer &&
         eval.thresholds == o.eval.thresholds && eval.episodes == o.eval.episodes;
}

RunConfig run_config_from_json(const std::string& text, const std::string& base_dir) {
  try {
    const json j = json::parse(text);
    RunConfig cfg;
    for (const auto& s : j.at("scenarios")) {
      std::filesystem::path p = s.get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      cfg.scenarios.push_back(p.lexically_normal().string());
    }
    if (cfg.scenarios.empty()) throw ConfigError("run config: no scenarios listed");
    std::filesystem::path out = j.value("output_dir", cfg.output_dir);
    if (out.is_relative() && !base_dir.empty()) out = std::filesystem::path(base_dir) / out;
    cfg.output_dir = out.lexically_normal().string();
    cfg.seed = j.value("seed", cfg.seed);
    cfg.workers = j.value("workers", cfg.workers);

    const PlannerConfig shared = j.contains("planner") ? planner_parse(j["planner"]) : PlannerConfig{};
    if (j.contains("experts")) {
      const auto& e = j["experts"];
      cfg.experts.count = e.value("count", cfg.experts.count);
      if (e.contains("baseline_weights")) {
        const auto w = e["baseline_weights"].get<std::vector<double>>();
        if (w.size() != kNumFeatures) throw ConfigError("experts: baseline_weights needs 7 entries");
        std::copy(w.begin(), w.end(), cfg.experts.baseline_weights.begin());
      }
      cfg.experts.planner = e.contains("planner") ? planner_parse(e["planner"], shared) : shared;
    } else {
      cfg.experts.planner = shared;
    }

    TrainerConfig& t = cfg.trainer;
    t.planner = shared;
    if (j.contains("trainer")) {
      const auto& tj = j["trainer"];
      t.learning_rate = tj.value("learning_rate", t.learning_rate);
      t.outer_steps = tj.value("outer_steps", t.outer_steps);
      t.samples_per_step = tj.value("samples_per_step", t.samples_per_step);
      t.gamma = tj.value("gamma", t.gamma);
      t.model_kind = tj.value("model", t.model_kind);
      t.hidden = tj.value("hidden", t.hidden);
      t.eval_interval = tj.value("eval_interval", t.eval_interval);
      t.knn_k = tj.value("knn_k", t.knn_k);
      if (tj.contains("planner")) t.planner = planner_parse(tj["planner"], shared);
    }
    t.seed = cfg.seed;
    t.workers = cfg.workers;
    if (!(t.learning_rate > 0.0)) throw ConfigError("trainer: learning_rate must be > 0");
    if (t.outer_steps < 0 || t.samples_per_step < 1)
      throw ConfigError("trainer: outer_steps >= 0, samples_per_step >= 1 required");
    if (t.model_kind != "linear" && t.model_kind != "mlp")
      throw ConfigError("trainer: model must be 'linear' or 'mlp'");
    if (t.hidden < 1) throw ConfigError("trainer: hidden must be >= 1");

    if (j.contains("eval")) {
      const auto& ej = j["eval"];
      cfg.eval.thresholds.k = ej.value("k", cfg.eval.thresholds.k);
      cfg.eval.thresholds.velocity_band = ej.value("velocity_band", cfg.eval.thresholds.velocity_band);
      cfg.eval.episodes = ej.value("episodes", cfg.eval.episodes);
    }
    if (cfg.eval.thresholds.k < 1) throw ConfigError("eval: k must be >= 1");
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
}

std::string run_config_to_json(const RunConfig& cfg) {
  json j;
  j["scenarios"] = cfg.scenarios;
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["planner"] = planner_json(cfg.trainer.planner);
  j["experts"] = {{"count", cfg.experts.count},
                  {"baseline_weights", cfg.experts.baseline_weights},
                  {"planner", planner_json(cfg.experts.planner)}};
  j["trainer"] = {{"learning_rate", cfg.trainer.learning_rate},
                  {"outer_steps", cfg.trainer.outer_steps},
                  {"samples_per_step", cfg.trainer.samples_per_step},
                  {"gamma", cfg.trainer.gamma},
                  {"model", cfg.trainer.model_kind},
                  {"hidden", cfg.trainer.hidden},
                  {"eval_interval", cfg.trainer.eval_interval},
                  {"knn_k", cfg.trainer.knn_k},
                  {"planner", planner_json(cfg.trainer.planner)}};
  j["eval"] = {{"k", cfg.eval.thresholds.k},
               {"velocity_band", cfg.eval.thresholds.velocity_band},
               {"episodes", cfg.eval.episodes}};
  return j.dump(2);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  RunConfig cfg =
      run_config_from_json(ss.str(), std::filesystem::path(path).parent_path().string());
  for (const auto& s : cfg.scenarios)
    if (!std::filesystem::exists(s)) throw ConfigError("scenario file not found: " + s);
  return cfg;
}

}  // namespace mirl
