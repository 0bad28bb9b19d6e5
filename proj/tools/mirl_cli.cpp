// mirl: expert generation, reward learning and evaluation driver.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mirl/config.hpp"
#include "mirl/eval.hpp"
#include "mirl/io.hpp"
#include "mirl/irl.hpp"
#include "mirl/pipeline.hpp"
#include "mirl/training_log.hpp"

namespace fs = std::filesystem;
using namespace mirl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<std::string> checkpoint;
  std::optional<std::string> baseline;
  std::optional<long> stop_after;
  bool restart = false;
  std::string inspect_file;
};

RunConfig load(const Options& o) {
  RunConfig cfg = load_run_config(o.config);
  if (o.seed) cfg.seed = cfg.trainer.seed = *o.seed;
  if (o.workers) cfg.workers = cfg.trainer.workers = *o.workers;
  if (o.out) cfg.output_dir = *o.out;
  return cfg;
}

std::vector<Scenario> load_scenarios(const RunConfig& cfg) {
  std::vector<Scenario> out;
  for (const auto& p : cfg.scenarios) out.push_back(load_scenario(p));
  return out;
}

fs::path ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw std::runtime_error("cannot create directory " + p.string());
  return p;
}

fs::path experts_path(const RunConfig& cfg, const Scenario& s) {
  return fs::path(cfg.output_dir) / "experts" / (s.name + ".jsonl");
}

RewardModel baseline_model(const RunConfig& cfg) {
  return RewardModel(LinearParams{cfg.experts.baseline_weights});
}

int cmd_gen_experts(const Options& o) {
  const RunConfig cfg = load(o);
  const auto scenarios = load_scenarios(cfg);
  const fs::path dir = ensure_dir(fs::path(cfg.output_dir) / "experts");
  const RewardModel baseline = baseline_model(cfg);
  save_checkpoint({baseline, 0}, (dir / "baseline.json").string());
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const BatchFile batch =
        generate_experts(scenarios[s], baseline, cfg.experts.planner, cfg.experts.count,
                         scenario_seed(cfg.seed, s, SeedStream::experts), cfg.workers);
    save_batch(batch, experts_path(cfg, scenarios[s]).string());
    std::cout << scenarios[s].name << ": " << batch.records.size() << " expert trajectories\n";
  }
  return kExitOk;
}

std::optional<fs::path> latest_checkpoint(const fs::path& dir) {
  std::optional<fs::path> best;
  if (!fs::is_directory(dir)) return best;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("step_", 0) != 0 || e.path().extension() != ".json") continue;
    if (!best || name > best->filename().string()) best = e.path();
  }
  return best;
}

std::string step_name(long step) {
  std::ostringstream ss;
  ss << "step_" << std::setw(6) << std::setfill('0') << step << ".json";
  return ss.str();
}

void write_curves(const fs::path& dir, const std::vector<TrainingLogRecord>& log) {
  const auto curve = convergence_curve(log);
  std::ofstream csv(dir / "curve.csv");
  write_curve_csv(csv, curve);
  std::ofstream svg(dir / "curve.svg");
  write_curve_svg(svg, curve, "kNN distance to experts");
}

int cmd_train(const Options& o) {
  const RunConfig cfg = load(o);
  const auto scenarios = load_scenarios(cfg);
  std::vector<TrainingScenario> training;
  for (const auto& s : scenarios) {
    const fs::path p = experts_path(cfg, s);
    if (!fs::exists(p)) throw ConfigError("missing expert file " + p.string() + " (run gen-experts)");
    training.push_back({s, trajectories(load_batch(p.string()))});
  }

  const fs::path dir = ensure_dir(fs::path(cfg.output_dir) / "train");
  const fs::path ckpt_dir = dir / "checkpoints";
  const fs::path log_path = dir / "log.csv";
  if (o.restart) {
    fs::remove_all(ckpt_dir);
    fs::remove(log_path);
  }
  ensure_dir(ckpt_dir);

  std::optional<Checkpoint> resume;
  std::vector<TrainingLogRecord> prior;
  if (auto latest = latest_checkpoint(ckpt_dir)) {
    resume = load_checkpoint(latest->string());
    if (resume->model.kind() != cfg.trainer.model_kind)
      throw ConfigError("checkpoint kind does not match trainer model");
    if (std::ifstream is(log_path); is) prior = read_training_log(is);
    std::erase_if(prior, [&](const TrainingLogRecord& r) { return r.step >= resume->step; });
    std::cout << "resuming from step " << resume->step << '\n';
  } else {
    save_checkpoint({initial_model(cfg.trainer), 0}, (ckpt_dir / step_name(0)).string());
  }

  {
    std::ofstream os(log_path, std::ios::trunc);
    write_training_log_header(os);
    for (const auto& r : prior) write_training_log_row(os, r);
  }

  std::optional<long> stop_at;
  if (o.stop_after) stop_at = (resume ? resume->step : 0) + *o.stop_after;

  std::ofstream log(log_path, std::ios::app);
  auto on_step = [&](const Checkpoint& c, const TrainingLogRecord& r) {
    save_checkpoint(c, (ckpt_dir / step_name(c.step)).string());
    write_training_log_row(log, r);
    log.flush();
  };

  int code = kExitOk;
  std::vector<TrainingLogRecord> full = prior;
  try {
    TrainResult res = train(training, cfg.trainer, resume, on_step, stop_at);
    full.insert(full.end(), res.log.begin(), res.log.end());
    std::cout << "trained to step " << res.checkpoint.step << '\n';
  } catch (const TrainingDiverged& e) {
    std::cerr << "divergence: " << e.what() << "; last finite checkpoint at step "
              << e.last_finite.step << '\n';
    full.insert(full.end(), e.log.begin(), e.log.end());
    code = kExitDivergence;
  }
  write_curves(dir, full);
  return code;
}

int cmd_eval(const Options& o) {
  const RunConfig cfg = load(o);
  const auto scenarios = load_scenarios(cfg);
  const fs::path ckpt_dir = fs::path(cfg.output_dir) / "train" / "checkpoints";
  fs::path ckpt_path;
  if (o.checkpoint) {
    ckpt_path = *o.checkpoint;
  } else if (auto latest = latest_checkpoint(ckpt_dir)) {
    ckpt_path = *latest;
  } else {
    throw ConfigError("no checkpoint given and none found in " + ckpt_dir.string());
  }
  const Checkpoint ckpt = load_checkpoint(ckpt_path.string());
  std::optional<Checkpoint> baseline;
  if (o.baseline) baseline = load_checkpoint(*o.baseline);

  const fs::path dir = ensure_dir(fs::path(cfg.output_dir) / "eval");
  const fs::path sample_dir = ensure_dir(dir / "samples");
  std::vector<ScenarioReport> reports;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const fs::path ep = experts_path(cfg, scenarios[s]);
    if (!fs::exists(ep)) throw ConfigError("missing expert file " + ep.string());
    const auto experts = trajectories(load_batch(ep.string()));
    const std::uint64_t seed = scenario_seed(cfg.seed, s, SeedStream::eval);
    const BatchFile samples = sample_model(scenarios[s], ckpt.model, cfg.trainer.planner,
                                           cfg.eval.episodes, seed, cfg.workers);
    save_batch(samples, (sample_dir / (scenarios[s].name + ".jsonl")).string());
    const auto sample_trajs = trajectories(samples);
    std::optional<ScenarioReport> base_report;
    if (baseline) {
      const BatchFile base = sample_model(scenarios[s], baseline->model, cfg.trainer.planner,
                                          cfg.eval.episodes, seed, cfg.workers);
      base_report = scenario_report(trajectories(base), experts, scenarios[s],
                                    cfg.eval.thresholds);
    }
    reports.push_back(scenario_report(sample_trajs, experts, scenarios[s], cfg.eval.thresholds,
                                      base_report ? &*base_report : nullptr));
  }
  {
    std::ofstream os(dir / "report.csv");
    write_report_csv(os, reports, false);
  }
  if (baseline) {
    std::ofstream os(dir / "delta_report.csv");
    write_report_csv(os, reports, true);
  }
  const fs::path log_path = fs::path(cfg.output_dir) / "train" / "log.csv";
  if (std::ifstream is(log_path); is) write_curves(dir, read_training_log(is));
  write_report_csv(std::cout, reports, false);
  return kExitOk;
}

int cmd_inspect(const Options& o) {
  const BatchFile b = load_batch(o.inspect_file);
  std::cout << "scenario " << b.header.scenario << ", dt " << b.header.dt << " s, horizon "
            << b.header.horizon << ", " << b.records.size() << " trajectories\n";
  for (std::size_t k = 0; k < b.records.size(); ++k) {
    const auto& r = b.records[k];
    const auto& t = r.trajectory;
    std::cout << "\n#" << k << " agent " << t.agent_id << "  seed " << r.seed << "  terminal "
              << to_string(t.terminal) << "  log_prob " << r.log_prob << '\n';
    std::cout << "   t        x        y        v       ax       vy\n";
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      const auto& s = t.steps[i];
      std::printf("%4zu %8.2f %8.2f %8.2f %8.2f %8.2f\n", i, s.state.x, s.state.y, s.state.v,
                  s.action.ax, s.action.vy);
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward learning for cooperative trajectory planning"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Master seed (overrides config)");
    sub->add_option("--workers", o.workers, "Parallel episode workers")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output directory (overrides config)");
  };

  auto* gen = app.add_subcommand("gen-experts", "Plan expert demonstrations with the baseline reward");
  add_common(gen);
  auto* tr = app.add_subcommand("train", "Learn reward parameters from the expert files");
  add_common(tr);
  tr->add_flag("--restart", o.restart, "Discard existing checkpoints and log");
  tr->add_option("--stop-after", o.stop_after, "Stop after this many steps (resumable)");
  auto* ev = app.add_subcommand("eval", "Sample under a checkpoint and write reports");
  add_common(ev);
  ev->add_option("--checkpoint", o.checkpoint, "Checkpoint to evaluate (default: latest)");
  ev->add_option("--baseline", o.baseline, "Baseline checkpoint for delta columns");
  auto* insp = app.add_subcommand("inspect", "Pretty-print a trajectory batch file");
  insp->add_option("file", o.inspect_file)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen_experts(o);
    if (*tr) return cmd_train(o);
    if (*ev) return cmd_eval(o);
    if (*insp) return cmd_inspect(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
