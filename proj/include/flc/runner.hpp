#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "flc/config.hpp"
#include "flc/metrics.hpp"
#include "flc/sac.hpp"
#include "flc/task_env.hpp"

namespace flc {

struct TrainResult {
  std::vector<MetricsRow> rows;
  SafetyStats stats;
  long final_step{0};
  long episodes{0};
  double final_success_rate{0.0};  // over the trailing window
  bool early_stopped{false};
  std::string run_dir;
};

inline double trailing_success_rate(const std::vector<MetricsRow>& rows,
                                    int window) {
  if (rows.empty()) return 0.0;
  const size_t n = std::min<size_t>(window, rows.size());
  size_t ok = 0;
  for (size_t i = rows.size() - n; i < rows.size(); ++i)
    if (rows[i].cause == "success") ++ok;
  return double(ok) / double(n);
}

inline void write_checkpoint(const std::string& path, const SacAgent& agent,
                             std::uint64_t cfg_hash) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write checkpoint " + path);
  f << "flc-checkpoint v1\n";
  f << "config_hash " << std::hex << cfg_hash << std::dec << '\n';
  agent.save(f);
}

inline std::uint64_t read_checkpoint(const std::string& path,
                                     SacAgent& agent) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read checkpoint " + path);
  std::string tag, version, key;
  std::uint64_t hash;
  f >> tag >> version >> key >> std::hex >> hash >> std::dec;
  if (tag != "flc-checkpoint" || version != "v1" || key != "config_hash")
    throw std::runtime_error("bad checkpoint header in " + path);
  agent.load(f);
  return hash;
}

// One seeded training run; writes config.json, metrics.csv, checkpoint.txt
// and summary.json into run_dir.
inline TrainResult train_run(const RunConfig& cfg, const std::string& run_dir,
                             bool quiet = true) {
  namespace fs = std::filesystem;
  fs::create_directories(run_dir);
  {
    std::ofstream f(run_dir + "/config.json");
    f << dump_run_config(cfg).dump(2) << '\n';
  }

  PegEnv env(cfg.env, cfg.seed);
  SacAgent agent(cfg.sac, cfg.seed ^ 0x9e3779b97f4a7c15ull);
  Rng warmup_rng(cfg.seed ^ 0xd1b54a32d192ed03ull);

  TrainResult result;
  result.run_dir = run_dir;
  Eigen::VectorXd obs = env.reset();
  long episode = 0;

  for (long step = 1; step <= cfg.total_steps; ++step) {
    Eigen::VectorXd action(env.act_dim());
    if (step <= cfg.warmup_steps) {
      for (int i = 0; i < action.size(); ++i)
        action[i] = warmup_rng.uniform(-1.0, 1.0);
    } else {
      action = agent.sample_action(obs).action;
    }
    const StepResult sr = env.step(action);
    agent.store({obs, action, sr.reward, sr.obs, sr.done});
    obs = sr.obs;

    if (step > cfg.warmup_steps && agent.can_update() &&
        step % cfg.update_every == 0)
      agent.update();

    const bool budget_done = step == cfg.total_steps;
    if (sr.done || budget_done) {
      MetricsRow row;
      row.episode = episode;
      row.global_step = step;
      row.reward = env.last_record().cumulative_reward;
      row.steps = env.last_record().steps;
      row.cause = sr.done ? to_string(sr.info.cause) : "timeout";
      row.collisions = env.stats().collisions;
      row.holds_no_ik = env.stats().holds_no_ik;
      row.holds_velocity = env.stats().holds_velocity;
      result.rows.push_back(row);
      ++episode;
      result.final_step = step;

      if (cfg.early_stop_success_rate > 0.0 &&
          result.rows.size() >= static_cast<size_t>(cfg.early_stop_window) &&
          trailing_success_rate(result.rows, cfg.early_stop_window) >=
              cfg.early_stop_success_rate) {
        result.early_stopped = true;
        break;
      }
      if (budget_done) break;
      obs = env.reset();
      if (!quiet && episode % 50 == 0)
        std::fprintf(stderr, "step %ld episode %ld reward %.1f\n", step,
                     episode, row.reward);
    }
  }

  result.stats = env.stats();
  result.episodes = episode;
  result.final_success_rate =
      trailing_success_rate(result.rows, cfg.early_stop_window);

  write_metrics_csv(run_dir + "/metrics.csv", result.rows);
  write_checkpoint(run_dir + "/checkpoint.txt", agent, config_hash(cfg));
  {
    json s;
    s["episodes"] = result.episodes;
    s["final_step"] = result.final_step;
    s["early_stopped"] = result.early_stopped;
    s["success_rate_trailing"] = result.final_success_rate;
    s["collisions"] = result.stats.collisions;
    s["holds_no_ik"] = result.stats.holds_no_ik;
    s["holds_velocity"] = result.stats.holds_velocity;
    std::ofstream f(run_dir + "/summary.json");
    f << s.dump(2) << '\n';
  }
  return result;
}

struct EvalReport {
  int episodes{0};
  int successes{0};
  double success_rate{0.0};
  double mean_steps_to_success{0.0};
  std::uint64_t collisions{0};
};

// Deterministic-policy rollouts of a trained checkpoint.
inline EvalReport eval_run(const RunConfig& cfg, const std::string& checkpoint,
                           int episodes, std::uint64_t eval_seed = 1234567) {
  SacAgent agent(cfg.sac, 0);
  const std::uint64_t hash = read_checkpoint(checkpoint, agent);
  if (hash != config_hash(cfg))
    throw std::runtime_error(
        "checkpoint/config hash mismatch: the checkpoint was trained with a "
        "different configuration");

  EvalReport report;
  report.episodes = episodes;
  if (episodes == 0) return report;

  PegEnv env(cfg.env, eval_seed);
  double steps_sum = 0.0;
  for (int e = 0; e < episodes; ++e) {
    Eigen::VectorXd obs = env.reset();
    while (true) {
      const auto a = agent.sample_action(obs, /*deterministic=*/true);
      const StepResult sr = env.step(a.action);
      obs = sr.obs;
      if (sr.done) break;
    }
    if (env.last_record().cause == TerminationCause::Success) {
      ++report.successes;
      steps_sum += env.last_record().steps;
    }
  }
  report.success_rate = double(report.successes) / episodes;
  report.mean_steps_to_success =
      report.successes > 0 ? steps_sum / report.successes : 0.0;
  report.collisions = env.stats().collisions;
  return report;
}

}  // namespace flc
