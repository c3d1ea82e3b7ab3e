#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flc/plot.hpp"
#include "flc/runner.hpp"
#include "flc/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::string output_root() {
  if (const char* root = std::getenv("FLC_OUTPUT_ROOT")) return root;
  return "runs";
}

flc::RunConfig load_or_default(const std::string& config_path) {
  if (config_path.empty()) return flc::parse_run_config(flc::json::object());
  return flc::load_run_config(config_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learned force control experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string model;
  long steps = -1;
  std::uint64_t seed = 0;
  bool seed_set = false, pen_set = false, penalize = true;
  bool verbose = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (JSON)");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_flag("-v,--verbose", verbose, "progress output on stderr");
  };

  // train
  auto* train = app.add_subcommand("train", "run one seeded training run");
  add_common(train);
  train->add_option("--seed", seed, "run seed")->each([&](const std::string&) {
    seed_set = true;
  });
  train->add_option("--steps", steps, "total policy steps");
  train->add_option("--model", model, "action-space model name");
  train->add_flag("--penalize,!--no-penalize", penalize,
                  "penalize safety violations in the reward")
      ->each([&](const std::string&) { pen_set = true; });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "models x seeds cross product");
  add_common(sweep);
  std::vector<std::string> sweep_models;
  int sweep_seeds = 3;
  std::string pen_mode = "both";
  sweep->add_option("--models", sweep_models, "model names")->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "seeds per setting");
  sweep->add_option("--penalize-mode", pen_mode, "on|off|both");
  sweep->add_option("--steps", steps, "total policy steps per run");
  sweep->add_option("--seed", seed, "base seed")->each([&](const std::string&) {
    seed_set = true;
  });

  // plot
  auto* plot = app.add_subcommand("plot", "learning-curve SVG from run dirs");
  std::vector<std::string> run_dirs;
  std::string out_svg = "curves.svg";
  double ema_weight = 0.6;
  plot->add_option("dirs", run_dirs, "run directories")->required();
  plot->add_option("--out", out_svg, "output SVG path");
  plot->add_option("--ema", ema_weight, "EMA smoothing weight on history");

  // eval
  auto* eval = app.add_subcommand("eval", "deterministic-policy evaluation");
  std::string checkpoint;
  int eval_episodes = 20;
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--config", config_path,
                   "config file (default: config.json next to checkpoint)");
  eval->add_option("--episodes", eval_episodes, "number of episodes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      flc::RunConfig cfg;
      try {
        cfg = load_or_default(config_path);
      } catch (const flc::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
      }
      if (seed_set) cfg.seed = seed;
      if (steps > 0) cfg.total_steps = steps;
      if (!model.empty()) {
        cfg.model = model;
        cfg.env.model_name = model;
        cfg.sac.act_dim = flc::ActionSpaceModel::by_name(model).dims();
      }
      if (pen_set) {
        cfg.penalize_collision = penalize;
        cfg.env.reward.penalize_collision = penalize;
      }
      if (out_dir.empty())
        out_dir = output_root() + "/" + cfg.model + "_seed" +
                  std::to_string(cfg.seed);
      const auto result = flc::train_run(cfg, out_dir, !verbose);
      std::printf("run dir: %s\n", result.run_dir.c_str());
      std::printf("episodes: %ld  final step: %ld  collisions: %llu\n",
                  result.episodes, result.final_step,
                  (unsigned long long)result.stats.collisions);
      std::printf("trailing success rate: %.3f%s\n",
                  result.final_success_rate,
                  result.early_stopped ? " (early stop)" : "");
      return kExitOk;
    }

    if (*sweep) {
      flc::RunConfig base;
      try {
        base = load_or_default(config_path);
      } catch (const flc::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
      }
      if (seed_set) base.seed = seed;
      if (steps > 0) base.total_steps = steps;
      flc::PenalizeMode mode;
      if (pen_mode == "on")
        mode = flc::PenalizeMode::On;
      else if (pen_mode == "off")
        mode = flc::PenalizeMode::Off;
      else if (pen_mode == "both")
        mode = flc::PenalizeMode::Both;
      else {
        std::fprintf(stderr, "config error: --penalize-mode must be on|off|both\n");
        return kExitConfig;
      }
      if (out_dir.empty()) out_dir = output_root() + "/sweep";
      const auto result =
          flc::sweep_run(base, sweep_models, sweep_seeds, mode, out_dir,
                         !verbose);
      if (result.runs.empty()) return kExitOk;
      std::printf("%-8s %12s %16s %10s\n", "model", "penalized",
                  "non-penalized", "diff %");
      for (const auto& row : result.comparison)
        std::printf("%-8s %12.1f %16.1f %9.0f%%\n", row.model.c_str(),
                    row.penalized_collisions, row.non_penalized_collisions,
                    row.percent_difference);
      for (const auto& r : result.runs)
        if (!r.ok)
          std::fprintf(stderr, "failed: %s (%s)\n", r.run_dir.c_str(),
                       r.error.c_str());
      return kExitOk;
    }

    if (*plot) {
      flc::plot_runs(run_dirs, out_svg, ema_weight);
      std::printf("wrote %s\n", out_svg.c_str());
      return kExitOk;
    }

    if (*eval) {
      if (config_path.empty())
        config_path = std::filesystem::path(checkpoint).parent_path().string() +
                      "/config.json";
      flc::RunConfig cfg;
      try {
        cfg = flc::load_run_config(config_path);
      } catch (const flc::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
      }
      const auto report = flc::eval_run(cfg, checkpoint, eval_episodes);
      std::printf("episodes: %d\n", report.episodes);
      std::printf("success rate: %.3f (%d/%d)\n", report.success_rate,
                  report.successes, report.episodes);
      std::printf("mean steps to success: %.1f\n",
                  report.mean_steps_to_success);
      std::printf("collisions: %llu\n", (unsigned long long)report.collisions);
      return kExitOk;
    }
  } catch (const flc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
