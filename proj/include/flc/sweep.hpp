#pragma once

#include <filesystem>
#include <map>
#include <optional>

#include "flc/runner.hpp"

namespace flc {

struct SweepRunOutcome {
  std::string model;
  bool penalized{true};
  std::uint64_t seed{0};
  std::string run_dir;
  bool ok{false};
  std::string error;
  std::uint64_t collisions{0};
  double final_reward{0.0};
};

struct ComparisonRow {
  std::string model;
  double penalized_collisions{0.0};      // mean across seeds
  double non_penalized_collisions{0.0};  // mean across seeds
  double percent_difference{0.0};
};

// Difference of the non-penalized count relative to the penalized one,
// (penalized - non_penalized) / penalized * 100.
inline double collision_percent_difference(double penalized,
                                           double non_penalized) {
  if (penalized == 0.0) return 0.0;
  return 100.0 * (penalized - non_penalized) / penalized;
}

struct SweepResult {
  std::vector<SweepRunOutcome> runs;
  std::vector<ComparisonRow> comparison;
};

inline std::vector<ComparisonRow> build_comparison(
    const std::vector<SweepRunOutcome>& runs) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
      by_model;  // model -> (penalized counts, non-penalized counts)
  for (const auto& r : runs) {
    if (!r.ok) continue;
    auto& entry = by_model[r.model];
    (r.penalized ? entry.first : entry.second)
        .push_back(static_cast<double>(r.collisions));
  }
  std::vector<ComparisonRow> table;
  for (const auto& [model, counts] : by_model) {
    if (counts.first.empty() || counts.second.empty()) continue;
    ComparisonRow row;
    row.model = model;
    row.penalized_collisions = mean_of(counts.first);
    row.non_penalized_collisions = mean_of(counts.second);
    row.percent_difference = collision_percent_difference(
        row.penalized_collisions, row.non_penalized_collisions);
    table.push_back(row);
  }
  return table;
}

inline void write_comparison_csv(const std::string& path,
                                 const std::vector<ComparisonRow>& table) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "model,penalized_collisions,non_penalized_collisions,"
       "percent_difference\n";
  for (const auto& r : table) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g", r.model.c_str(),
                  r.penalized_collisions, r.non_penalized_collisions,
                  r.percent_difference);
    f << buf << '\n';
  }
}

enum class PenalizeMode { On, Off, Both };

// Cross product of models x seeds x penalize settings. Failed runs are
// recorded and the sweep continues.
inline SweepResult sweep_run(const RunConfig& base,
                             const std::vector<std::string>& models,
                             int seeds, PenalizeMode mode,
                             const std::string& out_dir, bool quiet = true) {
  namespace fs = std::filesystem;
  SweepResult result;
  if (models.empty()) {
    std::fprintf(stderr, "sweep: empty model list, nothing to do\n");
    return result;
  }
  fs::create_directories(out_dir);

  std::vector<bool> pen_settings;
  if (mode == PenalizeMode::On || mode == PenalizeMode::Both)
    pen_settings.push_back(true);
  if (mode == PenalizeMode::Off || mode == PenalizeMode::Both)
    pen_settings.push_back(false);

  for (const auto& model : models) {
    for (bool pen : pen_settings) {
      for (int s = 0; s < seeds; ++s) {
        RunConfig cfg = base;
        cfg.model = model;
        cfg.env.model_name = model;
        cfg.sac.act_dim = ActionSpaceModel::by_name(model).dims();
        cfg.penalize_collision = pen;
        cfg.env.reward.penalize_collision = pen;
        cfg.seed = base.seed + static_cast<std::uint64_t>(s);

        SweepRunOutcome out;
        out.model = model;
        out.penalized = pen;
        out.seed = cfg.seed;
        out.run_dir = out_dir + "/" + model + (pen ? "_pen" : "_nopen") +
                      "_seed" + std::to_string(s);
        try {
          const TrainResult tr = train_run(cfg, out.run_dir, quiet);
          out.ok = true;
          out.collisions = tr.stats.collisions;
          out.final_reward = tr.rows.empty() ? 0.0 : tr.rows.back().reward;
        } catch (const std::exception& e) {
          out.error = e.what();
          std::fprintf(stderr, "sweep: run %s failed: %s\n",
                       out.run_dir.c_str(), e.what());
        }
        result.runs.push_back(std::move(out));
      }
    }
  }

  result.comparison = build_comparison(result.runs);
  if (!result.comparison.empty())
    write_comparison_csv(out_dir + "/comparison.csv", result.comparison);
  {
    json j = json::array();
    for (const auto& r : result.runs)
      j.push_back({{"model", r.model},
                   {"penalized", r.penalized},
                   {"seed", r.seed},
                   {"run_dir", r.run_dir},
                   {"ok", r.ok},
                   {"error", r.error},
                   {"collisions", r.collisions},
                   {"final_reward", r.final_reward}});
    std::ofstream f(out_dir + "/sweep.json");
    f << j.dump(2) << '\n';
  }
  return result;
}

}  // namespace flc
