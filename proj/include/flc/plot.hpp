#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "flc/config.hpp"
#include "flc/metrics.hpp"

namespace flc {

struct Curve {
  std::vector<long> steps;
  std::vector<double> values;
};

struct ModelCurves {
  std::string model;
  std::vector<long> grid;
  std::vector<double> mean;
  std::vector<double> stddev;
  int runs{0};
};

// Aggregate per-model learning curves from run directories. Rewards are
// EMA-smoothed at plot time only; stored CSVs stay raw. Runs with mismatched
// step grids are resampled onto a uniform grid with a warning.
inline std::vector<ModelCurves> aggregate_curves(
    const std::vector<std::string>& run_dirs, double ema_weight = 0.6) {
  std::map<std::string, std::vector<Curve>> by_model;
  for (const auto& dir : run_dirs) {
    const RunConfig cfg = load_run_config(dir + "/config.json");
    const auto rows = read_metrics_csv(dir + "/metrics.csv");
    Curve c;
    std::vector<double> rewards;
    for (const auto& r : rows) {
      c.steps.push_back(r.global_step);
      rewards.push_back(r.reward);
    }
    c.values = ema(rewards, ema_weight);
    by_model[cfg.model].push_back(std::move(c));
  }

  std::vector<ModelCurves> out;
  for (auto& [model, curves] : by_model) {
    ModelCurves mc;
    mc.model = model;
    mc.runs = static_cast<int>(curves.size());
    bool same_grid = true;
    for (const auto& c : curves)
      if (c.steps != curves.front().steps) same_grid = false;
    if (same_grid) {
      mc.grid = curves.front().steps;
    } else {
      std::fprintf(stderr,
                   "plot: runs of model %s have mismatched step grids; "
                   "resampling to a common grid\n",
                   model.c_str());
      long lo = curves.front().steps.front(), hi = curves.front().steps.back();
      for (const auto& c : curves) {
        lo = std::min(lo, c.steps.front());
        hi = std::max(hi, c.steps.back());
      }
      const int n = 200;
      for (int i = 0; i < n; ++i)
        mc.grid.push_back(lo + (hi - lo) * static_cast<long>(i) / (n - 1));
    }
    std::vector<std::vector<double>> sampled;
    for (const auto& c : curves)
      sampled.push_back(same_grid ? c.values
                                  : resample(c.steps, c.values, mc.grid));
    mc.mean.resize(mc.grid.size());
    mc.stddev.resize(mc.grid.size());
    for (size_t i = 0; i < mc.grid.size(); ++i) {
      std::vector<double> col;
      for (const auto& s : sampled) col.push_back(s[i]);
      mc.mean[i] = mean_of(col);
      mc.stddev[i] = std_of(col);
    }
    out.push_back(std::move(mc));
  }
  return out;
}

// Minimal deterministic SVG: one bold mean polyline per model with a std
// band when more than one run contributed.
inline std::string render_svg(const std::vector<ModelCurves>& models,
                              int width = 760, int height = 440) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const int ml = 60, mr = 20, mt = 20, mb = 40;
  long x_lo = 0, x_hi = 1;
  double y_lo = 0.0, y_hi = 1.0;
  bool first = true;
  for (const auto& m : models) {
    for (size_t i = 0; i < m.grid.size(); ++i) {
      const double lo = m.mean[i] - m.stddev[i], hi = m.mean[i] + m.stddev[i];
      if (first) {
        x_lo = x_hi = m.grid[i];
        y_lo = lo;
        y_hi = hi;
        first = false;
      }
      x_lo = std::min(x_lo, m.grid[i]);
      x_hi = std::max(x_hi, m.grid[i]);
      y_lo = std::min(y_lo, lo);
      y_hi = std::max(y_hi, hi);
    }
  }
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;

  auto px = [&](long x) {
    return ml + (width - ml - mr) * double(x - x_lo) / double(x_hi - x_lo);
  };
  auto py = [&](double y) {
    return height - mb - (height - mt - mb) * (y - y_lo) / (y_hi - y_lo);
  };
  auto num = [](double v) {
    char b[32];
    std::snprintf(b, sizeof(b), "%.2f", v);
    return std::string(b);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(height - mb) + "\" x2=\"" +
         num(width - mr) + "\" y2=\"" + num(height - mb) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) +
         "\" y2=\"" + num(height - mb) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + num(ml) + "\" y=\"" + num(height - 8) +
         "\" font-size=\"12\">" + std::to_string(x_lo) + "</text>\n";
  svg += "<text x=\"" + num(width - mr - 40) + "\" y=\"" + num(height - 8) +
         "\" font-size=\"12\">" + std::to_string(x_hi) + "</text>\n";
  svg += "<text x=\"4\" y=\"" + num(height - mb) + "\" font-size=\"12\">" +
         num(y_lo) + "</text>\n";
  svg += "<text x=\"4\" y=\"" + num(mt + 10) + "\" font-size=\"12\">" +
         num(y_hi) + "</text>\n";

  int color = 0;
  int legend_y = mt + 14;
  for (const auto& m : models) {
    const std::string c = palette[color++ % 8];
    if (m.runs > 1) {
      std::string band = "<polygon fill=\"" + c +
                         "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
      for (size_t i = 0; i < m.grid.size(); ++i)
        band += num(px(m.grid[i])) + "," + num(py(m.mean[i] + m.stddev[i])) + " ";
      for (size_t i = m.grid.size(); i-- > 0;)
        band += num(px(m.grid[i])) + "," + num(py(m.mean[i] - m.stddev[i])) + " ";
      band += "\"/>\n";
      svg += band;
    }
    std::string line = "<polyline fill=\"none\" stroke=\"" + c +
                       "\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < m.grid.size(); ++i)
      line += num(px(m.grid[i])) + "," + num(py(m.mean[i])) + " ";
    line += "\"/>\n";
    svg += line;
    svg += "<text x=\"" + num(width - mr - 90) + "\" y=\"" +
           num(legend_y) + "\" font-size=\"12\" fill=\"" + c + "\">" +
           m.model + "</text>\n";
    legend_y += 16;
  }
  svg += "</svg>\n";
  return svg;
}

inline void plot_runs(const std::vector<std::string>& run_dirs,
                      const std::string& out_svg, double ema_weight = 0.6) {
  const auto curves = aggregate_curves(run_dirs, ema_weight);
  std::ofstream f(out_svg);
  if (!f) throw std::runtime_error("cannot write " + out_svg);
  f << render_svg(curves);
}

}  // namespace flc
