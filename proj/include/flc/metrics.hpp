#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace flc {

struct MetricsRow {
  long episode{0};
  long global_step{0};
  double reward{0.0};  // cumulative reward of the episode
  int steps{0};
  std::string cause;   // success | timeout | collision
  std::uint64_t collisions{0};  // to date
  std::uint64_t holds_no_ik{0};
  std::uint64_t holds_velocity{0};
};

inline const char* metrics_header() {
  return "episode,global_step,reward,steps,cause,collisions,holds_no_ik,"
         "holds_velocity";
}

inline std::string format_row(const MetricsRow& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%ld,%ld,%.17g,%d,%s,%" PRIu64 ",%" PRIu64 ",%" PRIu64,
                r.episode, r.global_step, r.reward, r.steps, r.cause.c_str(),
                r.collisions, r.holds_no_ik, r.holds_velocity);
  return buf;
}

inline void write_metrics_csv(const std::string& path,
                              const std::vector<MetricsRow>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << metrics_header() << '\n';
  for (const auto& r : rows) f << format_row(r) << '\n';
}

inline std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(f, line) || line != metrics_header())
    throw std::runtime_error("bad metrics header in " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    MetricsRow r;
    std::getline(ss, field, ',');
    r.episode = std::stol(field);
    std::getline(ss, field, ',');
    r.global_step = std::stol(field);
    std::getline(ss, field, ',');
    r.reward = std::stod(field);
    std::getline(ss, field, ',');
    r.steps = std::stoi(field);
    std::getline(ss, r.cause, ',');
    std::getline(ss, field, ',');
    r.collisions = std::stoull(field);
    std::getline(ss, field, ',');
    r.holds_no_ik = std::stoull(field);
    std::getline(ss, field, ',');
    r.holds_velocity = std::stoull(field);
    rows.push_back(std::move(r));
  }
  return rows;
}

// Exponential moving average with weight `w` on history, seeded with the
// first sample: s_0 = x_0, s_t = w s_{t-1} + (1-w) x_t.
inline std::vector<double> ema(const std::vector<double>& x, double w) {
  std::vector<double> s(x.size());
  for (size_t i = 0; i < x.size(); ++i)
    s[i] = i == 0 ? x[0] : w * s[i - 1] + (1.0 - w) * x[i];
  return s;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

inline double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / v.size());
}

// Piecewise-linear resampling of (step, value) onto a given step grid;
// clamped at both ends.
inline std::vector<double> resample(const std::vector<long>& steps,
                                    const std::vector<double>& values,
                                    const std::vector<long>& grid) {
  if (steps.empty()) throw std::invalid_argument("resample: empty curve");
  std::vector<double> out(grid.size());
  size_t k = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    const long g = grid[i];
    while (k + 1 < steps.size() && steps[k + 1] <= g) ++k;
    if (g <= steps.front()) {
      out[i] = values.front();
    } else if (g >= steps.back()) {
      out[i] = values.back();
    } else {
      const double t = double(g - steps[k]) / double(steps[k + 1] - steps[k]);
      out[i] = values[k] + t * (values[k + 1] - values[k]);
    }
  }
  return out;
}

}  // namespace flc
