#pragma once

#include <cmath>

#include "flc/math_core.hpp"
#include "flc/types.hpp"

namespace flc {

enum class TerminalKind { None, Success, Collision };

// Shaping weights and normalization maxima for the per-step reward
//   r = w1 Lm(|x_e/x_max|_{1,2}) + w2 Lm(|a/a_max|_2)
//     + w3 Lm(|F/F_max|_2) + w4 rho + w5 kappa
// with Lm(y) = 1 - clamp(y, 0, 1) and kappa in {200, -10, 0}.
struct RewardConfig {
  double w1{1.0};
  double w2{0.1};
  double w3{0.3};
  double w4{1.0};
  double w5{1.0};
  Vector6d x_max{Vector6d::Constant(0.05)};
  double a_max{1.0};
  Vector6d f_max{Vector6d::Constant(20.0)};
  double rho{-0.01};
  double l12_c{1e-4};  // smoothing constant of the L1,2 norm
  bool penalize_collision{true};
};

inline double linear_map_10(double y) { return 1.0 - clamp01(y); }

// Smoothed L1,2 magnitude 0.5 n^2 + sqrt(c + n^2), rescaled so that n=0
// maps to 0 and n=1 maps to 1.
inline double l12_normalized(double n, double c) {
  auto f = [c](double x) { return 0.5 * x * x + std::sqrt(c + x * x); };
  return (f(n) - f(0.0)) / (f(1.0) - f(0.0));
}

inline double terminal_kappa(const RewardConfig& cfg, TerminalKind terminal) {
  switch (terminal) {
    case TerminalKind::Success:
      return 200.0;
    case TerminalKind::Collision:
      return cfg.penalize_collision ? -10.0 : 0.0;
    case TerminalKind::None:
      break;
  }
  return 0.0;
}

inline double compute_reward(const RewardConfig& cfg, const Vector6d& x_e,
                             const Eigen::VectorXd& a, const Vector6d& f_ext,
                             TerminalKind terminal) {
  const double dist = x_e.cwiseQuotient(cfg.x_max).norm();
  const double act = a.norm() / cfg.a_max;
  const double force = f_ext.cwiseQuotient(cfg.f_max).norm();
  return cfg.w1 * linear_map_10(l12_normalized(dist, cfg.l12_c)) +
         cfg.w2 * linear_map_10(act) + cfg.w3 * linear_map_10(force) +
         cfg.w4 * cfg.rho + cfg.w5 * terminal_kappa(cfg, terminal);
}

}  // namespace flc
