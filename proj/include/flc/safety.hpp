#pragma once

#include <cstdint>
#include <stdexcept>

#include "flc/robot_sim.hpp"
#include "flc/types.hpp"

namespace flc {

struct SafetyLimits {
  Eigen::VectorXd qdot_max;   // per-joint, rad/s or m/s
  double f_max{20.0};         // per-axis contact force limit, N
  double tau_max{2.0};        // per-axis contact torque limit, N·m

  SafetyLimits() = default;
  SafetyLimits(Eigen::VectorXd qd, double f, double tau)
      : qdot_max(std::move(qd)), f_max(f), tau_max(tau) {
    if ((qdot_max.array() <= 0.0).any() || f_max <= 0.0 || tau_max <= 0.0)
      throw std::invalid_argument("SafetyLimits: limits must be positive");
  }
};

enum class Verdict : std::uint8_t { Execute, HoldNoIK, HoldVelocity, AbortForce };

struct GateResult {
  Verdict verdict{Verdict::Execute};
  Eigen::VectorXd q_c;  // valid only when verdict == Execute
};

struct SafetyStats {
  std::uint64_t holds_no_ik{0};
  std::uint64_t holds_velocity{0};
  std::uint64_t collisions{0};  // episodes aborted by force
};

// True iff any axis magnitude strictly exceeds its limit (F_ext > F_max).
inline bool is_collision(const SafetyLimits& limits, const Wrench& f_ext) {
  return (f_ext.force.cwiseAbs().array() > limits.f_max).any() ||
         (f_ext.torque.cwiseAbs().array() > limits.tau_max).any();
}

// Validate one streamed command. A force violation aborts the episode
// regardless of the command; otherwise a missing IK solution or an excessive
// joint velocity holds the robot in place for this substep. Only Execute
// carries a q_c.
inline GateResult gate(const SafetyLimits& limits, const RobotModel& robot,
                       const Pose& x_c, const Wrench& f_ext, double dt,
                       SafetyStats* stats = nullptr) {
  if (is_collision(limits, f_ext)) {
    if (stats) ++stats->collisions;
    return {Verdict::AbortForce, {}};
  }
  const auto q_c = robot.ik(x_c, robot.q());
  if (!q_c) {
    if (stats) ++stats->holds_no_ik;
    return {Verdict::HoldNoIK, {}};
  }
  const Eigen::VectorXd qdot = ((*q_c - robot.q()) / dt).cwiseAbs();
  if ((qdot.array() > limits.qdot_max.array()).any()) {
    if (stats) ++stats->holds_velocity;
    return {Verdict::HoldVelocity, {}};
  }
  return {Verdict::Execute, *q_c};
}

}  // namespace flc
