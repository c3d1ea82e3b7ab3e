#pragma once

#include <memory>
#include <stdexcept>

#include "flc/controllers.hpp"
#include "flc/math_core.hpp"
#include "flc/reward.hpp"
#include "flc/robot_sim.hpp"
#include "flc/rng.hpp"
#include "flc/safety.hpp"

namespace flc {

enum class TerminationCause { Success, Timeout, Collision };

inline const char* to_string(TerminationCause c) {
  switch (c) {
    case TerminationCause::Success: return "success";
    case TerminationCause::Timeout: return "timeout";
    case TerminationCause::Collision: return "collision";
  }
  return "?";
}

struct EpisodeSpec {
  Pose x0;
  Pose x_g;
  int max_steps{150};
  double success_pos_tol{0.001};
  double success_rot_tol{0.0};  // 0 disables the orientation check
};

struct EpisodeRecord {
  double cumulative_reward{0.0};
  int steps{0};
  TerminationCause cause{TerminationCause::Timeout};
  bool collision{false};
};

enum class RobotKind { FreeFlyer, Planar3R };

struct EnvConfig {
  RobotKind robot{RobotKind::FreeFlyer};
  Vector3d workspace_min{Vector3d(-0.2, -0.2, -0.05)};
  Vector3d workspace_max{Vector3d(0.2, 0.2, 0.2)};
  double max_rotation{std::numbers::pi / 2.0};
  Vector3d planar_links{Vector3d(0.3, 0.3, 0.1)};

  bool contact_enabled{true};
  ContactWorld world;

  double sensor_force_noise{0.05};
  double sensor_torque_noise{0.005};
  double sensor_cutoff_hz{50.0};
  // cutoff of the velocity estimate used by the derivative terms; the raw
  // one-substep finite difference through the actuator lag is a feedback
  // path with loop gain kd and destabilizes the inner loop unfiltered
  double twist_cutoff_hz{5.0};

  SafetyLimits limits{Eigen::VectorXd::Constant(6, 1.0), 20.0, 2.0};

  std::string model_name{"P-14"};
  GainSchedule kp_x_schedule{GainSchedule::uniform(20.0, 15.0)};
  GainSchedule kp_f_schedule{GainSchedule::uniform(0.05, 0.04)};
  GainSchedule stiffness_schedule{GainSchedule::uniform(300.0, 250.0)};
  double zeta{1.0};
  double inertia{0.1};
  double integral_clamp{10.0};
  double admittance_velocity_clamp{10.0};

  double a_max_pos{0.02};   // pose action: max displacement per policy step, m
  double a_max_rot{0.05};   // rad
  double policy_dt{0.05};
  int substeps{25};
  double actuator_tau{0.01};

  // axes the task controls (planar profiles mask out-of-plane axes)
  Vector6d axis_mask{Vector6d::Ones()};

  // observation normalization: [x_e, xdot, F_ext] / these maxima
  Vector6d obs_x_norm{Vector6d::Constant(0.05)};
  Vector6d obs_v_norm{Vector6d::Constant(1.0)};
  Vector6d obs_f_norm{Vector6d::Constant(20.0)};

  RewardConfig reward;
  EpisodeSpec episode;
  double reset_jitter_pos_std{0.0};  // m, applied to x0 position
};

struct StepInfo {
  int executed{0};
  int holds_no_ik{0};
  int holds_velocity{0};
  bool aborted{false};
  bool done{false};
  TerminationCause cause{TerminationCause::Timeout};
  Wrench true_wrench;
};

struct StepResult {
  Eigen::VectorXd obs;
  double reward{0.0};
  bool done{false};
  StepInfo info;
};

// Exposed separately for tests: the proportional drive toward the goal that
// seeds the nominal trajectory.
inline Vector6d nominal_goal_drive(const Vector6d& x_e, const Vector6d& kp) {
  return kp.cwiseProduct(x_e);
}

// Peg-insertion environment: one 20 Hz policy step wraps `substeps` inner
// controller -> gate -> world -> sense cycles at 500 Hz.
class PegEnv {
 public:
  PegEnv(const EnvConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), rng_(seed),
        model_(ActionSpaceModel::by_name(cfg.model_name)),
        sensor_(cfg.sensor_force_noise, cfg.sensor_torque_noise,
                LowPassFilter::alpha_from_cutoff(cfg.sensor_cutoff_hz,
                                                 inner_dt()),
                rng_.split()),
        twist_filter_(LowPassFilter::alpha_from_cutoff(cfg.twist_cutoff_hz,
                                                       inner_dt())),
        controller_(make_controller(cfg, model_)) {
    robot_ = make_robot(cfg);
    if (!robot_->ik(cfg.episode.x0, Eigen::VectorXd::Zero(robot_->dof())))
      throw std::invalid_argument("PegEnv: x0 unreachable for this robot");
    reset();
  }

  int obs_dim() const { return 18; }
  int act_dim() const { return model_.dims(); }
  const ActionSpaceModel& model() const { return model_; }
  const EnvConfig& config() const { return cfg_; }
  const SafetyStats& stats() const { return stats_; }
  const EpisodeRecord& last_record() const { return record_; }
  bool done() const { return done_; }
  RobotModel& robot() { return *robot_; }
  ForceController& controller() { return controller_; }

  Eigen::VectorXd reset() {
    Pose x0 = cfg_.episode.x0;
    if (cfg_.reset_jitter_pos_std > 0.0)
      for (int i = 0; i < 3; ++i)
        x0.p[i] += rng_.normal(0.0, cfg_.reset_jitter_pos_std);
    auto q0 = robot_->ik(x0, Eigen::VectorXd::Zero(robot_->dof()));
    if (!q0) {
      // jittered start fell outside the workspace; fall back to the nominal
      q0 = robot_->ik(cfg_.episode.x0, Eigen::VectorXd::Zero(robot_->dof()));
    }
    robot_->set_q(*q0);
    controller_.reset_state();
    sensor_.reset();
    twist_filter_.reset();
    twist_ = Twist{};
    true_wrench_ = Wrench{};
    filtered_wrench_ = Wrench{};
    steps_ = 0;
    done_ = false;
    record_ = EpisodeRecord{};
    return observation();
  }

  StepResult step(const Eigen::VectorXd& a) {
    if (done_) throw std::logic_error("PegEnv::step called after done");
    const ExpandedAction ea = expand_action(model_, a);
    controller_.apply_actions(ea);

    // pose action: displacement over the whole policy step, split per substep
    Vector6d a_x_total;
    a_x_total.head<3>() = ea.pose.head<3>() * cfg_.a_max_pos;
    a_x_total.tail<3>() = ea.pose.tail<3>() * cfg_.a_max_rot;
    a_x_total = a_x_total.cwiseProduct(cfg_.axis_mask);
    const Vector6d a_x_sub = a_x_total / cfg_.substeps;

    StepResult res;
    const double dt = inner_dt();
    for (int k = 0; k < cfg_.substeps; ++k) {
      const Pose pose = robot_->pose();
      const Vector6d x_e =
          pose_error(cfg_.episode.x_g, pose).cwiseProduct(cfg_.axis_mask);
      const Vector6d xdot_e =
          -twist_filter_.state().cwiseProduct(cfg_.axis_mask);
      const Vector6d f_obs = filtered_wrench_.vec().cwiseProduct(cfg_.axis_mask);

      Vector6d u = controller_.step(x_e, xdot_e, a_x_sub, f_obs, dt);
      u = u.cwiseProduct(cfg_.axis_mask);
      const Pose x_c = pose_increment(pose, u);

      const GateResult g =
          gate(cfg_.limits, *robot_, x_c, filtered_wrench_, dt, &stats_);
      switch (g.verdict) {
        case Verdict::AbortForce:
          res.info.aborted = true;
          break;
        case Verdict::HoldNoIK:
          ++res.info.holds_no_ik;
          break;
        case Verdict::HoldVelocity:
          ++res.info.holds_velocity;
          break;
        case Verdict::Execute: {
          ++res.info.executed;
          auto w = world_step(*robot_, cfg_.world, g.q_c, dt,
                              cfg_.actuator_tau);
          twist_ = w.twist;
          true_wrench_ = cfg_.contact_enabled ? w.wrench : Wrench{};
          break;
        }
      }
      if (res.info.aborted) break;
      if (g.verdict != Verdict::Execute) twist_ = Twist{};
      twist_filter_.step(twist_.vec());
      filtered_wrench_ = sensor_.sense(true_wrench_);
    }

    ++steps_;
    const Vector6d x_e_now =
        pose_error(cfg_.episode.x_g, robot_->pose()).cwiseProduct(cfg_.axis_mask);
    TerminalKind terminal = TerminalKind::None;
    if (res.info.aborted) {
      terminal = TerminalKind::Collision;
      done_ = true;
      res.info.cause = TerminationCause::Collision;
    } else if (success(x_e_now)) {
      terminal = TerminalKind::Success;
      done_ = true;
      res.info.cause = TerminationCause::Success;
    } else if (steps_ >= cfg_.episode.max_steps) {
      done_ = true;
      res.info.cause = TerminationCause::Timeout;
    }

    res.reward = compute_reward(cfg_.reward, x_e_now, a,
                                filtered_wrench_.vec(), terminal);
    res.done = done_;
    res.info.done = done_;
    res.info.true_wrench = true_wrench_;
    res.obs = observation();

    record_.cumulative_reward += res.reward;
    record_.steps = steps_;
    if (done_) {
      record_.cause = res.info.cause;
      record_.collision = res.info.cause == TerminationCause::Collision;
    }
    return res;
  }

  Eigen::VectorXd observation() const {
    const Vector6d x_e =
        pose_error(cfg_.episode.x_g, robot_->pose()).cwiseProduct(cfg_.axis_mask);
    Eigen::VectorXd o(18);
    o.segment<6>(0) = x_e.cwiseQuotient(cfg_.obs_x_norm);
    o.segment<6>(6) = twist_filter_.state().cwiseQuotient(cfg_.obs_v_norm);
    o.segment<6>(12) = filtered_wrench_.vec().cwiseQuotient(cfg_.obs_f_norm);
    return o;
  }

  double inner_dt() const { return cfg_.policy_dt / cfg_.substeps; }

 private:
  bool success(const Vector6d& x_e) const {
    if (x_e.head<3>().norm() >= cfg_.episode.success_pos_tol) return false;
    if (cfg_.episode.success_rot_tol > 0.0 &&
        x_e.tail<3>().norm() >= cfg_.episode.success_rot_tol)
      return false;
    return true;
  }

  static std::unique_ptr<RobotModel> make_robot(const EnvConfig& cfg) {
    if (cfg.robot == RobotKind::Planar3R)
      return std::make_unique<Planar3R>(cfg.planar_links[0],
                                        cfg.planar_links[1],
                                        cfg.planar_links[2]);
    return std::make_unique<FreeFlyer>(cfg.workspace_min, cfg.workspace_max,
                                       cfg.max_rotation);
  }

  static ForceController make_controller(const EnvConfig& cfg,
                                         const ActionSpaceModel& model) {
    if (model.scheme == Scheme::Parallel)
      return ForceController(model,
                             ParallelSchedules{cfg.kp_x_schedule,
                                               cfg.kp_f_schedule},
                             cfg.integral_clamp);
    return ForceController(model,
                           AdmittanceSchedules{cfg.kp_x_schedule,
                                               cfg.stiffness_schedule},
                           cfg.zeta, cfg.inertia,
                           cfg.admittance_velocity_clamp);
  }

  EnvConfig cfg_;
  Rng rng_;
  ActionSpaceModel model_;
  FTSensor sensor_;
  LowPassFilter twist_filter_;
  ForceController controller_;
  std::unique_ptr<RobotModel> robot_;
  Twist twist_;
  Wrench true_wrench_;
  Wrench filtered_wrench_;
  SafetyStats stats_;
  EpisodeRecord record_;
  int steps_{0};
  bool done_{true};
};

}  // namespace flc
