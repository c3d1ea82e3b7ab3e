#include <doctest.h>

#include <cmath>

#include "flc/task_env.hpp"

using namespace flc;

namespace {

// Free-space configuration: quiet sensor, no contact, start 2 cm from goal.
EnvConfig free_space_config(const std::string& model = "P-14") {
  EnvConfig cfg;
  cfg.model_name = model;
  cfg.contact_enabled = false;
  cfg.sensor_force_noise = 0.0;
  cfg.sensor_torque_noise = 0.0;
  cfg.world.surface_z = -10.0;
  cfg.episode.x0.p = Vector3d(0.02, 0.0, 0.05);
  cfg.episode.x_g.p = Vector3d(0.0, 0.0, 0.05);
  return cfg;
}

double shaping_at_rest(const RewardConfig& r) {
  // x_e = 0, a = 0, F = 0
  return r.w1 + r.w2 + r.w3 + r.w4 * r.rho;
}

}  // namespace

TEST_CASE("smoothed distance norm endpoints and monotonicity") {
  const double c = 1e-4;
  CHECK(l12_normalized(0.0, c) == 0.0);
  CHECK(l12_normalized(1.0, c) == doctest::Approx(1.0));
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = l12_normalized(i / 100.0, c);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("terminal bonus values") {
  RewardConfig cfg;
  CHECK(terminal_kappa(cfg, TerminalKind::Success) == 200.0);
  CHECK(terminal_kappa(cfg, TerminalKind::Collision) == -10.0);
  CHECK(terminal_kappa(cfg, TerminalKind::None) == 0.0);
  cfg.penalize_collision = false;
  CHECK(terminal_kappa(cfg, TerminalKind::Collision) == 0.0);
  CHECK(terminal_kappa(cfg, TerminalKind::Success) == 200.0);
}

TEST_CASE("reward algebra") {
  RewardConfig cfg;
  const Vector6d zero = Vector6d::Zero();
  const Eigen::VectorXd a0 = Eigen::VectorXd::Zero(14);

  SUBCASE("perfect rest gives the full shaping sum") {
    const double r = compute_reward(cfg, zero, a0, zero, TerminalKind::None);
    CHECK(r == doctest::Approx(shaping_at_rest(cfg)).epsilon(1e-12));
    CHECK(r == doctest::Approx(1.39));
  }
  SUBCASE("success adds w5 * 200") {
    const double base = compute_reward(cfg, zero, a0, zero, TerminalKind::None);
    const double win = compute_reward(cfg, zero, a0, zero, TerminalKind::Success);
    CHECK(win - base == doctest::Approx(cfg.w5 * 200.0));
  }
  SUBCASE("collision penalty is -10, or 0 when disabled") {
    const double base = compute_reward(cfg, zero, a0, zero, TerminalKind::None);
    const double hit =
        compute_reward(cfg, zero, a0, zero, TerminalKind::Collision);
    CHECK(hit - base == doctest::Approx(-cfg.w5 * 10.0));
    cfg.penalize_collision = false;
    CHECK(compute_reward(cfg, zero, a0, zero, TerminalKind::Collision) ==
          doctest::Approx(base));
  }
  SUBCASE("distance term clamps to zero at the normalization radius") {
    const Vector6d far = cfg.x_max;  // norm sqrt(6) > 1
    const double r = compute_reward(cfg, far, a0, zero, TerminalKind::None);
    CHECK(r == doctest::Approx(cfg.w2 + cfg.w3 + cfg.w4 * cfg.rho));
  }
  SUBCASE("reward is monotone non-increasing in the distance") {
    double prev = 1e9;
    for (int i = 0; i <= 50; ++i) {
      Vector6d x_e = Vector6d::Zero();
      x_e[0] = 0.002 * i;
      const double r = compute_reward(cfg, x_e, a0, zero, TerminalKind::None);
      CHECK(r <= prev + 1e-12);
      prev = r;
    }
  }
  SUBCASE("non-terminal reward is bounded") {
    Rng rng(13);
    const double lo = cfg.w4 * cfg.rho;
    const double hi = shaping_at_rest(cfg);
    for (int i = 0; i < 5000; ++i) {
      Vector6d x_e, f;
      Eigen::VectorXd a(14);
      for (int j = 0; j < 6; ++j) x_e[j] = rng.uniform(-0.2, 0.2);
      for (int j = 0; j < 6; ++j) f[j] = rng.uniform(-50.0, 50.0);
      for (int j = 0; j < 14; ++j) a[j] = rng.uniform(-1.0, 1.0);
      const double r = compute_reward(cfg, x_e, a, f, TerminalKind::None);
      CHECK(r >= lo - 1e-12);
      CHECK(r <= hi + 1e-12);
    }
  }
}

TEST_CASE("nominal goal drive is the elementwise proportional term") {
  Vector6d x_e, kp;
  x_e << 0.01, -0.02, 0.0, 0.1, 0.0, -0.1;
  kp << 10, 20, 30, 1, 2, 3;
  const Vector6d d = nominal_goal_drive(x_e, kp);
  CHECK(d[0] == doctest::Approx(0.1));
  CHECK(d[1] == doctest::Approx(-0.4));
  CHECK(d[5] == doctest::Approx(-0.3));
}

TEST_CASE("reset is deterministic per seed and jitter spreads the start") {
  EnvConfig cfg = free_space_config();
  SUBCASE("no jitter: observation encodes the nominal start error") {
    PegEnv env(cfg, 42);
    const Eigen::VectorXd o = env.reset();
    CHECK(o.size() == 18);
    // x_e = x_g - x0 = (-0.02, 0, 0), normalized by 0.05
    CHECK(o[0] == doctest::Approx(-0.4));
    CHECK(o.segment(1, 17).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("same seed gives identical resets") {
    cfg.reset_jitter_pos_std = 0.005;
    PegEnv a(cfg, 7), b(cfg, 7);
    for (int i = 0; i < 20; ++i)
      CHECK((a.reset() - b.reset()).norm() == 0.0);
  }
  SUBCASE("jitter standard deviation is roughly as configured") {
    cfg.reset_jitter_pos_std = 0.005;
    PegEnv env(cfg, 99);
    const int n = 2000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = env.reset()[0] * 0.05 + 0.02;  // recovered x0 offset
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / n;
    const double std = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::abs(mean) < 0.001);
    CHECK(std == doctest::Approx(0.005).epsilon(0.15));
  }
}

TEST_CASE("one policy step runs exactly the configured substeps") {
  EnvConfig cfg = free_space_config();
  PegEnv env(cfg, 1);
  env.reset();
  const StepResult r = env.step(Eigen::VectorXd::Zero(env.act_dim()));
  CHECK(r.info.executed + r.info.holds_no_ik + r.info.holds_velocity ==
        cfg.substeps);
  CHECK(r.info.executed == 25);
}

TEST_CASE("stepping a finished episode throws") {
  EnvConfig cfg = free_space_config();
  cfg.episode.x0 = cfg.episode.x_g;  // done on the first step via success
  PegEnv env(cfg, 3);
  env.reset();
  const StepResult r = env.step(Eigen::VectorXd::Zero(env.act_dim()));
  CHECK(r.done);
  CHECK(r.info.cause == TerminationCause::Success);
  CHECK(r.reward > 200.0);
  CHECK_THROWS_AS(env.step(Eigen::VectorXd::Zero(env.act_dim())),
                  std::logic_error);
}

TEST_CASE("force violation terminates the episode as a collision") {
  EnvConfig cfg = free_space_config();
  cfg.sensor_force_noise = 0.05;  // noise alone trips a microscopic limit
  cfg.limits = SafetyLimits(Eigen::VectorXd::Constant(6, 1.0), 1e-9, 1e-9);
  PegEnv env(cfg, 11);
  env.reset();
  const StepResult r = env.step(Eigen::VectorXd::Zero(env.act_dim()));
  CHECK(r.done);
  CHECK(r.info.aborted);
  CHECK(r.info.cause == TerminationCause::Collision);
  CHECK(env.last_record().collision);
  CHECK(env.stats().collisions == 1);

  SUBCASE("disabling the penalty raises the reward by exactly w5 * 10") {
    EnvConfig soft = cfg;
    soft.reward.penalize_collision = false;
    PegEnv env2(soft, 11);  // same seed, same noise stream
    env2.reset();
    const StepResult r2 = env2.step(Eigen::VectorXd::Zero(env2.act_dim()));
    CHECK(r2.info.cause == TerminationCause::Collision);
    CHECK(r2.reward - r.reward == doctest::Approx(10.0));
  }
}

TEST_CASE("zero-action policy converges to the goal in free space") {
  for (const std::string model : {"P-14", "A-13pd"}) {
    CAPTURE(model);
    EnvConfig cfg = free_space_config(model);
    PegEnv env(cfg, 5);
    Eigen::VectorXd o = env.reset();
    double prev_err = std::abs(o[0]);
    bool succeeded = false;
    for (int t = 0; t < cfg.episode.max_steps && !succeeded; ++t) {
      const StepResult r = env.step(Eigen::VectorXd::Zero(env.act_dim()));
      const double err = std::abs(r.obs[0]);
      CHECK(err <= prev_err + 1e-9);  // monotone approach along x
      prev_err = err;
      succeeded = r.done && r.info.cause == TerminationCause::Success;
    }
    CHECK(succeeded);
    CHECK(env.last_record().cause == TerminationCause::Success);
    CHECK(env.last_record().cumulative_reward > 200.0);
  }
}

TEST_CASE("episode record tracks steps and cumulative reward") {
  EnvConfig cfg = free_space_config();
  cfg.episode.max_steps = 3;
  cfg.episode.success_pos_tol = 1e-9;  // force a timeout
  PegEnv env(cfg, 8);
  env.reset();
  double total = 0.0;
  for (int t = 0; t < 3; ++t) {
    const StepResult r = env.step(Eigen::VectorXd::Zero(env.act_dim()));
    total += r.reward;
    if (t < 2) CHECK(!r.done);
    else {
      CHECK(r.done);
      CHECK(r.info.cause == TerminationCause::Timeout);
    }
  }
  CHECK(env.last_record().steps == 3);
  CHECK(env.last_record().cumulative_reward == doctest::Approx(total));
}

TEST_CASE("unreachable start pose is rejected at construction") {
  EnvConfig cfg = free_space_config();
  cfg.episode.x0.p = Vector3d(5.0, 0.0, 0.0);
  CHECK_THROWS_AS(PegEnv(cfg, 1), std::invalid_argument);
}
