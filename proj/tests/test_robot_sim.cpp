#include <doctest.h>

#include <cmath>

#include "flc/robot_sim.hpp"

using namespace flc;

namespace {

Eigen::VectorXd joints(double a, double b, double c) {
  Eigen::VectorXd q(3);
  q << a, b, c;
  return q;
}

// Brute-force normal/friction oracle for a single penalty contact.
Wrench single_contact_oracle(const ContactWorld& w, const Vector3d& point,
                             const Vector3d& normal, double pen,
                             const Vector3d& v, const Vector3d& about) {
  Wrench out;
  const double approach = -v.dot(normal);
  const double fn = std::max(0.0, w.k_c * pen + w.c_c * approach);
  if (fn <= 0.0) return out;
  Vector3d f = fn * normal;
  const Vector3d v_t = v - v.dot(normal) * normal;
  for (int i = 0; i < 3; ++i)
    f[i] -= w.mu * fn * std::tanh(v_t[i] / w.v_eps) * (1.0 - std::abs(normal[i]));
  out.force = f;
  out.torque = (point - about).cross(f);
  return out;
}

}  // namespace

TEST_CASE("planar 3R forward kinematics on hand examples") {
  Planar3R arm(0.3, 0.25, 0.15);
  SUBCASE("stretched along x") {
    const Pose x = arm.fk(joints(0, 0, 0));
    CHECK(x.p.x() == doctest::Approx(0.7));
    CHECK(std::abs(x.p.y()) < 1e-15);
    CHECK(x.phi.rotation_vector().norm() < 1e-12);
  }
  SUBCASE("base joint at 90 deg points along y") {
    const Pose x = arm.fk(joints(std::numbers::pi / 2.0, 0, 0));
    CHECK(std::abs(x.p.x()) < 1e-12);
    CHECK(x.p.y() == doctest::Approx(0.7));
    CHECK(x.phi.rotation_vector().z() == doctest::Approx(std::numbers::pi / 2.0));
  }
  SUBCASE("elbow fold") {
    const Pose x = arm.fk(joints(0, std::numbers::pi / 2.0, 0));
    CHECK(x.p.x() == doctest::Approx(0.3));
    CHECK(x.p.y() == doctest::Approx(0.4));
  }
}

TEST_CASE("planar 3R IK reports no solution beyond reach") {
  Planar3R arm(0.3, 0.25, 0.15);
  Pose target;
  target.p = Vector3d(1.0, 0.0, 0.0);  // wrist at 0.85 > l1+l2
  CHECK(!arm.ik(target, joints(0, 0, 0)).has_value());
  target.p = Vector3d(0.69, 0.0, 0.0);  // inside reach
  CHECK(arm.ik(target, joints(0, 0.1, -0.1)).has_value());
}

TEST_CASE("planar 3R fk/ik round-trip over random reachable targets") {
  Planar3R arm(0.3, 0.25, 0.15);
  Rng rng(21);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd q =
        joints(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5),
               rng.uniform(-2.5, 2.5));
    const Pose target = arm.fk(q);
    const Eigen::VectorXd near =
        q + joints(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                   rng.uniform(-0.2, 0.2));
    const auto sol = arm.ik(target, near);
    REQUIRE(sol.has_value());
    const Pose reached = arm.fk(*sol);
    CHECK((reached.p - target.p).norm() < 1e-6);
    CHECK(orientation_error(reached.phi, target.phi).norm() < 1e-6);
  }
}

TEST_CASE("free flyer fk/ik round-trip and workspace box") {
  const Vector3d lo(-0.2, -0.2, -0.1), hi(0.2, 0.2, 0.3);
  FreeFlyer robot(lo, hi);
  Rng rng(22);
  for (int i = 0; i < 10000; ++i) {
    Pose target;
    target.p = Vector3d(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()),
                        rng.uniform(lo.z(), hi.z()));
    Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    if (axis.norm() < 1e-9) axis = Vector3d::UnitX();
    target.phi = Quaternion::from_axis_angle(axis, rng.uniform(-3.0, 3.0));
    const auto q = robot.ik(target, Eigen::VectorXd::Zero(6));
    REQUIRE(q.has_value());
    const Pose reached = robot.fk(*q);
    CHECK((reached.p - target.p).norm() < 1e-9);
    CHECK(orientation_error(reached.phi, target.phi).norm() < 1e-6);
  }
  Pose outside;
  outside.p = Vector3d(0.25, 0.0, 0.0);
  CHECK(!robot.ik(outside, Eigen::VectorXd::Zero(6)).has_value());
}

TEST_CASE("contact wrench is zero with the peg clear of the board") {
  ContactWorld w;
  Pose peg;
  peg.p = Vector3d(0.05, 0.0, 0.001);  // 1 mm above, away from the hole
  CHECK(contact_wrench(w, peg, Twist{}).vec().norm() == 0.0);
}

TEST_CASE("flat-board penetration matches the penalty oracle") {
  ContactWorld w;
  Pose peg;
  peg.p = Vector3d(0.1, 0.0, -0.001);  // 1 mm into the board, off the hole
  SUBCASE("static: four corners, 10 N each, no lateral force") {
    const Wrench f = contact_wrench(w, peg, Twist{});
    CHECK(f.force.z() == doctest::Approx(4.0 * w.k_c * 0.001));
    CHECK(std::abs(f.force.x()) < 1e-12);
    CHECK(std::abs(f.force.y()) < 1e-12);
    CHECK(f.torque.norm() < 1e-12);
  }
  SUBCASE("approach velocity adds Kelvin-Voigt damping") {
    Twist t;
    t.linear = Vector3d(0, 0, -0.1);
    const Wrench f = contact_wrench(w, peg, t);
    CHECK(f.force.z() == doctest::Approx(4.0 * (w.k_c * 0.001 + w.c_c * 0.1)));
  }
  SUBCASE("fast separation cancels the normal force entirely") {
    Twist t;
    t.linear = Vector3d(0, 0, 1.0);  // c_c*1 >> k_c*pen
    CHECK(contact_wrench(w, peg, t).vec().norm() == 0.0);
  }
  SUBCASE("sliding produces Coulomb friction opposing motion") {
    Twist t;
    t.linear = Vector3d(1.0, 0, 0);
    const Wrench f = contact_wrench(w, peg, t);
    const double fn = 4.0 * w.k_c * 0.001;
    CHECK(f.force.x() == doctest::Approx(-w.mu * fn).epsilon(1e-6));
    CHECK(f.force.x() < 0.0);
  }
}

TEST_CASE("peg centered in the hole feels no wrench") {
  ContactWorld w;
  Pose peg;
  peg.p = Vector3d(0, 0, -0.005);  // inside the hole, above its bottom
  CHECK(contact_wrench(w, peg, Twist{}).vec().norm() == 0.0);
}

TEST_CASE("hole wall contact matches the single-face oracle") {
  ContactWorld w;
  const double hw = w.hole_half_width();
  Pose peg;
  const double offset = 0.001;  // push the +x face 0.5 mm into the wall
  peg.p = Vector3d(offset, 0.0, -0.005);
  const double pen = (offset + w.peg_half_width) - hw;
  REQUIRE(pen > 0.0);

  const Wrench f = contact_wrench(w, peg, Twist{});
  Vector3d point = peg.p;
  point.x() = hw;
  point.z() = w.surface_z - 0.5 * 0.005;
  const Wrench oracle = single_contact_oracle(w, point, -Vector3d::UnitX(), pen,
                                              Vector3d::Zero(), peg.p);
  CHECK((f.force - oracle.force).norm() < 1e-9);
  CHECK((f.torque - oracle.torque).norm() < 1e-9);
  CHECK(f.force.x() == doctest::Approx(-w.k_c * pen));
}

TEST_CASE("contact is unilateral: clear configurations never produce force") {
  ContactWorld w;
  Rng rng(31);
  for (int i = 0; i < 2000; ++i) {
    Pose peg;
    peg.p = Vector3d(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                     rng.uniform(0.0, 0.05));
    Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    if (axis.norm() < 1e-9) axis = Vector3d::UnitZ();
    peg.phi = Quaternion::from_axis_angle(axis, rng.uniform(-0.5, 0.5));

    const Matrix3d rot = peg.phi.rotation_matrix();
    double lowest = 1e9;
    for (const double sx : {-1.0, 1.0})
      for (const double sy : {-1.0, 1.0})
        lowest = std::min(
            lowest,
            (peg.p + rot * Vector3d(sx * w.peg_half_width, sy * w.peg_half_width,
                                    0.0))
                .z());
    if (lowest <= w.surface_z) continue;

    Twist t;
    t.linear = Vector3d(rng.normal(), rng.normal(), rng.normal());
    t.angular = Vector3d(rng.normal(), rng.normal(), rng.normal());
    CHECK(contact_wrench(w, peg, t).vec().norm() == 0.0);
  }
}

TEST_CASE("ft sensor") {
  SUBCASE("no noise and unit alpha is a passthrough") {
    FTSensor s(0.0, 0.0, 1.0, 99);
    Wrench truth;
    truth.force = Vector3d(1.0, -2.0, 3.0);
    truth.torque = Vector3d(0.1, 0.0, -0.2);
    CHECK((s.sense(truth).vec() - truth.vec()).norm() == 0.0);
  }
  SUBCASE("same seed gives identical readings") {
    FTSensor a(0.05, 0.005, 0.3, 1234), b(0.05, 0.005, 0.3, 1234);
    Wrench truth;
    truth.force = Vector3d(0.0, 1.0, 5.0);
    for (int i = 0; i < 200; ++i)
      CHECK((a.sense(truth).vec() - b.sense(truth).vec()).norm() == 0.0);
  }
  SUBCASE("unit DC gain: long-run mean tracks a constant input") {
    FTSensor s(0.01, 0.001, 0.1, 7);
    Wrench truth;
    truth.force = Vector3d(2.0, 0.0, -1.0);
    Vector6d sum = Vector6d::Zero();
    const int n = 20000;
    for (int i = 0; i < n; ++i) sum += s.sense(truth).vec();
    CHECK(((sum / n) - truth.vec()).norm() < 0.01);
  }
}

TEST_CASE("world step tracks exactly with zero actuator lag") {
  FreeFlyer robot(Vector3d::Constant(-1.0), Vector3d::Constant(1.0));
  ContactWorld w;
  w.surface_z = -10.0;  // contact out of the way
  Eigen::VectorXd q_c(6);
  q_c << 0.01, -0.02, 0.03, 0.0, 0.0, 0.1;
  const auto r = world_step(robot, w, q_c, 0.002, 0.0);
  CHECK((robot.q() - q_c).norm() == 0.0);
  CHECK((r.pose.p - Vector3d(0.01, -0.02, 0.03)).norm() < 1e-15);
  CHECK(r.twist.linear.x() == doctest::Approx(0.01 / 0.002));
  CHECK(r.wrench.vec().norm() == 0.0);
}

TEST_CASE("actuator lag follows the first-order ODE exactly") {
  FreeFlyer robot(Vector3d::Constant(-1.0), Vector3d::Constant(1.0));
  ContactWorld w;
  w.surface_z = -10.0;
  const double dt = 0.002, tau = 0.01;
  Eigen::VectorXd q_c = Eigen::VectorXd::Zero(6);
  q_c[0] = 0.1;
  for (int n = 1; n <= 50; ++n) {
    world_step(robot, w, q_c, dt, tau);
    const double expected = 0.1 * (1.0 - std::exp(-n * dt / tau));
    CHECK(robot.q()[0] == doctest::Approx(expected).epsilon(1e-12));
  }
}
