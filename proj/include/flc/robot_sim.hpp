#pragma once

#include <cmath>
#include <memory>
#include <optional>

#include "flc/math_core.hpp"
#include "flc/rng.hpp"
#include "flc/types.hpp"

namespace flc {

// Kinematic robot with a mutable joint configuration. IK failure is a normal
// signal (consumed by the safety gate), not an error.
class RobotModel {
 public:
  virtual ~RobotModel() = default;
  virtual int dof() const = 0;
  virtual Pose fk(const Eigen::VectorXd& q) const = 0;
  virtual std::optional<Eigen::VectorXd> ik(const Pose& x,
                                            const Eigen::VectorXd& q_near) const = 0;

  const Eigen::VectorXd& q() const { return q_; }
  void set_q(const Eigen::VectorXd& q) { q_ = q; }
  Pose pose() const { return fk(q_); }

 protected:
  Eigen::VectorXd q_;
};

// Configuration equals the task-space pose: q = [p, rotation vector].
// IK succeeds anywhere inside the workspace box.
class FreeFlyer : public RobotModel {
 public:
  FreeFlyer(const Vector3d& box_min, const Vector3d& box_max,
            double max_rotation = std::numbers::pi)
      : box_min_(box_min), box_max_(box_max), max_rotation_(max_rotation) {
    q_ = Eigen::VectorXd::Zero(6);
  }

  int dof() const override { return 6; }

  Pose fk(const Eigen::VectorXd& q) const override {
    Pose x;
    x.p = q.head<3>();
    x.phi = Quaternion::from_rotation_vector(q.tail<3>());
    return x;
  }

  std::optional<Eigen::VectorXd> ik(const Pose& x,
                                    const Eigen::VectorXd&) const override {
    if ((x.p.array() < box_min_.array()).any() ||
        (x.p.array() > box_max_.array()).any())
      return std::nullopt;
    const Vector3d r = x.phi.rotation_vector();
    if (r.norm() > max_rotation_) return std::nullopt;
    Eigen::VectorXd q(6);
    q << x.p, r;
    return q;
  }

 private:
  Vector3d box_min_, box_max_;
  double max_rotation_;
};

// Planar 3R arm in the xy plane; orientation is yaw about z. Closed-form IK
// with elbow-branch selection nearest the current configuration.
class Planar3R : public RobotModel {
 public:
  Planar3R(double l1, double l2, double l3) : l1_(l1), l2_(l2), l3_(l3) {
    q_ = Eigen::VectorXd::Zero(3);
  }

  int dof() const override { return 3; }

  Pose fk(const Eigen::VectorXd& q) const override {
    const double a1 = q[0], a2 = q[0] + q[1], a3 = q[0] + q[1] + q[2];
    Pose x;
    x.p = Vector3d(l1_ * std::cos(a1) + l2_ * std::cos(a2) + l3_ * std::cos(a3),
                   l1_ * std::sin(a1) + l2_ * std::sin(a2) + l3_ * std::sin(a3),
                   0.0);
    x.phi = Quaternion::from_axis_angle(Vector3d::UnitZ(), a3);
    return x;
  }

  std::optional<Eigen::VectorXd> ik(const Pose& x,
                                    const Eigen::VectorXd& q_near) const override {
    const double yaw = x.phi.rotation_vector().z();
    const double wx = x.p.x() - l3_ * std::cos(yaw);
    const double wy = x.p.y() - l3_ * std::sin(yaw);
    const double d2 = wx * wx + wy * wy;
    const double c2 = (d2 - l1_ * l1_ - l2_ * l2_) / (2.0 * l1_ * l2_);
    if (c2 < -1.0 || c2 > 1.0) return std::nullopt;
    const double s2 = std::sqrt(std::max(0.0, 1.0 - c2 * c2));

    auto branch = [&](double sign) {
      Eigen::VectorXd q(3);
      const double q2 = std::atan2(sign * s2, c2);
      const double q1 = std::atan2(wy, wx) -
                        std::atan2(l2_ * std::sin(q2), l1_ + l2_ * std::cos(q2));
      q << wrap(q1), wrap(q2), 0.0;
      q[2] = wrap(yaw - q[0] - q[1]);
      return q;
    };
    const Eigen::VectorXd up = branch(1.0), down = branch(-1.0);
    auto dist = [&](const Eigen::VectorXd& q) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) s += std::abs(wrap(q[i] - q_near[i]));
      return s;
    };
    return dist(up) <= dist(down) ? up : down;
  }

 private:
  static double wrap(double a) {
    while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
    while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
  }
  double l1_, l2_, l3_;
};

// Square peg over a square hole in a flat board. Kelvin-Voigt penalty
// contacts: board top vs peg bottom corners, hole bottom vs corners, hole
// walls vs the peg cross-section while inside the hole. Friction is Coulomb
// with viscous regularization near zero slip velocity.
struct ContactWorld {
  double surface_z{0.0};
  Vector3d hole_center{Vector3d::Zero()};  // on the surface plane
  double peg_half_width{0.010};
  double clearance{0.001};   // hole width minus peg width
  double hole_depth{0.020};
  double k_c{1e4};           // contact stiffness N/m
  double c_c{50.0};          // contact damping N·s/m
  double mu{0.3};
  double v_eps{1e-3};        // friction regularization velocity

  double hole_half_width() const { return peg_half_width + 0.5 * clearance; }
};

// Pose.p is the center of the peg bottom face; torque is taken about it.
inline Wrench contact_wrench(const ContactWorld& w, const Pose& peg,
                             const Twist& twist) {
  Wrench total;
  const Matrix3d rot = peg.phi.rotation_matrix();
  const double hw = w.hole_half_width();
  const Vector3d hc = w.hole_center;

  auto point_velocity = [&](const Vector3d& point) {
    return Vector3d(twist.linear + twist.angular.cross(point - peg.p));
  };
  auto add_contact = [&](const Vector3d& point, const Vector3d& normal,
                         double penetration) {
    const Vector3d v = point_velocity(point);
    const double approach = -v.dot(normal);
    const double fn = std::max(0.0, w.k_c * penetration + w.c_c * approach);
    if (fn <= 0.0) return;
    Vector3d f = fn * normal;
    // regularized Coulomb friction on the tangential velocity
    const Vector3d v_t = v - v.dot(normal) * normal;
    for (int i = 0; i < 3; ++i)
      f[i] -= w.mu * fn * std::tanh(v_t[i] / w.v_eps) *
              (1.0 - std::abs(normal[i]));
    total.force += f;
    total.torque += (point - peg.p).cross(f);
  };

  // bottom corners vs board top / hole bottom
  for (const double sx : {-1.0, 1.0}) {
    for (const double sy : {-1.0, 1.0}) {
      const Vector3d local(sx * w.peg_half_width, sy * w.peg_half_width, 0.0);
      const Vector3d c = peg.p + rot * local;
      const bool over_hole = std::abs(c.x() - hc.x()) < hw &&
                             std::abs(c.y() - hc.y()) < hw;
      const double floor_z = over_hole ? w.surface_z - w.hole_depth : w.surface_z;
      const double pen = floor_z - c.z();
      if (pen <= 0.0) continue;
      if (!over_hole) {
        // Minimum-translation disambiguation at the hole rim: if the corner
        // could exit the board material laterally (into the hole) with less
        // travel than vertically, the wall contact below is the physical one.
        const double dx = std::max(0.0, std::abs(c.x() - hc.x()) - hw);
        const double dy = std::max(0.0, std::abs(c.y() - hc.y()) - hw);
        if (std::hypot(dx, dy) < pen) continue;
      }
      add_contact(c, Vector3d::UnitZ(), pen);
    }
  }

  // hole walls vs peg side faces, active while the peg is inside the hole
  const double lowest = peg.p.z() +
      std::min({(rot * Vector3d(-w.peg_half_width, -w.peg_half_width, 0)).z(),
                (rot * Vector3d(-w.peg_half_width, w.peg_half_width, 0)).z(),
                (rot * Vector3d(w.peg_half_width, -w.peg_half_width, 0)).z(),
                (rot * Vector3d(w.peg_half_width, w.peg_half_width, 0)).z()});
  const bool center_over_hole = std::abs(peg.p.x() - hc.x()) < hw &&
                                std::abs(peg.p.y() - hc.y()) < hw;
  if (lowest < w.surface_z && center_over_hole) {
    // projected half-extents of the square cross-section
    const double ex = w.peg_half_width * (std::abs(rot(0, 0)) + std::abs(rot(0, 1)));
    const double ey = w.peg_half_width * (std::abs(rot(1, 0)) + std::abs(rot(1, 1)));
    const double depth_in = std::min(w.surface_z - lowest, w.hole_depth);
    const double z_mid = w.surface_z - 0.5 * depth_in;
    struct Side {
      int axis;
      double dir;  // outward direction of the peg face
    };
    for (const Side side : {Side{0, 1.0}, Side{0, -1.0}, Side{1, 1.0}, Side{1, -1.0}}) {
      const double extent = side.axis == 0 ? ex : ey;
      const double face = peg.p[side.axis] + side.dir * extent;
      const double wall = hc[side.axis] + side.dir * hw;
      const double pen = side.dir * (face - wall);
      if (pen > 0.0) {
        Vector3d point = peg.p;
        point[side.axis] = wall;
        point.z() = z_mid;
        Vector3d normal = Vector3d::Zero();
        normal[side.axis] = -side.dir;  // wall pushes toward the hole center
        add_contact(point, normal, pen);
      }
    }
  }
  return total;
}

// Simulated F/T sensor: zero-mean Gaussian noise per axis, then the shared
// first-order low-pass. Deterministic given its seed.
class FTSensor {
 public:
  FTSensor(double force_noise_std, double torque_noise_std, double alpha,
           std::uint64_t seed)
      : force_std_(force_noise_std), torque_std_(torque_noise_std),
        filter_(alpha), rng_(seed) {}

  Wrench sense(const Wrench& truth) {
    Vector6d sample = truth.vec();
    if (force_std_ > 0.0)
      for (int i = 0; i < 3; ++i) sample[i] += rng_.normal(0.0, force_std_);
    if (torque_std_ > 0.0)
      for (int i = 3; i < 6; ++i) sample[i] += rng_.normal(0.0, torque_std_);
    return Wrench::from_vec(filter_.step(sample));
  }

  void reset() { filter_.reset(); }
  const LowPassFilter& filter() const { return filter_; }

 private:
  double force_std_, torque_std_;
  LowPassFilter filter_;
  Rng rng_;
};

struct WorldStepResult {
  Pose pose;
  Twist twist;
  Wrench wrench;  // true contact wrench, unfiltered
};

// Advance the robot toward q_c under a first-order actuator lag (exact
// discretization; time constant 0 tracks exactly), then evaluate contact.
inline WorldStepResult world_step(RobotModel& robot, const ContactWorld& world,
                                  const Eigen::VectorXd& q_c, double dt,
                                  double actuator_tau) {
  const Pose before = robot.pose();
  const double gain =
      actuator_tau <= 0.0 ? 1.0 : 1.0 - std::exp(-dt / actuator_tau);
  robot.set_q(robot.q() + gain * (q_c - robot.q()));

  WorldStepResult out;
  out.pose = robot.pose();
  out.twist.linear = (out.pose.p - before.p) / dt;
  out.twist.angular = orientation_error(out.pose.phi, before.phi) / dt;
  out.wrench = contact_wrench(world, out.pose, out.twist);
  return out;
}

}  // namespace flc
