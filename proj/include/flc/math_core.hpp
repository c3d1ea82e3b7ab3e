#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "flc/types.hpp"

namespace flc {

// Unit quaternion, scalar part first: q = {eta, eps}.
struct Quaternion {
  double eta{1.0};
  Vector3d eps{Vector3d::Zero()};

  static Quaternion identity() { return {}; }

  static Quaternion from_axis_angle(const Vector3d& axis, double angle) {
    const double n = axis.norm();
    if (n < 1e-12) return identity();
    return Quaternion{std::cos(0.5 * angle),
                      axis * (std::sin(0.5 * angle) / n)};
  }

  // Exponential of a rotation vector (angle * unit axis).
  static Quaternion from_rotation_vector(const Vector3d& r) {
    return from_axis_angle(r, r.norm());
  }

  double norm() const { return std::sqrt(eta * eta + eps.squaredNorm()); }

  Quaternion normalized() const {
    const double n = norm();
    if (n < 1e-12)
      throw std::invalid_argument("Quaternion::normalized: zero quaternion");
    return Quaternion{eta / n, eps / n};
  }

  // q and -q are the same rotation; pick the representative with eta >= 0.
  Quaternion canonical() const {
    if (eta < 0.0) return Quaternion{-eta, -eps};
    return *this;
  }

  Quaternion conjugate() const { return Quaternion{eta, -eps}; }

  Quaternion operator*(const Quaternion& o) const {
    return Quaternion{eta * o.eta - eps.dot(o.eps),
                      eta * o.eps + o.eta * eps + eps.cross(o.eps)};
  }

  Vector3d rotate(const Vector3d& v) const {
    // q v q* expanded
    const Vector3d t = 2.0 * eps.cross(v);
    return v + eta * t + eps.cross(t);
  }

  Matrix3d rotation_matrix() const {
    Matrix3d r;
    const double w = eta, x = eps.x(), y = eps.y(), z = eps.z();
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
  }

  // Rotation vector (angle * axis), angle in [0, pi].
  Vector3d rotation_vector() const {
    const Quaternion q = canonical();
    const double s = q.eps.norm();
    if (s < 1e-12) return 2.0 * q.eps;
    const double angle = 2.0 * std::atan2(s, q.eta);
    return q.eps * (angle / s);
  }

  bool is_unit(double tol = 1e-6) const {
    return std::abs(norm() - 1.0) <= tol;
  }
};

namespace detail {
inline void require_unit(const Quaternion& q, const char* who) {
  if (!q.is_unit())
    throw std::invalid_argument(std::string(who) + ": non-unit quaternion");
}
}  // namespace detail

// Orientation error between goal and current rotation, as a rotation vector
// (rad-scaled axis). Direction follows the unit-quaternion controller error
//   e ~ eta_c*eps_g - eta_g*eps_c - eps_g x eps_c
// which is the vector part of q_g q_c^*; the magnitude is rescaled from
// sin(theta/2) to the relative angle theta so it agrees with the
// rotation-matrix log map.
inline Vector3d orientation_error(const Quaternion& goal,
                                  const Quaternion& current) {
  detail::require_unit(goal, "orientation_error(goal)");
  detail::require_unit(current, "orientation_error(current)");
  return (goal * current.conjugate()).rotation_vector();
}

struct Pose {
  Vector3d p{Vector3d::Zero()};
  Quaternion phi{Quaternion::identity()};

  static Pose identity() { return {}; }
};

// x_e = x_g - x, with the orientation part as a rotation vector.
inline Vector6d pose_error(const Pose& goal, const Pose& current) {
  Vector6d e;
  e.head<3>() = goal.p - current.p;
  e.tail<3>() = orientation_error(goal.phi, current.phi);
  return e;
}

// Apply a 6-dof increment (translation + rotation vector) to a pose.
inline Pose pose_increment(const Pose& x, const Vector6d& u) {
  Pose out;
  out.p = x.p + u.head<3>();
  out.phi = (Quaternion::from_rotation_vector(u.tail<3>()) * x.phi)
                .normalized()
                .canonical();
  return out;
}

// First-order exponential filter with unit DC gain.
class LowPassFilter {
 public:
  explicit LowPassFilter(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw std::invalid_argument("LowPassFilter: alpha must be in (0,1]");
  }

  // alpha for cutoff f_c at sample period T.
  static double alpha_from_cutoff(double f_c, double period) {
    const double w = 2.0 * std::numbers::pi * f_c * period;
    return w / (1.0 + w);
  }

  const Vector6d& step(const Vector6d& sample) {
    state_ = (1.0 - alpha_) * state_ + alpha_ * sample;
    return state_;
  }

  void reset() { state_.setZero(); }
  const Vector6d& state() const { return state_; }
  double alpha() const { return alpha_; }

 private:
  double alpha_;
  Vector6d state_{Vector6d::Zero()};
};

// Affine map from [-1,1] to [base-range, base+range]; input is clamped.
inline double map_range(double a, double base, double range) {
  a = std::clamp(a, -1.0, 1.0);
  return base + a * range;
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace flc
