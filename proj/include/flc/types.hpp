#pragma once

#include <Eigen/Dense>

namespace flc {

using Vector3d = Eigen::Vector3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix3d = Eigen::Matrix3d;

// End-effector twist, split like the wrench for symmetry.
struct Twist {
  Vector3d linear{Vector3d::Zero()};    // m/s
  Vector3d angular{Vector3d::Zero()};   // rad/s

  Vector6d vec() const {
    Vector6d v;
    v << linear, angular;
    return v;
  }
  static Twist from_vec(const Vector6d& v) {
    return Twist{v.head<3>(), v.tail<3>()};
  }
};

struct Wrench {
  Vector3d force{Vector3d::Zero()};     // N
  Vector3d torque{Vector3d::Zero()};    // N·m

  Vector6d vec() const {
    Vector6d v;
    v << force, torque;
    return v;
  }
  static Wrench from_vec(const Vector6d& v) {
    return Wrench{v.head<3>(), v.tail<3>()};
  }
};

}  // namespace flc
