#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

#include "flc/math_core.hpp"
#include "flc/types.hpp"

namespace flc {

// diag(s_1..s_6), s_j in [0,1]; blends position vs force authority per axis.
struct SelectionMatrix {
  Vector6d s{Vector6d::Ones()};

  static SelectionMatrix from(const Vector6d& v) {
    SelectionMatrix m;
    for (int i = 0; i < 6; ++i) m.s[i] = clamp01(v[i]);
    return m;
  }
};

// [base - range, base + range] per component of one tunable parameter group.
struct GainSchedule {
  Vector6d base{Vector6d::Zero()};
  Vector6d range{Vector6d::Zero()};

  GainSchedule() = default;
  GainSchedule(const Vector6d& b, const Vector6d& r) : base(b), range(r) {
    if ((r.array() < 0.0).any())
      throw std::invalid_argument("GainSchedule: range must be >= 0");
  }
  static GainSchedule uniform(double b, double r) {
    return GainSchedule(Vector6d::Constant(b), Vector6d::Constant(r));
  }

  Vector6d apply(const Vector6d& a) const {
    Vector6d out;
    for (int i = 0; i < 6; ++i) out[i] = map_range(a[i], base[i], range[i]);
    return out;
  }
};

// PD-on-position / PI-on-force gain set. kd and ki are derived, never free:
// kd_x = 2 sqrt(kp_x), ki_f = 0.01 kp_f.
struct ParallelGains {
  Vector6d kp_x{Vector6d::Zero()};
  Vector6d kd_x{Vector6d::Zero()};
  Vector6d kp_f{Vector6d::Zero()};
  Vector6d ki_f{Vector6d::Zero()};
  SelectionMatrix s;
  Vector6d f_integral{Vector6d::Zero()};

  void set_kp_x(const Vector6d& kp) {
    kp_x = kp.cwiseMax(0.0);
    kd_x = 2.0 * kp_x.cwiseSqrt();
  }
  void set_kp_f(const Vector6d& kp) {
    kp_f = kp.cwiseMax(0.0);
    ki_f = 0.01 * kp_f;
  }
  void reset_state() { f_integral.setZero(); }
};

// Task-space admittance model m x'' + b x' + k x = F with derived damping
// b = 2 zeta sqrt(k m) and a PD on the nominal trajectory.
struct AdmittanceParams {
  Vector6d m{Vector6d::Constant(0.1)};  // fixed inertia
  Vector6d k{Vector6d::Zero()};
  Vector6d b{Vector6d::Zero()};
  double zeta{1.0};
  Vector6d kp_x{Vector6d::Zero()};
  Vector6d kd_x{Vector6d::Zero()};
  Vector6d state_x{Vector6d::Zero()};
  Vector6d state_v{Vector6d::Zero()};

  void set_stiffness(const Vector6d& k_new) {
    k = k_new.cwiseMax(0.0);
    b = 2.0 * zeta * (k.cwiseProduct(m)).cwiseSqrt();
  }
  void set_kp_x(const Vector6d& kp) {
    kp_x = kp.cwiseMax(0.0);
    kd_x = 2.0 * kp_x.cwiseSqrt();
  }
  void reset_state() {
    state_x.setZero();
    state_v.setZero();
  }
};

inline Vector6d natural_frequency(const AdmittanceParams& p) {
  if ((p.m.array() <= 0.0).any())
    throw std::invalid_argument("natural_frequency: inertia must be > 0");
  return (p.k.cwiseQuotient(p.m)).cwiseSqrt();
}

enum class Scheme { Parallel, Admittance };

// Table of policy models: pose always 6, gain groups scalar-broadcast (1) or
// per-axis (6); the selection-matrix group exists only for the parallel
// scheme.
struct ActionSpaceModel {
  Scheme scheme{Scheme::Parallel};
  std::string name;
  int pd{1};       // PD gain group width (1 or 6)
  int second{1};   // PI gain (parallel) or stiffness (admittance) width
  int sel{0};      // selection matrix width (parallel only)

  int dims() const { return 6 + pd + second + sel; }

  static ActionSpaceModel by_name(std::string_view name) {
    struct Row {
      const char* name;
      Scheme scheme;
      int pd, second, sel;
    };
    static constexpr std::array<Row, 8> table{{
        {"P-9", Scheme::Parallel, 1, 1, 1},
        {"P-14", Scheme::Parallel, 1, 1, 6},
        {"P-19", Scheme::Parallel, 6, 6, 1},
        {"P-24", Scheme::Parallel, 6, 6, 6},
        {"A-8", Scheme::Admittance, 1, 1, 0},
        {"A-13", Scheme::Admittance, 1, 6, 0},
        {"A-13pd", Scheme::Admittance, 6, 1, 0},
        {"A-18", Scheme::Admittance, 6, 6, 0},
    }};
    for (const auto& r : table)
      if (name == r.name)
        return ActionSpaceModel{r.scheme, std::string(r.name), r.pd, r.second,
                                r.sel};
    throw std::invalid_argument("unknown action-space model: " +
                                std::string(name));
  }

  static std::array<const char*, 8> all_names() {
    return {"P-9", "P-14", "P-19", "P-24", "A-8", "A-13", "A-13pd", "A-18"};
  }
};

// Action split into pose part and broadcast gain groups, all in [-1,1].
struct ExpandedAction {
  Vector6d pose{Vector6d::Zero()};
  Vector6d pd{Vector6d::Zero()};
  Vector6d second{Vector6d::Zero()};
  Vector6d sel{Vector6d::Zero()};
};

inline ExpandedAction expand_action(const ActionSpaceModel& model,
                                    const Eigen::VectorXd& a) {
  if (a.size() != model.dims())
    throw std::invalid_argument("expand_action: expected dimension " +
                                std::to_string(model.dims()) + ", got " +
                                std::to_string(a.size()));
  auto clamped = [](double v) { return std::clamp(v, -1.0, 1.0); };
  auto group = [&](int offset, int width) {
    Vector6d g;
    if (width == 1) {
      g.setConstant(clamped(a[offset]));
    } else {
      for (int i = 0; i < 6; ++i) g[i] = clamped(a[offset + i]);
    }
    return g;
  };
  ExpandedAction out;
  out.pose = group(0, 6);
  int off = 6;
  out.pd = group(off, model.pd);
  off += model.pd;
  out.second = group(off, model.second);
  off += model.second;
  if (model.sel > 0) out.sel = group(off, model.sel);
  return out;
}

struct ParallelSchedules {
  GainSchedule kp_x;
  GainSchedule kp_f;
};

struct AdmittanceSchedules {
  GainSchedule kp_x;
  GainSchedule stiffness;
};

// Map gain actions through the schedules; derived gains recomputed so the
// type invariants survive every update. Selection entries map to [0,1].
inline void apply_gain_actions(const ParallelSchedules& sched,
                               const ExpandedAction& a, ParallelGains& g) {
  g.set_kp_x(sched.kp_x.apply(a.pd));
  g.set_kp_f(sched.kp_f.apply(a.second));
  Vector6d s01;
  for (int i = 0; i < 6; ++i) s01[i] = 0.5 * (std::clamp(a.sel[i], -1.0, 1.0) + 1.0);
  g.s = SelectionMatrix::from(s01);
}

inline void apply_gain_actions(const AdmittanceSchedules& sched,
                               const ExpandedAction& a, AdmittanceParams& p) {
  p.set_kp_x(sched.kp_x.apply(a.pd));
  p.set_stiffness(sched.stiffness.apply(a.second));
}

// One inner-loop step of the parallel position/force law. Returns the
// task-space position-command increment for this substep; a_x is the pose
// action already scaled to a per-substep displacement.
inline Vector6d parallel_step(ParallelGains& g, const Vector6d& x_e,
                              const Vector6d& xdot_e, const Vector6d& a_x,
                              const Vector6d& f_ext, double dt,
                              double integral_clamp = 10.0) {
  g.f_integral += f_ext * dt;
  g.f_integral =
      g.f_integral.cwiseMax(-integral_clamp).cwiseMin(integral_clamp);
  const Vector6d pos_branch =
      g.kp_x.cwiseProduct(x_e) + g.kd_x.cwiseProduct(xdot_e);
  const Vector6d force_branch =
      g.kp_f.cwiseProduct(f_ext) + g.ki_f.cwiseProduct(g.f_integral);
  const Vector6d blended = g.s.s.cwiseProduct(pos_branch) +
                           (Vector6d::Ones() - g.s.s).cwiseProduct(force_branch);
  return dt * blended + a_x;
}

struct AdmittanceStepResult {
  Vector6d u{Vector6d::Zero()};
  bool saturated{false};
};

// One inner-loop step of the admittance law. The mass-damper-spring state is
// integrated by semi-implicit Euler on a finer internal grid (8 sub-cycles)
// so the discrete response tracks the continuous second-order system well
// even near the upper end of the usable stiffness range; the command
// increment combines the PD drive toward the goal, the pose action, and the
// change of the compliant offset.
inline AdmittanceStepResult admittance_step(AdmittanceParams& p,
                                            const Vector6d& x_e,
                                            const Vector6d& xdot_e,
                                            const Vector6d& a_x,
                                            const Vector6d& f_ext, double dt,
                                            double velocity_clamp = 10.0) {
  AdmittanceStepResult out;
  const Vector6d x_prev = p.state_x;
  constexpr int kSubCycles = 8;
  const double h = dt / kSubCycles;
  for (int s = 0; s < kSubCycles; ++s) {
    const Vector6d accel =
        (f_ext - p.b.cwiseProduct(p.state_v) - p.k.cwiseProduct(p.state_x))
            .cwiseQuotient(p.m);
    p.state_v += h * accel;
    for (int i = 0; i < 6; ++i) {
      if (std::abs(p.state_v[i]) > velocity_clamp) {
        p.state_v[i] = std::copysign(velocity_clamp, p.state_v[i]);
        out.saturated = true;
      }
    }
    p.state_x += h * p.state_v;
  }
  const Vector6d pd =
      p.kp_x.cwiseProduct(x_e) + p.kd_x.cwiseProduct(xdot_e);
  out.u = dt * pd + a_x + (p.state_x - x_prev);
  return out;
}

// Single controller front-end used by the environment.
class ForceController {
 public:
  ForceController(const ActionSpaceModel& model, ParallelSchedules sched,
                  double integral_clamp = 10.0)
      : model_(model), parallel_sched_(std::move(sched)),
        integral_clamp_(integral_clamp) {
    if (model.scheme != Scheme::Parallel)
      throw std::invalid_argument("model/scheme mismatch");
  }
  ForceController(const ActionSpaceModel& model, AdmittanceSchedules sched,
                  double zeta = 1.0, double inertia = 0.1,
                  double velocity_clamp = 10.0)
      : model_(model), admittance_sched_(std::move(sched)),
        velocity_clamp_(velocity_clamp) {
    if (model.scheme != Scheme::Admittance)
      throw std::invalid_argument("model/scheme mismatch");
    admittance_.zeta = zeta;
    admittance_.m.setConstant(inertia);
  }

  const ActionSpaceModel& model() const { return model_; }
  Scheme scheme() const { return model_.scheme; }

  void apply_actions(const ExpandedAction& a) {
    if (scheme() == Scheme::Parallel)
      apply_gain_actions(parallel_sched_, a, parallel_);
    else
      apply_gain_actions(admittance_sched_, a, admittance_);
  }

  Vector6d step(const Vector6d& x_e, const Vector6d& xdot_e,
                const Vector6d& a_x, const Vector6d& f_ext, double dt) {
    if (scheme() == Scheme::Parallel)
      return parallel_step(parallel_, x_e, xdot_e, a_x, f_ext, dt,
                           integral_clamp_);
    auto r = admittance_step(admittance_, x_e, xdot_e, a_x, f_ext, dt,
                             velocity_clamp_);
    saturated_ = saturated_ || r.saturated;
    return r.u;
  }

  void reset_state() {
    parallel_.reset_state();
    admittance_.reset_state();
    saturated_ = false;
  }

  bool saturated() const { return saturated_; }
  const ParallelGains& parallel() const { return parallel_; }
  const AdmittanceParams& admittance() const { return admittance_; }

 private:
  ActionSpaceModel model_;
  ParallelSchedules parallel_sched_;
  AdmittanceSchedules admittance_sched_;
  ParallelGains parallel_;
  AdmittanceParams admittance_;
  double integral_clamp_{10.0};
  double velocity_clamp_{10.0};
  bool saturated_{false};
};

}  // namespace flc
