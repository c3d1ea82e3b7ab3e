#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "flc/sac.hpp"
#include "flc/task_env.hpp"

namespace flc {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fully resolved run description. Everything a run needs is in here plus the
// seed; the resolved form is persisted next to the run outputs.
struct RunConfig {
  int schema_version{1};
  std::string profile{"sim"};  // "sim" or "real-task"
  std::uint64_t seed{0};
  long total_steps{30000};
  std::string model{"P-14"};
  bool penalize_collision{true};

  EnvConfig env;
  SacAgent::Config sac;
  long warmup_steps{1000};
  int update_every{1};
  // optional early stop once the success rate over the trailing window holds
  double early_stop_success_rate{0.0};  // 0 disables
  int early_stop_window{20};
};

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.contains(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

inline Vector6d vec6(const json& j, const std::string& where) {
  if (j.is_number()) return Vector6d::Constant(j.get<double>());
  if (j.is_array() && j.size() == 6) {
    Vector6d v;
    for (int i = 0; i < 6; ++i) v[i] = j[i].get<double>();
    return v;
  }
  throw ConfigError(where + ": expected a number or an array of 6 numbers");
}

inline Vector3d vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(where + ": expected an array of 3 numbers");
  return Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

template <typename T>
void opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void opt6(const json& j, const char* key, Vector6d& out,
                 const std::string& where) {
  if (j.contains(key)) out = vec6(j.at(key), where + "." + key);
}

}  // namespace detail

inline RunConfig parse_run_config(const json& j) {
  using namespace detail;
  RunConfig c;
  check_keys(j, {"schema_version", "profile", "seed", "total_steps", "model",
                 "penalize_collision", "robot", "world", "sensor", "safety",
                 "controller", "episode", "reward", "sac", "training"},
             "config root");
  opt(j, "schema_version", c.schema_version);
  if (c.schema_version != 1)
    throw ConfigError("unsupported schema_version " +
                      std::to_string(c.schema_version));
  opt(j, "profile", c.profile);
  if (c.profile != "sim" && c.profile != "real-task")
    throw ConfigError("profile must be 'sim' or 'real-task'");
  opt(j, "seed", c.seed);
  opt(j, "total_steps", c.total_steps);
  opt(j, "model", c.model);
  ActionSpaceModel::by_name(c.model);  // validates the name
  opt(j, "penalize_collision", c.penalize_collision);

  // profile defaults before overrides
  c.env.episode.max_steps = c.profile == "sim" ? 150 : 200;
  c.env.model_name = c.model;
  c.env.reward.penalize_collision = c.penalize_collision;

  if (j.contains("robot")) {
    const json& r = j.at("robot");
    check_keys(r, {"kind", "workspace_min", "workspace_max", "max_rotation",
                   "planar_links"},
               "robot");
    std::string kind = "freeflyer";
    opt(r, "kind", kind);
    if (kind == "freeflyer")
      c.env.robot = RobotKind::FreeFlyer;
    else if (kind == "planar3r")
      c.env.robot = RobotKind::Planar3R;
    else
      throw ConfigError("robot.kind must be 'freeflyer' or 'planar3r'");
    if (r.contains("workspace_min"))
      c.env.workspace_min = vec3(r.at("workspace_min"), "robot.workspace_min");
    if (r.contains("workspace_max"))
      c.env.workspace_max = vec3(r.at("workspace_max"), "robot.workspace_max");
    opt(r, "max_rotation", c.env.max_rotation);
    if (r.contains("planar_links"))
      c.env.planar_links = vec3(r.at("planar_links"), "robot.planar_links");
  }
  if (c.env.robot == RobotKind::Planar3R) {
    c.env.axis_mask = Vector6d::Zero();
    c.env.axis_mask[0] = c.env.axis_mask[1] = c.env.axis_mask[5] = 1.0;
    c.env.limits.qdot_max = Eigen::VectorXd::Constant(3, 1.0);
  }

  if (j.contains("world")) {
    const json& w = j.at("world");
    check_keys(w, {"enabled", "surface_z", "hole_center", "peg_half_width",
                   "clearance", "hole_depth", "k_c", "c_c", "mu", "v_eps"},
               "world");
    opt(w, "enabled", c.env.contact_enabled);
    opt(w, "surface_z", c.env.world.surface_z);
    if (w.contains("hole_center"))
      c.env.world.hole_center = vec3(w.at("hole_center"), "world.hole_center");
    opt(w, "peg_half_width", c.env.world.peg_half_width);
    opt(w, "clearance", c.env.world.clearance);
    opt(w, "hole_depth", c.env.world.hole_depth);
    opt(w, "k_c", c.env.world.k_c);
    opt(w, "c_c", c.env.world.c_c);
    opt(w, "mu", c.env.world.mu);
    opt(w, "v_eps", c.env.world.v_eps);
  }

  if (j.contains("sensor")) {
    const json& s = j.at("sensor");
    check_keys(s, {"force_noise_std", "torque_noise_std", "cutoff_hz"},
               "sensor");
    opt(s, "force_noise_std", c.env.sensor_force_noise);
    opt(s, "torque_noise_std", c.env.sensor_torque_noise);
    opt(s, "cutoff_hz", c.env.sensor_cutoff_hz);
  }

  if (j.contains("safety")) {
    const json& s = j.at("safety");
    check_keys(s, {"qdot_max", "f_max", "tau_max"}, "safety");
    if (s.contains("qdot_max")) {
      const double v = s.at("qdot_max").get<double>();
      if (v <= 0.0) throw ConfigError("safety.qdot_max must be positive");
      c.env.limits.qdot_max.setConstant(v);
    }
    opt(s, "f_max", c.env.limits.f_max);
    opt(s, "tau_max", c.env.limits.tau_max);
    if (c.env.limits.f_max <= 0.0 || c.env.limits.tau_max <= 0.0)
      throw ConfigError("safety limits must be positive");
  }

  if (j.contains("controller")) {
    const json& k = j.at("controller");
    check_keys(k, {"kp_x_base", "kp_x_range", "kp_f_base", "kp_f_range",
                   "stiffness_base", "stiffness_range", "zeta", "inertia",
                   "integral_clamp", "velocity_clamp", "a_max_pos",
                   "a_max_rot", "actuator_tau"},
               "controller");
    Vector6d kp_xb = c.env.kp_x_schedule.base, kp_xr = c.env.kp_x_schedule.range;
    Vector6d kp_fb = c.env.kp_f_schedule.base, kp_fr = c.env.kp_f_schedule.range;
    Vector6d kb = c.env.stiffness_schedule.base,
             kr = c.env.stiffness_schedule.range;
    opt6(k, "kp_x_base", kp_xb, "controller");
    opt6(k, "kp_x_range", kp_xr, "controller");
    opt6(k, "kp_f_base", kp_fb, "controller");
    opt6(k, "kp_f_range", kp_fr, "controller");
    opt6(k, "stiffness_base", kb, "controller");
    opt6(k, "stiffness_range", kr, "controller");
    c.env.kp_x_schedule = GainSchedule(kp_xb, kp_xr);
    c.env.kp_f_schedule = GainSchedule(kp_fb, kp_fr);
    c.env.stiffness_schedule = GainSchedule(kb, kr);
    opt(k, "zeta", c.env.zeta);
    opt(k, "inertia", c.env.inertia);
    opt(k, "integral_clamp", c.env.integral_clamp);
    opt(k, "velocity_clamp", c.env.admittance_velocity_clamp);
    opt(k, "a_max_pos", c.env.a_max_pos);
    opt(k, "a_max_rot", c.env.a_max_rot);
    opt(k, "actuator_tau", c.env.actuator_tau);
  }

  if (j.contains("episode")) {
    const json& e = j.at("episode");
    check_keys(e, {"x0", "goal", "max_steps", "success_pos_tol",
                   "success_rot_tol", "jitter_pos_std"},
               "episode");
    if (e.contains("x0")) c.env.episode.x0.p = vec3(e.at("x0"), "episode.x0");
    if (e.contains("goal"))
      c.env.episode.x_g.p = vec3(e.at("goal"), "episode.goal");
    opt(e, "max_steps", c.env.episode.max_steps);
    if (c.env.episode.max_steps < 1)
      throw ConfigError("episode.max_steps must be >= 1");
    opt(e, "success_pos_tol", c.env.episode.success_pos_tol);
    opt(e, "success_rot_tol", c.env.episode.success_rot_tol);
    opt(e, "jitter_pos_std", c.env.reset_jitter_pos_std);
  }

  if (j.contains("reward")) {
    const json& r = j.at("reward");
    check_keys(r, {"w1", "w2", "w3", "w4", "w5", "rho", "x_max", "a_max",
                   "f_max", "tau_max", "l12_c"},
               "reward");
    opt(r, "w1", c.env.reward.w1);
    opt(r, "w2", c.env.reward.w2);
    opt(r, "w3", c.env.reward.w3);
    opt(r, "w4", c.env.reward.w4);
    opt(r, "w5", c.env.reward.w5);
    opt(r, "rho", c.env.reward.rho);
    opt6(r, "x_max", c.env.reward.x_max, "reward");
    opt(r, "a_max", c.env.reward.a_max);
    if (r.contains("f_max")) {
      const double f = r.at("f_max").get<double>();
      c.env.reward.f_max.head<3>().setConstant(f);
    }
    if (r.contains("tau_max")) {
      const double t = r.at("tau_max").get<double>();
      c.env.reward.f_max.tail<3>().setConstant(t);
    }
    opt(r, "l12_c", c.env.reward.l12_c);
  } else {
    c.env.reward.f_max.head<3>().setConstant(c.env.limits.f_max);
    c.env.reward.f_max.tail<3>().setConstant(c.env.limits.tau_max);
  }
  c.env.reward.penalize_collision = c.penalize_collision;
  c.env.obs_f_norm.head<3>().setConstant(c.env.limits.f_max);
  c.env.obs_f_norm.tail<3>().setConstant(c.env.limits.tau_max);

  if (j.contains("sac")) {
    const json& s = j.at("sac");
    check_keys(s, {"hidden", "gamma", "tau", "lr", "batch_size", "alpha_init",
                   "auto_alpha", "target_entropy", "buffer_capacity"},
               "sac");
    opt(s, "hidden", c.sac.hidden);
    opt(s, "gamma", c.sac.gamma);
    opt(s, "tau", c.sac.tau);
    opt(s, "lr", c.sac.lr);
    opt(s, "batch_size", c.sac.batch_size);
    opt(s, "alpha_init", c.sac.alpha_init);
    opt(s, "auto_alpha", c.sac.auto_alpha);
    opt(s, "target_entropy", c.sac.target_entropy);
    opt(s, "buffer_capacity", c.sac.buffer_capacity);
  }

  if (j.contains("training")) {
    const json& t = j.at("training");
    check_keys(t, {"warmup_steps", "update_every", "early_stop_success_rate",
                   "early_stop_window"},
               "training");
    opt(t, "warmup_steps", c.warmup_steps);
    opt(t, "update_every", c.update_every);
    opt(t, "early_stop_success_rate", c.early_stop_success_rate);
    opt(t, "early_stop_window", c.early_stop_window);
  }

  c.sac.obs_dim = 18;
  c.sac.act_dim = ActionSpaceModel::by_name(c.model).dims();
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_run_config(j);
}

namespace detail {
inline json vec6_json(const Vector6d& v) {
  json a = json::array();
  for (int i = 0; i < 6; ++i) a.push_back(v[i]);
  return a;
}
inline json vec3_json(const Vector3d& v) { return json::array({v[0], v[1], v[2]}); }
}  // namespace detail

// Canonical resolved form; persisted beside the run outputs and hashed into
// checkpoints.
inline json dump_run_config(const RunConfig& c) {
  using namespace detail;
  json j;
  j["schema_version"] = c.schema_version;
  j["profile"] = c.profile;
  j["seed"] = c.seed;
  j["total_steps"] = c.total_steps;
  j["model"] = c.model;
  j["penalize_collision"] = c.penalize_collision;
  j["robot"] = {
      {"kind", c.env.robot == RobotKind::FreeFlyer ? "freeflyer" : "planar3r"},
      {"workspace_min", vec3_json(c.env.workspace_min)},
      {"workspace_max", vec3_json(c.env.workspace_max)},
      {"max_rotation", c.env.max_rotation},
      {"planar_links", vec3_json(c.env.planar_links)}};
  j["world"] = {{"enabled", c.env.contact_enabled},
                {"surface_z", c.env.world.surface_z},
                {"hole_center", vec3_json(c.env.world.hole_center)},
                {"peg_half_width", c.env.world.peg_half_width},
                {"clearance", c.env.world.clearance},
                {"hole_depth", c.env.world.hole_depth},
                {"k_c", c.env.world.k_c},
                {"c_c", c.env.world.c_c},
                {"mu", c.env.world.mu},
                {"v_eps", c.env.world.v_eps}};
  j["sensor"] = {{"force_noise_std", c.env.sensor_force_noise},
                 {"torque_noise_std", c.env.sensor_torque_noise},
                 {"cutoff_hz", c.env.sensor_cutoff_hz}};
  j["safety"] = {{"qdot_max", c.env.limits.qdot_max[0]},
                 {"f_max", c.env.limits.f_max},
                 {"tau_max", c.env.limits.tau_max}};
  j["controller"] = {{"kp_x_base", vec6_json(c.env.kp_x_schedule.base)},
                     {"kp_x_range", vec6_json(c.env.kp_x_schedule.range)},
                     {"kp_f_base", vec6_json(c.env.kp_f_schedule.base)},
                     {"kp_f_range", vec6_json(c.env.kp_f_schedule.range)},
                     {"stiffness_base", vec6_json(c.env.stiffness_schedule.base)},
                     {"stiffness_range", vec6_json(c.env.stiffness_schedule.range)},
                     {"zeta", c.env.zeta},
                     {"inertia", c.env.inertia},
                     {"integral_clamp", c.env.integral_clamp},
                     {"velocity_clamp", c.env.admittance_velocity_clamp},
                     {"a_max_pos", c.env.a_max_pos},
                     {"a_max_rot", c.env.a_max_rot},
                     {"actuator_tau", c.env.actuator_tau}};
  j["episode"] = {{"x0", vec3_json(c.env.episode.x0.p)},
                  {"goal", vec3_json(c.env.episode.x_g.p)},
                  {"max_steps", c.env.episode.max_steps},
                  {"success_pos_tol", c.env.episode.success_pos_tol},
                  {"success_rot_tol", c.env.episode.success_rot_tol},
                  {"jitter_pos_std", c.env.reset_jitter_pos_std}};
  j["reward"] = {{"w1", c.env.reward.w1}, {"w2", c.env.reward.w2},
                 {"w3", c.env.reward.w3}, {"w4", c.env.reward.w4},
                 {"w5", c.env.reward.w5}, {"rho", c.env.reward.rho},
                 {"x_max", vec6_json(c.env.reward.x_max)},
                 {"a_max", c.env.reward.a_max},
                 {"f_max", c.env.reward.f_max[0]},
                 {"tau_max", c.env.reward.f_max[3]},
                 {"l12_c", c.env.reward.l12_c}};
  j["sac"] = {{"hidden", c.sac.hidden},     {"gamma", c.sac.gamma},
              {"tau", c.sac.tau},           {"lr", c.sac.lr},
              {"batch_size", c.sac.batch_size},
              {"alpha_init", c.sac.alpha_init},
              {"auto_alpha", c.sac.auto_alpha},
              {"target_entropy", c.sac.target_entropy},
              {"buffer_capacity", c.sac.buffer_capacity}};
  j["training"] = {{"warmup_steps", c.warmup_steps},
                   {"update_every", c.update_every},
                   {"early_stop_success_rate", c.early_stop_success_rate},
                   {"early_stop_window", c.early_stop_window}};
  return j;
}

// FNV-1a over the canonical dump; ties checkpoints to the config they were
// trained with.
inline std::uint64_t config_hash(const RunConfig& c) {
  const std::string s = dump_run_config(c).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace flc
