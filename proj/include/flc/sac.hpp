#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "flc/mlp.hpp"
#include "flc/replay_buffer.hpp"
#include "flc/rng.hpp"

namespace flc {

// Soft Actor-Critic with a squashed-Gaussian policy, twin Q functions and
// automatic entropy temperature. Single-threaded; one gradient step per call
// to update().
class SacAgent {
 public:
  struct Config {
    int obs_dim{0};
    int act_dim{0};
    std::vector<int> hidden{64, 64};
    double gamma{0.99};
    double tau{0.005};
    double lr{3e-4};
    double alpha_init{0.2};
    bool auto_alpha{true};
    double target_entropy{0.0};  // 0 -> use -act_dim
    int batch_size{64};
    std::size_t buffer_capacity{50000};
  };

  struct LossReport {
    double q1_loss{0.0};
    double q2_loss{0.0};
    double policy_loss{0.0};
    double alpha_loss{0.0};
    double alpha{0.0};
    double mean_logp{0.0};
  };

  // Cached policy-head evaluation; the noise xi is held fixed so that the
  // reparameterized gradients are exact.
  struct PolicyEval {
    Eigen::MatrixXd a;        // act_dim x B, in (-1,1)
    Eigen::VectorXd logp;     // B
    Eigen::MatrixXd mu, raw, log_std, sigma, u, xi;
  };

  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 2.0;
  static constexpr double kSquashEps = 1e-6;

  SacAgent(const Config& cfg, std::uint64_t seed)
      : cfg_(cfg), rng_(seed), buffer_(cfg.buffer_capacity) {
    if (cfg.obs_dim <= 0 || cfg.act_dim <= 0)
      throw std::invalid_argument("SacAgent: bad dimensions");
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0))
      throw std::invalid_argument("SacAgent: gamma must be in (0,1)");
    if (!(cfg.tau > 0.0 && cfg.tau <= 1.0))
      throw std::invalid_argument("SacAgent: tau must be in (0,1]");
    std::vector<int> pol_sizes{cfg.obs_dim};
    std::vector<int> q_sizes{cfg.obs_dim + cfg.act_dim};
    for (int h : cfg.hidden) {
      pol_sizes.push_back(h);
      q_sizes.push_back(h);
    }
    pol_sizes.push_back(2 * cfg.act_dim);  // mean and raw log-std
    q_sizes.push_back(1);
    policy_ = Mlp(pol_sizes, rng_);
    q1_ = Mlp(q_sizes, rng_);
    q2_ = Mlp(q_sizes, rng_);
    q1_target_ = q1_;
    q2_target_ = q2_;
    log_alpha_ = std::log(cfg.alpha_init);
    target_entropy_ =
        cfg.target_entropy != 0.0 ? cfg.target_entropy : -cfg.act_dim;
  }

  double alpha() const { return std::exp(log_alpha_); }
  ReplayBuffer& buffer() { return buffer_; }
  Rng& rng() { return rng_; }
  Mlp& policy() { return policy_; }
  Mlp& q1() { return q1_; }
  Mlp& q2() { return q2_; }
  Mlp& q1_target() { return q1_target_; }
  Mlp& q2_target() { return q2_target_; }
  const Config& config() const { return cfg_; }

  Eigen::MatrixXd randn(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) m(i, j) = rng_.normal();
    return m;
  }

  // Forward through the policy head with given pre-squash noise.
  PolicyEval policy_eval(const Eigen::MatrixXd& obs,
                         const Eigen::MatrixXd& xi) {
    PolicyEval e;
    e.xi = xi;
    const Eigen::MatrixXd out = policy_.forward(obs);
    const int a_dim = cfg_.act_dim;
    e.mu = out.topRows(a_dim);
    e.raw = out.bottomRows(a_dim);
    e.log_std = (kLogStdMin +
                 0.5 * (kLogStdMax - kLogStdMin) *
                     (e.raw.array().tanh() + 1.0))
                    .matrix();
    e.sigma = e.log_std.array().exp().matrix();
    e.u = e.mu + e.sigma.cwiseProduct(xi);
    e.a = e.u.array().tanh().matrix();
    const int b = static_cast<int>(obs.cols());
    e.logp.resize(b);
    for (int j = 0; j < b; ++j) {
      double lp = 0.0;
      for (int i = 0; i < a_dim; ++i) {
        lp += -0.5 * std::log(2.0 * std::numbers::pi) - e.log_std(i, j) -
              0.5 * xi(i, j) * xi(i, j);
        lp -= std::log(1.0 - e.a(i, j) * e.a(i, j) + kSquashEps);
      }
      e.logp[j] = lp;
    }
    return e;
  }

  // Push upstream gradients dL/da and dL/dlogp through the policy head into
  // the policy parameter gradients. Must follow the matching policy_eval.
  void policy_backprop(const PolicyEval& e, const Eigen::MatrixXd& dl_da,
                       const Eigen::VectorXd& dl_dlogp) {
    const int a_dim = cfg_.act_dim;
    const int b = static_cast<int>(e.a.cols());
    Eigen::MatrixXd da = dl_da;
    // logp depends on a through the squash correction
    for (int j = 0; j < b; ++j)
      for (int i = 0; i < a_dim; ++i)
        da(i, j) += dl_dlogp[j] * 2.0 * e.a(i, j) /
                    (1.0 - e.a(i, j) * e.a(i, j) + kSquashEps);
    const Eigen::MatrixXd du =
        da.cwiseProduct((1.0 - e.a.array().square()).matrix());
    const Eigen::MatrixXd dmu = du;
    Eigen::MatrixXd dlog_std = du.cwiseProduct(e.sigma.cwiseProduct(e.xi));
    for (int j = 0; j < b; ++j)
      for (int i = 0; i < a_dim; ++i) dlog_std(i, j) -= dl_dlogp[j];
    const Eigen::MatrixXd draw = dlog_std.cwiseProduct(
        (0.5 * (kLogStdMax - kLogStdMin) *
         (1.0 - e.raw.array().tanh().square()))
            .matrix());
    Eigen::MatrixXd dy(2 * a_dim, b);
    dy.topRows(a_dim) = dmu;
    dy.bottomRows(a_dim) = draw;
    policy_.backward(dy);
  }

  struct ActionSample {
    Eigen::VectorXd action;
    double logp{0.0};
  };

  ActionSample sample_action(const Eigen::VectorXd& obs,
                             bool deterministic = false) {
    Eigen::MatrixXd o = obs;
    const Eigen::MatrixXd xi =
        deterministic ? Eigen::MatrixXd::Zero(cfg_.act_dim, 1)
                      : randn(cfg_.act_dim, 1);
    const PolicyEval e = policy_eval(o, xi);
    return {e.a.col(0), e.logp[0]};
  }

  void store(Transition t) { buffer_.store(std::move(t)); }

  bool can_update() const {
    return buffer_.size() >= static_cast<std::size_t>(cfg_.batch_size);
  }

  static Eigen::MatrixXd stack(const Eigen::MatrixXd& obs,
                               const Eigen::MatrixXd& act) {
    Eigen::MatrixXd in(obs.rows() + act.rows(), obs.cols());
    in.topRows(obs.rows()) = obs;
    in.bottomRows(act.rows()) = act;
    return in;
  }

  LossReport update() { return update(buffer_.sample(cfg_.batch_size, rng_)); }

  LossReport update(const Batch& batch) {
    const int b = static_cast<int>(batch.reward.size());
    const double alpha_now = alpha();
    LossReport report;

    // --- critic targets
    const PolicyEval next_eval =
        policy_eval(batch.next_obs, randn(cfg_.act_dim, b));
    const Eigen::MatrixXd next_in = stack(batch.next_obs, next_eval.a);
    const Eigen::MatrixXd q1t = q1_target_.forward(next_in);
    const Eigen::MatrixXd q2t = q2_target_.forward(next_in);
    Eigen::VectorXd y(b);
    for (int j = 0; j < b; ++j) {
      const double min_q = std::min(q1t(0, j), q2t(0, j));
      y[j] = batch.reward[j] +
             cfg_.gamma * (1.0 - batch.done[j]) *
                 (min_q - alpha_now * next_eval.logp[j]);
    }

    // --- critic updates
    const Eigen::MatrixXd in = stack(batch.obs, batch.action);
    auto critic_step = [&](Mlp& q) {
      q.zero_grad();
      const Eigen::MatrixXd out = q.forward(in);
      Eigen::MatrixXd dy(1, b);
      double loss = 0.0;
      for (int j = 0; j < b; ++j) {
        const double err = out(0, j) - y[j];
        loss += err * err;
        dy(0, j) = 2.0 * err / b;
      }
      q.backward(dy);
      q.adam_step(cfg_.lr);
      return loss / b;
    };
    report.q1_loss = critic_step(q1_);
    report.q2_loss = critic_step(q2_);

    // --- policy update (reparameterized)
    const PolicyEval eval = policy_eval(batch.obs, randn(cfg_.act_dim, b));
    const Eigen::MatrixXd pol_in = stack(batch.obs, eval.a);
    q1_.zero_grad();
    q2_.zero_grad();
    const Eigen::MatrixXd pq1 = q1_.forward(pol_in);
    const Eigen::MatrixXd pq2 = q2_.forward(pol_in);
    Eigen::MatrixXd dy1 = Eigen::MatrixXd::Zero(1, b);
    Eigen::MatrixXd dy2 = Eigen::MatrixXd::Zero(1, b);
    double policy_loss = 0.0;
    for (int j = 0; j < b; ++j) {
      const bool use1 = pq1(0, j) <= pq2(0, j);
      policy_loss += alpha_now * eval.logp[j] - std::min(pq1(0, j), pq2(0, j));
      (use1 ? dy1 : dy2)(0, j) = -1.0 / b;
    }
    policy_loss /= b;
    const Eigen::MatrixXd din1 = q1_.backward(dy1);
    const Eigen::MatrixXd din2 = q2_.backward(dy2);
    const Eigen::MatrixXd dl_da = din1.bottomRows(cfg_.act_dim) +
                                  din2.bottomRows(cfg_.act_dim);
    policy_.zero_grad();
    policy_backprop(eval, dl_da,
                    Eigen::VectorXd::Constant(b, alpha_now / b));
    policy_.adam_step(cfg_.lr);
    report.policy_loss = policy_loss;
    report.mean_logp = eval.logp.mean();

    // --- temperature update
    if (cfg_.auto_alpha) {
      const double excess = report.mean_logp + target_entropy_;
      report.alpha_loss = -alpha_now * excess;
      const double grad = -alpha_now * excess;  // d/dlog_alpha
      alpha_adam_step(grad);
    }
    report.alpha = alpha();

    // --- target networks
    soft_update(q1_target_, q1_, cfg_.tau);
    soft_update(q2_target_, q2_, cfg_.tau);

    if (!std::isfinite(report.q1_loss) || !std::isfinite(report.q2_loss) ||
        !std::isfinite(report.policy_loss))
      throw std::runtime_error(
          "SacAgent::update: non-finite loss (q1=" +
          std::to_string(report.q1_loss) + " q2=" +
          std::to_string(report.q2_loss) + " pi=" +
          std::to_string(report.policy_loss) + ")");
    return report;
  }

  double target_entropy() const { return target_entropy_; }
  double log_alpha() const { return log_alpha_; }
  void set_log_alpha(double v) { log_alpha_ = v; }

  void save(std::ostream& os) const {
    os << "flc-sac-checkpoint v1\n";
    os.precision(17);
    os << log_alpha_ << '\n';
    policy_.save(os);
    q1_.save(os);
    q2_.save(os);
    q1_target_.save(os);
    q2_target_.save(os);
  }

  void load(std::istream& is) {
    std::string tag, version;
    is >> tag >> version;
    if (tag != "flc-sac-checkpoint" || version != "v1")
      throw std::runtime_error("SacAgent::load: unknown checkpoint format");
    is >> log_alpha_;
    policy_ = Mlp::load(is);
    q1_ = Mlp::load(is);
    q2_ = Mlp::load(is);
    q1_target_ = Mlp::load(is);
    q2_target_ = Mlp::load(is);
  }

 private:
  void alpha_adam_step(double grad) {
    ++alpha_t_;
    alpha_m_ = 0.9 * alpha_m_ + 0.1 * grad;
    alpha_v_ = 0.999 * alpha_v_ + 0.001 * grad * grad;
    const double m_hat = alpha_m_ / (1.0 - std::pow(0.9, alpha_t_));
    const double v_hat = alpha_v_ / (1.0 - std::pow(0.999, alpha_t_));
    log_alpha_ -= cfg_.lr * m_hat / (std::sqrt(v_hat) + 1e-8);
  }

  Config cfg_;
  Rng rng_;
  ReplayBuffer buffer_;
  Mlp policy_, q1_, q2_, q1_target_, q2_target_;
  double log_alpha_{0.0};
  double target_entropy_{0.0};
  double alpha_m_{0.0}, alpha_v_{0.0};
  long alpha_t_{0};
};

}  // namespace flc
