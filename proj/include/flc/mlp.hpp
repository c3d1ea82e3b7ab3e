#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "flc/rng.hpp"
#include "flc/types.hpp"

namespace flc {

// Fully connected net, tanh hidden layers, linear output. Batches are stored
// column-wise (one sample per column). Backprop is hand-written; the
// finite-difference suite in the tests is the correctness authority.
class Mlp {
 public:
  struct Layer {
    Eigen::MatrixXd w;
    Eigen::VectorXd b;
    Eigen::MatrixXd gw;
    Eigen::VectorXd gb;
    // Adam moments
    Eigen::MatrixXd mw, vw;
    Eigen::VectorXd mb, vb;
  };

  Mlp() = default;

  Mlp(const std::vector<int>& sizes, Rng& rng) : sizes_(sizes) {
    if (sizes.size() < 2) throw std::invalid_argument("Mlp: need >= 2 sizes");
    layers_.resize(sizes.size() - 1);
    for (size_t l = 0; l < layers_.size(); ++l) {
      const int in = sizes[l], out = sizes[l + 1];
      auto& lay = layers_[l];
      const double lim = std::sqrt(1.0 / in);
      lay.w.resize(out, in);
      for (int i = 0; i < out; ++i)
        for (int j = 0; j < in; ++j) lay.w(i, j) = rng.uniform(-lim, lim);
      lay.b = Eigen::VectorXd::Zero(out);
      lay.gw = Eigen::MatrixXd::Zero(out, in);
      lay.gb = Eigen::VectorXd::Zero(out);
      lay.mw = lay.vw = lay.gw;
      lay.mb = lay.vb = lay.gb;
    }
  }

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) {
    inputs_.clear();
    Eigen::MatrixXd h = x;
    for (size_t l = 0; l < layers_.size(); ++l) {
      inputs_.push_back(h);
      h = (layers_[l].w * h).colwise() + layers_[l].b;
      if (l + 1 < layers_.size()) h = h.array().tanh();
    }
    last_output_ = h;
    return h;
  }

  // dL/dy for the last forward pass; accumulates parameter gradients and
  // returns dL/dx.
  Eigen::MatrixXd backward(const Eigen::MatrixXd& dy) {
    Eigen::MatrixXd delta = dy;
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
      auto& lay = layers_[l];
      if (l + 1 < static_cast<int>(layers_.size())) {
        // delta is w.r.t. the tanh output of layer l, which was cached as
        // the input of layer l+1; convert to pre-activation
        delta = delta.cwiseProduct(
            (1.0 - inputs_[l + 1].array().square()).matrix());
      }
      lay.gw += delta * inputs_[l].transpose();
      lay.gb += delta.rowwise().sum();
      delta = lay.w.transpose() * delta;
    }
    return delta;
  }

  void zero_grad() {
    for (auto& l : layers_) {
      l.gw.setZero();
      l.gb.setZero();
    }
  }

  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8) {
    ++adam_t_;
    const double c1 = 1.0 - std::pow(beta1, adam_t_);
    const double c2 = 1.0 - std::pow(beta2, adam_t_);
    for (auto& l : layers_) {
      l.mw = beta1 * l.mw + (1.0 - beta1) * l.gw;
      l.vw = beta2 * l.vw + (1.0 - beta2) * l.gw.cwiseProduct(l.gw);
      l.w -= (lr / c1) * l.mw.cwiseQuotient(
                 ((l.vw / c2).cwiseSqrt().array() + eps).matrix());
      l.mb = beta1 * l.mb + (1.0 - beta1) * l.gb;
      l.vb = beta2 * l.vb + (1.0 - beta2) * l.gb.cwiseProduct(l.gb);
      l.b -= (lr / c1) * l.mb.cwiseQuotient(
                 ((l.vb / c2).cwiseSqrt().array() + eps).matrix());
    }
  }

  // flat parameter access (gradient checks, checkpoints)
  int num_params() const {
    int n = 0;
    for (const auto& l : layers_) n += static_cast<int>(l.w.size() + l.b.size());
    return n;
  }

  Eigen::VectorXd get_params() const {
    Eigen::VectorXd p(num_params());
    int off = 0;
    for (const auto& l : layers_) {
      p.segment(off, l.w.size()) =
          Eigen::Map<const Eigen::VectorXd>(l.w.data(), l.w.size());
      off += static_cast<int>(l.w.size());
      p.segment(off, l.b.size()) = l.b;
      off += static_cast<int>(l.b.size());
    }
    return p;
  }

  void set_params(const Eigen::VectorXd& p) {
    int off = 0;
    for (auto& l : layers_) {
      Eigen::Map<Eigen::VectorXd>(l.w.data(), l.w.size()) =
          p.segment(off, l.w.size());
      off += static_cast<int>(l.w.size());
      l.b = p.segment(off, l.b.size());
      off += static_cast<int>(l.b.size());
    }
  }

  Eigen::VectorXd get_grads() const {
    Eigen::VectorXd g(num_params());
    int off = 0;
    for (const auto& l : layers_) {
      g.segment(off, l.gw.size()) =
          Eigen::Map<const Eigen::VectorXd>(l.gw.data(), l.gw.size());
      off += static_cast<int>(l.gw.size());
      g.segment(off, l.gb.size()) = l.gb;
      off += static_cast<int>(l.gb.size());
    }
    return g;
  }

  void save(std::ostream& os) const {
    os << sizes_.size();
    for (int s : sizes_) os << ' ' << s;
    os << '\n';
    os.precision(17);
    for (const auto& l : layers_) {
      for (int i = 0; i < l.w.size(); ++i) os << l.w.data()[i] << ' ';
      for (int i = 0; i < l.b.size(); ++i) os << l.b[i] << ' ';
      os << '\n';
    }
  }

  static Mlp load(std::istream& is) {
    size_t n;
    if (!(is >> n)) throw std::runtime_error("Mlp::load: bad header");
    std::vector<int> sizes(n);
    for (auto& s : sizes) is >> s;
    Rng dummy(0);
    Mlp net(sizes, dummy);
    for (auto& l : net.layers_) {
      for (int i = 0; i < l.w.size(); ++i) is >> l.w.data()[i];
      for (int i = 0; i < l.b.size(); ++i) is >> l.b[i];
    }
    if (!is) throw std::runtime_error("Mlp::load: truncated weights");
    return net;
  }

 private:
  std::vector<int> sizes_;
  std::vector<Layer> layers_;
  std::vector<Eigen::MatrixXd> inputs_;
  Eigen::MatrixXd last_output_;
  long adam_t_{0};
};

// target <- (1 - tau) * target + tau * online
inline void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (target.sizes() != online.sizes())
    throw std::invalid_argument("soft_update: shape mismatch");
  auto& tl = target.layers();
  const auto& ol = online.layers();
  for (size_t i = 0; i < tl.size(); ++i) {
    tl[i].w = (1.0 - tau) * tl[i].w + tau * ol[i].w;
    tl[i].b = (1.0 - tau) * tl[i].b + tau * ol[i].b;
  }
}

}  // namespace flc
