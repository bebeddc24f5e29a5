#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace canopy {

// Fully connected network, tanh hidden activations, tanh or linear output.
// Samples are columns; forward_batch caches activations for backward.
class Mlp {
 public:
  enum class Output { Tanh, Linear };

  Mlp() = default;
  Mlp(std::vector<int> layer_sizes, Output output_activation)
      : sizes_(std::move(layer_sizes)), output_(output_activation) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least two layer sizes");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      weights_.emplace_back(Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]));
      biases_.emplace_back(Eigen::VectorXd::Zero(sizes_[l + 1]));
    }
  }

  /// Orthogonal weight init (QR of a Gaussian matrix, sign-fixed), zero biases.
  /// The output layer uses its own gain so initial outputs stay small.
  static Mlp orthogonal(const std::vector<int>& layer_sizes, Output output_activation,
                        double hidden_gain, double output_gain, std::mt19937_64& rng) {
    Mlp net(layer_sizes, output_activation);
    for (std::size_t l = 0; l < net.weights_.size(); ++l) {
      const double gain = (l + 1 == net.weights_.size()) ? output_gain : hidden_gain;
      net.weights_[l] = gain * orthogonal_matrix(net.weights_[l].rows(), net.weights_[l].cols(), rng);
    }
    return net;
  }

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::size_t layer_count() const { return weights_.size(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  Output output_activation() const { return output_; }

  Eigen::MatrixXd& weight(std::size_t l) { return weights_[l]; }
  const Eigen::MatrixXd& weight(std::size_t l) const { return weights_[l]; }
  Eigen::VectorXd& bias(std::size_t l) { return biases_[l]; }
  const Eigen::VectorXd& bias(std::size_t l) const { return biases_[l]; }

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // activations[0] = input batch
  };

  struct Grad {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;

    void resize_like(const Mlp& net) {
      dW.clear();
      db.clear();
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        dW.emplace_back(Eigen::MatrixXd::Zero(net.weight(l).rows(), net.weight(l).cols()));
        db.emplace_back(Eigen::VectorXd::Zero(net.bias(l).size()));
      }
    }
    void set_zero() {
      for (auto& m : dW) m.setZero();
      for (auto& v : db) v.setZero();
    }
  };

  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& input, Cache* cache = nullptr) const {
    if (input.rows() != input_dim()) throw std::invalid_argument("Mlp: bad input dimension");
    if (cache) {
      cache->activations.clear();
      cache->activations.push_back(input);
    }
    Eigen::MatrixXd a = input;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Eigen::MatrixXd z = (weights_[l] * a).colwise() + biases_[l];
      const bool last = (l + 1 == weights_.size());
      if (!last || output_ == Output::Tanh) z = z.array().tanh();
      a = std::move(z);
      if (cache) cache->activations.push_back(a);
    }
    return a;
  }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
    if (!x.allFinite()) throw std::invalid_argument("Mlp: non-finite input");
    return forward_batch(x).col(0);
  }

  /// Backprop of a scalar loss. d_output is dL/d(output batch); gradients are
  /// accumulated into grad. Returns nothing; dL/dinput is not needed here.
  void backward(const Cache& cache, const Eigen::MatrixXd& d_output, Grad& grad) const {
    Eigen::MatrixXd delta = d_output;
    for (std::size_t li = weights_.size(); li-- > 0;) {
      const Eigen::MatrixXd& act = cache.activations[li + 1];
      const bool last = (li + 1 == weights_.size());
      if (!last || output_ == Output::Tanh)
        delta.array() *= 1.0 - act.array().square();  // tanh'(z) = 1 - tanh(z)^2
      grad.dW[li].noalias() += delta * cache.activations[li].transpose();
      grad.db[li] += delta.rowwise().sum();
      if (li > 0) delta = weights_[li].transpose() * delta;
    }
  }

  bool all_finite() const {
    for (const auto& w : weights_)
      if (!w.allFinite()) return false;
    for (const auto& b : biases_)
      if (!b.allFinite()) return false;
    return true;
  }

  int param_count() const {
    int n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
      n += static_cast<int>(weights_[l].size() + biases_[l].size());
    return n;
  }

  // Row-major, layer order, weight then bias. Matches the serialized format.
  void flatten_into(Eigen::Ref<Eigen::VectorXd> out, int offset = 0) const {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      const auto& w = weights_[l];
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) out(offset++) = w(r, c);
      for (Eigen::Index i = 0; i < biases_[l].size(); ++i) out(offset++) = biases_[l](i);
    }
  }

  void unflatten_from(const Eigen::Ref<const Eigen::VectorXd>& in, int offset = 0) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      auto& w = weights_[l];
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = in(offset++);
      for (Eigen::Index i = 0; i < biases_[l].size(); ++i) biases_[l](i) = in(offset++);
    }
  }

 private:
  static Eigen::MatrixXd orthogonal_matrix(Eigen::Index rows, Eigen::Index cols,
                                           std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const bool tall = rows >= cols;
    const Eigen::Index n = std::max(rows, cols), m = std::min(rows, cols);
    Eigen::MatrixXd g(n, m);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < m; ++c) g(r, c) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
    const Eigen::MatrixXd r_mat = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < m; ++c)
      if (r_mat(c, c) < 0.0) q.col(c) = -q.col(c);
    return tall ? q : Eigen::MatrixXd(q.transpose());
  }

  std::vector<int> sizes_;
  Output output_ = Output::Linear;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Adam over a flat parameter vector.
class Adam {
 public:
  Adam(int dim, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
        m_(Eigen::VectorXd::Zero(dim)), v_(Eigen::VectorXd::Zero(dim)) {}

  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.array().square().matrix();
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    params.array() -=
        lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

}  // namespace canopy
