#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

namespace prism {

struct AdamOptions {
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias-corrected moments over a dense parameter matrix.
/// A parameter whose gradient has always been exactly zero never moves.
class Adam {
 public:
  Adam(AdamOptions options, Eigen::Index rows, Eigen::Index cols)
      : opt_(options), m_(Eigen::MatrixXd::Zero(rows, cols)), v_(Eigen::MatrixXd::Zero(rows, cols)) {}

  void step(Eigen::MatrixXd& params, const Eigen::MatrixXd& grad) {
    ++t_;
    m_ = opt_.beta1 * m_ + (1.0 - opt_.beta1) * grad;
    v_ = opt_.beta2 * v_ + (1.0 - opt_.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
    for (Eigen::Index c = 0; c < params.cols(); ++c) {
      for (Eigen::Index r = 0; r < params.rows(); ++r) {
        const double m_hat = m_(r, c) / bc1;
        const double v_hat = v_(r, c) / bc2;
        params(r, c) -= opt_.learning_rate * m_hat / (std::sqrt(v_hat) + opt_.eps);
      }
    }
  }

  std::int64_t steps() const { return t_; }

 private:
  AdamOptions opt_;
  Eigen::MatrixXd m_;
  Eigen::MatrixXd v_;
  std::int64_t t_ = 0;
};

}  // namespace prism
