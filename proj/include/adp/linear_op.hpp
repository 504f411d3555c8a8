#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "adp/signal.hpp"

namespace adp {

/// Dense linear operator between discretized L^2 spaces. The adjoint is taken
/// with respect to the h-weighted inner products, so apply_adjoint multiplies
/// by (h_out/h_in) * M^T.
class LinearOp {
 public:
  LinearOp(Eigen::MatrixXd m, Interval domain, Interval codomain)
      : m_(std::move(m)), domain_(domain), codomain_(codomain) {
    if (m_.rows() < 1 || m_.cols() < 1) throw std::invalid_argument("LinearOp: empty matrix");
    if (!m_.allFinite()) throw std::invalid_argument("LinearOp: non-finite entry");
  }

  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::MatrixXd& matrix() { return m_; }
  Eigen::Index rows() const { return m_.rows(); }
  Eigen::Index cols() const { return m_.cols(); }
  Interval domain() const { return domain_; }
  Interval codomain() const { return codomain_; }
  double h_in() const { return domain_.length() / static_cast<double>(m_.cols()); }
  double h_out() const { return codomain_.length() / static_cast<double>(m_.rows()); }

  Signal apply(const Signal& x) const {
    if (x.size() != m_.cols()) throw std::invalid_argument("LinearOp::apply: size mismatch");
    return Signal(m_ * x.samples(), codomain_);
  }

  Signal apply_adjoint(const Signal& w) const {
    if (w.size() != m_.rows())
      throw std::invalid_argument("LinearOp::apply_adjoint: size mismatch");
    return Signal((h_out() / h_in()) * (m_.transpose() * w.samples()), domain_);
  }

  LinearOp adjoint() const {
    return LinearOp((h_out() / h_in()) * m_.transpose(), codomain_, domain_);
  }

  /// Gram matrix of the weighted adjoint composition, (h_out/h_in) * M^T M.
  Eigen::MatrixXd normal_matrix() const {
    return (h_out() / h_in()) * (m_.transpose() * m_);
  }

 private:
  Eigen::MatrixXd m_;
  Interval domain_;
  Interval codomain_;
};

}  // namespace adp
