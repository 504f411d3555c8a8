#include "adp/adp_iterative.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "adp/errors.hpp"
#include "adp/variational.hpp"

namespace adp {

namespace {

constexpr double kSupportThreshold = 1e-10;

/// x(B) for the inner problem; direct normal-equations solve when the l1
/// weight vanishes (smooth case), warm-started ISTA otherwise.
Signal inner_minimizer(const LinearOp& B, const Signal& y, const ElasticNet& pen, double alpha,
                       const IstaConfig& cfg, const Signal* warm) {
  if (pen.alpha1 == 0.0) {
    Eigen::MatrixXd normal = B.normal_matrix();
    normal.diagonal().array() += alpha * pen.alpha2;
    Eigen::LLT<Eigen::MatrixXd> llt(normal);
    if (llt.info() != Eigen::Success)
      throw SingularSystemError("inner_minimizer: normal matrix not positive definite");
    return Signal(llt.solve(B.apply_adjoint(y).samples()), B.domain());
  }
  return x_of_b(B, y, pen, alpha, cfg, warm).solution;
}

double hs_norm_sq(const LinearOp& op, const Eigen::MatrixXd& m) {
  return (op.h_out() / op.h_in()) * m.squaredNorm();
}

void check_divergence(const std::vector<double>& trace, const char* who) {
  const std::size_t n = trace.size();
  if (n < 11) return;
  for (std::size_t k = n - 10; k < n; ++k)
    if (trace[k] <= trace[k - 1]) return;
  std::ostringstream msg;
  msg << who << ": loss increased over 10 consecutive steps (" << trace[n - 11] << " -> "
      << trace[n - 1] << "); reduce the learning rate";
  throw DivergenceError(msg.str());
}

}  // namespace

Eigen::MatrixXd ift_gradient(const LinearOp& B, const Signal& x, const LinearOp& A,
                             const Signal& y, const ElasticNet& pen, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("ift_gradient: alpha must be positive");
  const Eigen::Index n = B.cols();
  const Eigen::Index m = B.rows();

  // Active set: all components in the smooth case, else the support of x.
  std::vector<Eigen::Index> support;
  support.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (pen.alpha1 == 0.0 || std::abs(x[i]) > kSupportThreshold) support.push_back(i);
  if (support.empty()) return Eigen::MatrixXd::Zero(m, n);

  const auto ns = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd b_sub(m, ns);
  for (Eigen::Index c = 0; c < ns; ++c) b_sub.col(c) = B.matrix().col(support[c]);

  // Restricted optimality system (B*B)_SS + alpha a2 I, adjoint weights included.
  Eigen::MatrixXd head = (B.h_out() / B.h_in()) * (b_sub.transpose() * b_sub);
  head.diagonal().array() += alpha * pen.alpha2;

  const Eigen::VectorXd q = A.apply_adjoint(A.apply(x) - y).samples();
  Eigen::VectorXd q_sub(ns);
  for (Eigen::Index c = 0; c < ns; ++c) q_sub[c] = q[support[c]];

  Eigen::VectorXd g_sub;
  if (pen.alpha2 > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(head);
    if (llt.info() != Eigen::Success)
      throw SingularSystemError("ift_gradient: restricted system not positive definite");
    g_sub = llt.solve(q_sub);
  } else {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(head);
    if (!lu.isInvertible())
      throw SingularSystemError("ift_gradient: restricted system singular (alpha2 = 0)");
    g_sub = lu.solve(q_sub);
  }

  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (Eigen::Index c = 0; c < ns; ++c) g[support[c]] = g_sub[c];

  const Eigen::VectorXd rho = (B.matrix() * x.samples()) - y.samples();
  const Eigen::VectorXd bg = B.matrix() * g;
  // dL/dB_ij = -h_out (rho_i g_j + (Bg)_i x_j)
  return -B.h_out() * (rho * g.transpose() + bg * x.samples().transpose());
}

SolveReport adp_ift_solve(const AdpProblem& problem, const IftConfig& cfg, const LinearOp* B0,
                          const IterateCallback& on_iterate) {
  if (cfg.lr <= 0.0) throw std::invalid_argument("adp_ift_solve: lr must be positive");
  if (cfg.discrepancy && cfg.discrepancy->tau <= 1.0)
    throw std::invalid_argument("adp_ift_solve: discrepancy factor tau must exceed 1");
  const ElasticNet pen = effective_weights(problem.pen);
  const LinearOp& A = problem.A;
  const Signal& y = problem.y;

  LinearOp B = B0 ? *B0 : A;
  Signal x = Signal::zeros(B.cols(), B.domain());
  bool have_x = false;

  SolveReport rep;
  rep.stop_reason = StopReason::max_iter;
  const double weight_ratio = B.h_out() / B.h_in();

  for (long k = 0;; ++k) {
    x = inner_minimizer(B, y, pen, problem.alpha, cfg.inner, have_x ? &x : nullptr);
    have_x = true;
    const double resid = norm(A.apply(x) - y);
    double loss = 0.5 * resid * resid;
    if (problem.beta > 0.0) loss += problem.beta * hs_norm_sq(B, B.matrix() - A.matrix());
    rep.loss_trace.push_back(loss);
    rep.residual_trace.push_back(resid);
    rep.iterations = k;
    if (on_iterate) on_iterate(k, x, B);

    if (cfg.discrepancy && resid <= cfg.discrepancy->tau * cfg.discrepancy->delta) {
      rep.stop_reason = StopReason::early_stopped;
      break;
    }
    if (cfg.fixed_stop_iter && k >= *cfg.fixed_stop_iter) {
      rep.stop_reason = StopReason::early_stopped;
      break;
    }
    if (k >= cfg.outer_iters) break;

    Eigen::MatrixXd grad = ift_gradient(B, x, A, y, pen, problem.alpha);
    if (problem.beta > 0.0)
      grad += 2.0 * problem.beta * weight_ratio * (B.matrix() - A.matrix());
    if (cfg.grad_tol > 0.0 && std::sqrt(weight_ratio) * grad.norm() <= cfg.grad_tol) {
      rep.stop_reason = StopReason::converged;
      break;
    }
    B.matrix() -= cfg.lr * grad;
    check_divergence(rep.loss_trace, "adp_ift_solve");
  }

  rep.solution = x;
  return rep;
}

namespace {

/// Forward-difference matrix with zero boundary on the kernel grid.
Eigen::MatrixXd difference_matrix(Eigen::Index len, double h) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(len, len);
  for (Eigen::Index k = 0; k < len; ++k) {
    d(k, k) = -1.0 / h;
    if (k + 1 < len) d(k, k + 1) = 1.0 / h;
  }
  return d;
}

/// Collapse an entrywise operator gradient onto the kernel samples:
/// dB_ij/dg_m = h [i - j == m - center].
Eigen::VectorXd collapse_to_kernel(const Eigen::MatrixXd& op_grad, Eigen::Index len, double h) {
  const Eigen::Index center = (len - 1) / 2;
  Eigen::VectorXd g_grad = Eigen::VectorXd::Zero(len);
  const Eigen::Index n = op_grad.rows();
  for (Eigen::Index m = 0; m < len; ++m) {
    const Eigen::Index off = m - center;
    double s = 0.0;
    for (Eigen::Index i = std::max<Eigen::Index>(0, off); i < n && i - off < n; ++i)
      s += op_grad(i, i - off);
    g_grad[m] = h * s;
  }
  return g_grad;
}

}  // namespace

Eigen::VectorXd param_data_gradient(const KernelParam& f, const KernelParam& g, const Signal& y,
                                    const Penalty& pen, double alpha, const IstaConfig& inner) {
  const ElasticNet ew = effective_weights(pen);
  const LinearOp A = make_kernel_operator(f, y.size(), y.interval());
  const LinearOp B = make_kernel_operator(g, y.size(), y.interval());
  const Signal x = inner_minimizer(B, y, ew, alpha, inner, nullptr);
  const Eigen::MatrixXd op_grad = ift_gradient(B, x, A, y, ew, alpha);
  return collapse_to_kernel(op_grad, g.g.size(), g.h);
}

std::pair<KernelParam, SolveReport> adp_beta_param_solve(const KernelParam& f, const Signal& y,
                                                         const Penalty& pen, double alpha,
                                                         double beta, const IftConfig& cfg) {
  if (beta <= 0.0) throw std::invalid_argument("adp_beta_param_solve: beta must be positive");
  if (cfg.lr <= 0.0) throw std::invalid_argument("adp_beta_param_solve: lr must be positive");
  const ElasticNet ew = effective_weights(pen);
  const LinearOp A = make_kernel_operator(f, y.size(), y.interval());
  const Eigen::Index len = f.g.size();
  const double h = f.h;
  const Eigen::MatrixXd D = difference_matrix(len, h);
  const Eigen::MatrixXd DtD = D.transpose() * D;

  KernelParam g = f;
  Signal x = Signal::zeros(y.size(), y.interval());
  bool have_x = false;
  SolveReport rep;
  rep.stop_reason = StopReason::max_iter;

  for (long k = 0;; ++k) {
    const LinearOp B = make_kernel_operator(g, y.size(), y.interval());
    x = inner_minimizer(B, y, ew, alpha, cfg.inner, have_x ? &x : nullptr);
    have_x = true;
    const Eigen::VectorXd e = g.g - f.g;
    const double sobolev = h * e.squaredNorm() + h * (D * e).squaredNorm();
    const double resid = norm(A.apply(x) - y);
    rep.loss_trace.push_back(0.5 * resid * resid + beta * sobolev);
    rep.residual_trace.push_back(resid);
    rep.iterations = k;
    if (k >= cfg.outer_iters) break;

    const Eigen::MatrixXd op_grad = ift_gradient(B, x, A, y, ew, alpha);
    Eigen::VectorXd grad = collapse_to_kernel(op_grad, len, h);
    grad += beta * (2.0 * h * e + 2.0 * h * (DtD * e));
    if (cfg.grad_tol > 0.0 && std::sqrt(h) * grad.norm() <= cfg.grad_tol) {
      rep.stop_reason = StopReason::converged;
      break;
    }
    g.g -= cfg.lr * grad;
    check_divergence(rep.loss_trace, "adp_beta_param_solve");
  }

  rep.solution = x;
  return {g, rep};
}

double bregman_distance(const Penalty& pen, const Signal& x_tilde, const Signal& x,
                        const Signal& v) {
  if (x_tilde.size() != x.size() || v.size() != x.size())
    throw std::invalid_argument("bregman_distance: size mismatch");

  // Membership probe: R(w) >= R(x) + <v, w - x> on a deterministic probe set.
  const double rx = penalty_value(pen, x);
  auto probe = [&](const Signal& w) {
    const double lhs = penalty_value(pen, w);
    const double rhs = rx + inner(v, w - x);
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    if (lhs - rhs < -1e-8 * scale)
      throw InvalidSubgradientError("bregman_distance: v fails the subgradient inequality");
  };
  probe(Signal::zeros(x.size(), x.interval()));
  probe(x_tilde);
  probe(x * 2.0);
  probe(-x);
  std::mt19937_64 rng(0xb9e6ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double nx = std::max(norm(x), 1.0);
  for (int rep = 0; rep < 12; ++rep) {
    Eigen::VectorXd w(x.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = gauss(rng);
    const double scale = (rep % 3 == 0 ? 0.1 : (rep % 3 == 1 ? 1.0 : 10.0)) * nx;
    probe(x.with_samples(x.samples() + scale * w));
  }

  return penalty_value(pen, x_tilde) - rx - inner(v, x_tilde - x);
}

}  // namespace adp
