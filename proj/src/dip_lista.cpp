#include "adp/dip_lista.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "adp/errors.hpp"
#include "adp/operators.hpp"

namespace adp {

namespace {

double soft(double z, double t) {
  const double m = std::abs(z) - t;
  return m > 0.0 ? (z > 0.0 ? m : -m) : 0.0;
}

void check_divergence(const std::vector<double>& trace, const char* who) {
  const std::size_t n = trace.size();
  if (n < 11) return;
  for (std::size_t k = n - 10; k < n; ++k)
    if (trace[k] <= trace[k - 1]) return;
  std::ostringstream msg;
  msg << who << ": loss increased over 10 consecutive steps; reduce the learning rate";
  throw DivergenceError(msg.str());
}

}  // namespace

ListaNet make_lista_net(const LinearOp& B, long depth, const ElasticNet& pen, double alpha,
                        std::optional<double> step) {
  if (depth < 1) throw std::invalid_argument("make_lista_net: depth must be >= 1");
  if (alpha <= 0.0) throw std::invalid_argument("make_lista_net: alpha must be positive");
  const double nb = operator_norm(B, 1e-6);
  double lam;
  if (step) {
    lam = *step;
    if (lam <= 0.0 || (nb > 0.0 && lam >= 2.0 / (nb * nb)))
      throw std::invalid_argument("make_lista_net: step outside (0, 2/||B||^2)");
  } else {
    const double lipschitz = nb * nb + alpha * pen.alpha2;
    lam = lipschitz > 0.0 ? 0.999 / lipschitz : 1.0;
  }
  return ListaNet{B, depth, lam, pen, alpha};
}

Signal lista_forward(const ListaNet& net, const Signal& z, const Signal& y) {
  const double lam = net.step;
  const double l1_thresh = lam * net.alpha * net.pen.alpha1;
  const double l2_step = lam * net.alpha * net.pen.alpha2;
  Signal x = z;
  for (long l = 0; l < net.depth; ++l) {
    const Signal grad = net.B.apply_adjoint(net.B.apply(x) - y);
    Eigen::VectorXd pre = x.samples() - lam * grad.samples() - l2_step * x.samples();
    for (Eigen::Index i = 0; i < pre.size(); ++i) pre[i] = soft(pre[i], l1_thresh);
    x = x.with_samples(std::move(pre));
  }
  return x;
}

Eigen::MatrixXd lista_backward(const ListaNet& net, const Signal& z, const Signal& y,
                               const LinearOp& A) {
  const Eigen::MatrixXd& B = net.B.matrix();
  const double c = net.B.h_out() / net.B.h_in();  // adjoint weight
  const double lam = net.step;
  const double l1_thresh = lam * net.alpha * net.pen.alpha1;
  const double l2_factor = 1.0 - lam * net.alpha * net.pen.alpha2;

  const double l2_step = lam * net.alpha * net.pen.alpha2;

  // Forward pass, keeping layer inputs and pre-activations.
  std::vector<Eigen::VectorXd> xs(net.depth + 1);
  std::vector<Eigen::VectorXd> pre(net.depth);
  xs[0] = z.samples();
  for (long l = 0; l < net.depth; ++l) {
    const Eigen::VectorXd gradv = c * (B.transpose() * (B * xs[l] - y.samples()));
    pre[l] = xs[l] - lam * gradv - l2_step * xs[l];
    Eigen::VectorXd nxt = pre[l];
    for (Eigen::Index i = 0; i < nxt.size(); ++i) nxt[i] = soft(nxt[i], l1_thresh);
    xs[l + 1] = std::move(nxt);
  }

  // dLoss/dx^L, entrywise: h_out * A^T (A x - y).
  Eigen::VectorXd p =
      A.h_out() * (A.matrix().transpose() * (A.matrix() * xs[net.depth] - y.samples()));
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(B.rows(), B.cols());
  for (long l = net.depth - 1; l >= 0; --l) {
    Eigen::VectorXd w = p;
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (std::abs(pre[l][i]) <= l1_thresh) w[i] = 0.0;
    const Eigen::VectorXd rho = B * xs[l] - y.samples();
    grad.noalias() += -lam * c * (rho * w.transpose() + (B * w) * xs[l].transpose());
    p = l2_factor * w - lam * c * (B.transpose() * (B * w));
  }
  return grad;
}

Signal default_net_input(Eigen::Index n, Interval interval, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = uni(rng);
  return Signal(std::move(v), interval);
}

SolveReport dip_lista_solve(const AdpProblem& problem, long depth, double lr, long iters,
                            const Signal& z0, const LinearOp* B0,
                            const IterateCallback& on_iterate) {
  if (lr < 0.0) throw std::invalid_argument("dip_lista_solve: negative learning rate");
  const ElasticNet pen = effective_weights(problem.pen);
  ListaNet net = make_lista_net(B0 ? *B0 : problem.A, depth, pen, problem.alpha);

  SolveReport rep;
  rep.stop_reason = StopReason::max_iter;
  Signal out = z0;
  for (long k = 0;; ++k) {
    out = lista_forward(net, z0, problem.y);
    const double resid = norm(problem.A.apply(out) - problem.y);
    rep.loss_trace.push_back(0.5 * resid * resid);
    rep.residual_trace.push_back(resid);
    rep.iterations = k;
    if (on_iterate) on_iterate(k, out, net.B);
    if (k >= iters) break;
    const Eigen::MatrixXd grad = lista_backward(net, z0, problem.y, problem.A);
    net.B.matrix() -= lr * grad;
    check_divergence(rep.loss_trace, "dip_lista_solve");
  }
  rep.solution = out;
  return rep;
}

SolveReport dip_lista_inf_solve(const AdpProblem& problem, double lr, long iters,
                                const Signal& z0, const LinearOp* B0, long block_depth,
                                const IterateCallback& on_iterate) {
  if (lr < 0.0) throw std::invalid_argument("dip_lista_inf_solve: negative learning rate");
  const ElasticNet pen = effective_weights(problem.pen);
  ListaNet net = make_lista_net(B0 ? *B0 : problem.A, block_depth, pen, problem.alpha);

  SolveReport rep;
  rep.stop_reason = StopReason::max_iter;
  Signal z = z0;
  for (long k = 0;; ++k) {
    const Signal out = lista_forward(net, z, problem.y);
    const double resid = norm(problem.A.apply(out) - problem.y);
    rep.loss_trace.push_back(0.5 * resid * resid);
    rep.residual_trace.push_back(resid);
    rep.iterations = k;
    if (k >= iters) {
      z = out;
      if (on_iterate) on_iterate(k, z, net.B);
      break;
    }
    if (lr > 0.0) {
      const Eigen::MatrixXd grad = lista_backward(net, z, problem.y, problem.A);
      net.B.matrix() -= lr * grad;
    }
    z = out;
    if (on_iterate) on_iterate(k, z, net.B);
    check_divergence(rep.loss_trace, "dip_lista_inf_solve");
  }
  rep.solution = z;
  return rep;
}

}  // namespace adp
