#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "adp/adp_iterative.hpp"
#include "adp/errors.hpp"
#include "adp/operators.hpp"
#include "adp/variational.hpp"
#include "test_util.hpp"

using namespace adp;

namespace {

const IstaConfig kTightInner{std::nullopt, 1e-12, 600000};

double outer_loss(const LinearOp& A, const Signal& y, const Signal& x) {
  const double r = norm(A.apply(x) - y);
  return 0.5 * r * r;
}

double outer_loss_of_op(const Eigen::MatrixXd& bm, const LinearOp& A, const Signal& y,
                        const ElasticNet& pen, double alpha) {
  const LinearOp B(bm, A.domain(), A.codomain());
  const Signal x = x_of_b(B, y, pen, alpha, kTightInner).solution;
  return outer_loss(A, y, x);
}

/// Support stability margins: every active component clear of zero, every
/// inactive optimality slack clear of the l1 bound.
bool support_stable(const LinearOp& B, const Signal& x, const Signal& y, const ElasticNet& pen,
                    double alpha) {
  const Signal slack = B.apply_adjoint(B.apply(x) - y);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > 1e-10) {
      if (std::abs(x[i]) < 1e-3) return false;
    } else if (std::abs(slack[i]) > alpha * pen.alpha1 * 0.9) {
      return false;
    }
  }
  return true;
}

Eigen::MatrixXd fd_gradient(const Eigen::MatrixXd& bm, const LinearOp& A, const Signal& y,
                            const ElasticNet& pen, double alpha, double step) {
  Eigen::MatrixXd fd(bm.rows(), bm.cols());
  for (Eigen::Index i = 0; i < bm.rows(); ++i)
    for (Eigen::Index j = 0; j < bm.cols(); ++j) {
      Eigen::MatrixXd up = bm, dn = bm;
      up(i, j) += step;
      dn(i, j) -= step;
      fd(i, j) = (outer_loss_of_op(up, A, y, pen, alpha) -
                  outer_loss_of_op(dn, A, y, pen, alpha)) /
                 (2.0 * step);
    }
  return fd;
}

}  // namespace

TEST_CASE("zero outer residual gives the zero operator gradient") {
  auto g = testutil::rng(101);
  const LinearOp B = testutil::random_op(g, 10, 10);
  const LinearOp A = testutil::random_op(g, 10, 10);
  const Signal y = testutil::random_signal(g, 10);
  const ElasticNet pen(0.15, 0.5);
  const Signal x = x_of_b(B, y, pen, 1.0, kTightInner).solution;
  const Signal y_consistent = A.apply(x);  // outer data hit exactly
  const Eigen::MatrixXd grad = ift_gradient(B, x, A, y_consistent, pen, 1.0);
  CHECK(grad.norm() == 0.0);
}

TEST_CASE("operator gradient matches central finite differences") {
  auto g = testutil::rng(103);
  int done = 0;
  while (done < 6) {
    const Eigen::Index n = 15;
    const LinearOp B = testutil::random_op(g, n, n);
    const LinearOp A = testutil::random_op(g, n, n);
    const Signal y = testutil::random_signal(g, n);
    const ElasticNet pen(0.08, 0.6);
    const Signal x = x_of_b(B, y, pen, 1.0, kTightInner).solution;
    if (!support_stable(B, x, y, pen, 1.0)) continue;  // resample kink-adjacent instances
    const Eigen::MatrixXd grad = ift_gradient(B, x, A, y, pen, 1.0);
    const Eigen::MatrixXd fd = fd_gradient(B.matrix(), A, y, pen, 1.0, 1e-5);
    CHECK((grad - fd).norm() <= 1e-4 * std::max(1e-12, fd.norm()));
    ++done;
  }
}

TEST_CASE("smooth-case gradient matches the hand-derived diagonal formula") {
  auto g = testutil::rng(107);
  const Eigen::Index n = 7;
  const Interval iv{0.0, 1.0};
  const double h = iv.length() / n;
  Eigen::VectorXd bdiag = testutil::gaussian_vector(g, n).cwiseAbs().array() + 0.5;
  const LinearOp B(bdiag.asDiagonal().toDenseMatrix(), iv, iv);
  const LinearOp A = testutil::random_op(g, n, n, iv);
  const Signal y = testutil::random_signal(g, n, iv);
  const ElasticNet pen(0.0, 1.0);
  const double alpha = 0.6;

  const Signal x = x_of_b(B, y, pen, alpha, kTightInner).solution;
  const Eigen::MatrixXd grad = ift_gradient(B, x, A, y, pen, alpha);

  // scalar chain: x_i = b_i y_i/(b_i^2 + alpha), H = diag(b_i^2 + alpha),
  // g = H^{-1} A*(Ax - y), dL/dB_pq = -h (rho_p g_q + b_p g_p x_q)
  const Eigen::VectorXd q = A.apply_adjoint(A.apply(x) - y).samples();
  Eigen::VectorXd gs(n);
  for (Eigen::Index i = 0; i < n; ++i) gs[i] = q[i] / (bdiag[i] * bdiag[i] + alpha);
  Eigen::MatrixXd expected(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    const double rho_p = bdiag[p] * x[p] - y[p];
    for (Eigen::Index qi = 0; qi < n; ++qi)
      expected(p, qi) = -h * (rho_p * gs[qi] + bdiag[p] * gs[p] * x[qi]);
  }
  CHECK((grad - expected).norm() <= 1e-8 * std::max(1.0, expected.norm()));
}

TEST_CASE("column-deficient support without strong convexity is rejected") {
  const Interval iv{0.0, 1.0};
  Eigen::MatrixXd bm = Eigen::MatrixXd::Zero(4, 4);
  bm.col(0) << 1.0, 1.0, 0.0, 0.0;
  bm.col(1) = bm.col(0);  // dependent columns on the support
  const LinearOp B(bm, iv, iv);
  const LinearOp A(Eigen::MatrixXd::Identity(4, 4), iv, iv);
  Eigen::VectorXd xs(4);
  xs << 1.0, -1.0, 0.0, 0.0;
  const Signal x(xs, iv);
  auto g = testutil::rng(109);
  const Signal y = testutil::random_signal(g, 4, iv);
  CHECK_THROWS_AS(ift_gradient(B, x, A, y, ElasticNet(0.5, 0.0), 1.0), SingularSystemError);
}

TEST_CASE("outer iteration starts from the inner solution of A") {
  auto g = testutil::rng(113);
  const LinearOp A = make_integration_operator(24, {0.0, 1.0});
  const Signal y = testutil::random_signal(g, 24);
  AdpProblem problem{A, y, SquaredL2{}, 0.4, 0.0, std::nullopt};
  IftConfig cfg;
  cfg.outer_iters = 0;
  const SolveReport rep = adp_ift_solve(problem, cfg);
  CHECK(norm(rep.solution - tikhonov_l2_solve(A, y, 0.4)) <= 1e-10);
  CHECK(rep.iterations == 0);
}

TEST_CASE("dominant proximity weight pins the operator to A") {
  auto g = testutil::rng(127);
  const LinearOp A = make_integration_operator(16, {0.0, 1.0});
  const Signal y = testutil::random_signal(g, 16);
  AdpProblem problem{A, y, SquaredL2{}, 0.3, 1e6, std::nullopt};
  IftConfig cfg;
  cfg.lr = 4e-7;
  cfg.outer_iters = 120;
  Eigen::MatrixXd last_b;
  const SolveReport rep = adp_ift_solve(problem, cfg, nullptr,
                                        [&](long, const Signal&, const LinearOp& B) {
                                          last_b = B.matrix();
                                        });
  CHECK((last_b - A.matrix()).norm() <= 1e-3);
  CHECK(norm(rep.solution - tikhonov_l2_solve(A, y, 0.3)) <= 1e-3);
}

TEST_CASE("long gradient descent approaches the exact minimum") {
  const LinearOp A = make_integration_operator(20, {0.0, 1.0});
  const Signal truth =
      Signal::from_function([](double t) { return std::sin(3.0 * t); }, 20, {0.0, 1.0});
  const Signal y = A.apply(truth);
  const double alpha = 0.05;
  AdpProblem problem{A, y, SquaredL2{}, alpha, 0.0, std::nullopt};
  IftConfig cfg;
  cfg.lr = 3.0;
  cfg.outer_iters = 4000;
  const SolveReport gd = adp_ift_solve(problem, cfg);
  const SolveReport exact = adp_exact_solve(A, y, SquaredL2{}, alpha, 1e-10);
  CHECK(std::abs(gd.loss_trace.back() - outer_loss(A, y, exact.solution)) <= 1e-4);
}

TEST_CASE("descent is monotone for small steps, with and without the proximity term") {
  auto g = testutil::rng(131);
  const LinearOp A = make_integration_operator(20, {0.0, 1.0});
  const Signal y = testutil::random_signal(g, 20);
  for (double beta : {0.0, 0.05}) {
    AdpProblem problem{A, y, ElasticNet(0.01, 0.3), 1.0, beta, std::nullopt};
    IftConfig cfg;
    cfg.lr = 0.05;
    cfg.outer_iters = 100;
    cfg.inner.tol = 1e-13;
    const SolveReport rep = adp_ift_solve(problem, cfg);
    // slack covers the inexactness of the warm-started inner solves
    for (std::size_t k = 1; k < rep.loss_trace.size(); ++k)
      CHECK(rep.loss_trace[k] <=
            rep.loss_trace[k - 1] + 1e-10 * std::max(1.0, rep.loss_trace[k - 1]));
  }
}

TEST_CASE("solution norm grows from the start toward the limit") {
  const LinearOp A = make_integration_operator(24, {0.0, 1.0});
  const Signal truth =
      Signal::from_function([](double t) { return 1.0 - std::abs(2.0 * t - 1.0); }, 24, {0.0, 1.0});
  const Signal y = A.apply(truth);
  AdpProblem problem{A, y, SquaredL2{}, 0.08, 0.0, std::nullopt};
  IftConfig cfg;
  cfg.lr = 1.0;
  cfg.outer_iters = 600;
  std::vector<double> norms;
  adp_ift_solve(problem, cfg, nullptr,
                [&](long, const Signal& xk, const LinearOp&) { norms.push_back(norm(xk)); });
  for (std::size_t k = 1; k < norms.size(); ++k) CHECK(norms[k] >= norms[k - 1] - 1e-10);
}

TEST_CASE("discrepancy rule stops the iteration early") {
  const LinearOp A = make_integration_operator(24, {0.0, 1.0});
  const Signal truth =
      Signal::from_function([](double t) { return std::sin(6.28 * t); }, 24, {0.0, 1.0});
  const Signal y = A.apply(truth);
  AdpProblem problem{A, y, SquaredL2{}, 0.05, 0.0, std::nullopt};
  // a level between the start residual and the long-run limit residual
  const double limit_resid =
      norm(A.apply(adp_exact_solve(A, y, SquaredL2{}, 0.05, 1e-9).solution) - y);
  const double delta = 2.0 * limit_resid;
  IftConfig cfg;
  cfg.lr = 2.0;
  cfg.outer_iters = 2000;
  cfg.discrepancy = DiscrepancyStop{1.1, delta};
  const SolveReport rep = adp_ift_solve(problem, cfg);
  CHECK(rep.stop_reason == StopReason::early_stopped);
  CHECK(rep.residual_trace.back() <= 1.1 * delta);
  CHECK(rep.iterations < 2000);

  cfg.discrepancy.reset();
  cfg.fixed_stop_iter = 7;
  const SolveReport fixed = adp_ift_solve(problem, cfg);
  CHECK(fixed.stop_reason == StopReason::early_stopped);
  CHECK(fixed.iterations == 7);
}

TEST_CASE("kernel solve keeps the kernel at f for overwhelming beta") {
  const Eigen::Index n = 40;
  const Interval iv{0.0, 1.0};
  const double h = iv.length() / n;
  const KernelParam f = gaussian_kernel(0.04, h);
  const LinearOp A = make_kernel_operator(f, n, iv);
  const Signal truth = Signal::from_function([](double t) { return t < 0.5 ? 1.0 : 0.0; }, n, iv);
  const Signal y = A.apply(truth);
  IftConfig cfg;
  cfg.lr = 1e-11;  // the Sobolev term needs lr < 1/(beta h (1 + 4/h^2))
  cfg.outer_iters = 60;
  const auto [gk, rep] = adp_beta_param_solve(f, y, SquaredL2{}, 0.05, 1e8, cfg);
  CHECK(std::sqrt(h) * (gk.g - f.g).norm() <= 1e-6);
}

TEST_CASE("kernel data-term gradient matches finite differences") {
  const Eigen::Index n = 24;
  const Interval iv{0.0, 1.0};
  const double h = iv.length() / n;
  const KernelParam f = gaussian_kernel(0.05, h);
  auto g = testutil::rng(137);
  KernelParam gk = f;
  gk.g += 0.1 * testutil::gaussian_vector(g, f.g.size());
  const Signal truth = Signal::from_function([](double t) { return std::sin(6.0 * t); }, n, iv);
  const Signal y = make_kernel_operator(f, n, iv).apply(truth);
  const double alpha = 0.1;

  const Eigen::VectorXd grad = param_data_gradient(f, gk, y, SquaredL2{}, alpha, kTightInner);
  const LinearOp A = make_kernel_operator(f, n, iv);
  auto data_term = [&](const KernelParam& kp) {
    const LinearOp B = make_kernel_operator(kp, n, iv);
    Eigen::MatrixXd normal = B.normal_matrix();
    normal.diagonal().array() += alpha;
    const Signal x(Eigen::LLT<Eigen::MatrixXd>(normal).solve(B.apply_adjoint(y).samples()), iv);
    return outer_loss(A, y, x);
  };
  Eigen::VectorXd fd(f.g.size());
  for (Eigen::Index m = 0; m < f.g.size(); ++m) {
    KernelParam up = gk, dn = gk;
    up.g[m] += 1e-6;
    dn.g[m] -= 1e-6;
    fd[m] = (data_term(up) - data_term(dn)) / 2e-6;
  }
  CHECK((grad - fd).norm() <= 1e-4 * std::max(1e-12, fd.norm()));
}

TEST_CASE("kernel descent loss is nonincreasing at a tuned step") {
  const Eigen::Index n = 32;
  const Interval iv{0.0, 1.0};
  const KernelParam f = gaussian_kernel(0.05, iv.length() / n);
  const LinearOp A = make_kernel_operator(f, n, iv);
  const Signal truth = Signal::from_function([](double t) { return t * (1.0 - t); }, n, iv);
  const Signal y = A.apply(truth);
  IftConfig cfg;
  cfg.lr = 1e-4;
  cfg.outer_iters = 80;
  const auto [gk, rep] = adp_beta_param_solve(f, y, SquaredL2{}, 0.02, 0.5, cfg);
  for (std::size_t k = 1; k < rep.loss_trace.size(); ++k)
    CHECK(rep.loss_trace[k] <= rep.loss_trace[k - 1] + 1e-12);
}

TEST_CASE("Bregman distance identities") {
  auto g = testutil::rng(139);
  const Signal x = testutil::random_signal(g, 11);
  const Signal v = min_subgradient(SquaredL2{}, x);
  CHECK(bregman_distance(SquaredL2{}, x, x, v) == 0.0);

  const Signal xt = testutil::random_signal(g, 11);
  const double expected = 0.5 * std::pow(norm(xt - x), 2);
  CHECK(bregman_distance(SquaredL2{}, xt, x, v) == doctest::Approx(expected).epsilon(1e-10));

  for (int rep = 0; rep < 20; ++rep) {
    const Signal a = testutil::sparse_signal(g, 11, 0.8);
    const Signal b = testutil::random_signal(g, 11);
    const Penalty pen = ElasticNet(0.4, 0.7);
    CHECK(bregman_distance(pen, b, a, min_subgradient(pen, a)) >= -1e-12);
  }
}

TEST_CASE("Bregman distance rejects vectors that are not subgradients") {
  auto g = testutil::rng(149);
  const Signal x = testutil::random_signal(g, 9);
  const Signal xt = testutil::random_signal(g, 9);
  const Signal bad = x * 2.0 + Signal(Eigen::VectorXd::Constant(9, 5.0), x.interval());
  CHECK_THROWS_AS(bregman_distance(SquaredL2{}, xt, x, bad), InvalidSubgradientError);
}
