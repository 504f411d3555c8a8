#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <utility>

#include "adp/linear_op.hpp"
#include "adp/operators.hpp"
#include "adp/penalties.hpp"
#include "adp/signal.hpp"
#include "adp/solve_report.hpp"

namespace adp {

/// Discrepancy-principle early stopping: stop once ||A x(B_k) - y|| <= tau * delta.
struct DiscrepancyStop {
  double tau = 1.1;  // must be > 1
  double delta = 0.0;
};

struct IftConfig {
  double lr = 1e-2;
  long outer_iters = 200;
  IstaConfig inner;
  std::optional<DiscrepancyStop> discrepancy;
  std::optional<long> fixed_stop_iter;
  double grad_tol = 0.0;  // 0 disables the gradient-based convergence stop
};

/// Observer invoked once per outer iterate with (k, x(B_k), B_k).
using IterateCallback = std::function<void(long, const Signal&, const LinearOp&)>;

/// Gradient of L(B) = 1/2 ||A x(B) - y||^2 with respect to the entries of B,
/// computed by the adjoint method on the frozen support of the fixed point x.
/// Entry (i,j) holds dL/dB_ij.
Eigen::MatrixXd ift_gradient(const LinearOp& B, const Signal& x, const LinearOp& A,
                             const Signal& y, const ElasticNet& pen, double alpha);

/// Gradient descent over the operator B (started at B0, default A), inner
/// minimizer recomputed each step; optional proximity term beta ||B - A||^2
/// adds 2 beta (B - A) to the update. Returns x(B_k) at termination.
SolveReport adp_ift_solve(const AdpProblem& problem, const IftConfig& cfg,
                          const LinearOp* B0 = nullptr, const IterateCallback& on_iterate = {});

/// Parametrized variant over convolution kernels: gradient descent on the
/// kernel g (started at f) of
///   1/2 ||T(f, x_g) - y||^2 + beta (||f-g||^2 + ||D(f-g)||^2),
/// x_g the inner minimizer for the operator built from g, D forward
/// differences. Returns the final kernel and the solve report for x_g.
std::pair<KernelParam, SolveReport> adp_beta_param_solve(const KernelParam& f, const Signal& y,
                                                         const Penalty& pen, double alpha,
                                                         double beta, const IftConfig& cfg);

/// Entrywise gradient of only the data term 1/2 ||T(f, x_g) - y||^2 with
/// respect to the kernel samples g (chain rule through the convolution
/// parametrization); exposed for derivative checks.
Eigen::VectorXd param_data_gradient(const KernelParam& f, const KernelParam& g, const Signal& y,
                                    const Penalty& pen, double alpha, const IstaConfig& inner);

/// Bregman distance R(x_tilde) - R(x) - <v, x_tilde - x> for v in dR(x);
/// membership is checked by the subgradient inequality on a probe set.
double bregman_distance(const Penalty& pen, const Signal& x_tilde, const Signal& x,
                        const Signal& v);

}  // namespace adp
