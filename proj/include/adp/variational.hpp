#pragma once

#include "adp/linear_op.hpp"
#include "adp/penalties.hpp"
#include "adp/signal.hpp"
#include "adp/solve_report.hpp"

namespace adp {

/// Inner minimizer x(B) = argmin_x 1/2 ||Bx - y||^2 + alpha R(x) by ISTA,
/// x <- prox_{lambda alpha R}(x - lambda B*(Bx - y)).
/// The objective trace is nonincreasing for the default step.
SolveReport x_of_b(const LinearOp& B, const Signal& y, const Penalty& pen, double alpha,
                   const IstaConfig& cfg = {}, const Signal* warm_start = nullptr);

/// Direct solve of (A*A + alpha_t I) x = A* y. alpha_t = 0 requires an
/// invertible normal matrix.
Signal tikhonov_l2_solve(const LinearOp& A, const Signal& y, double alpha_t);

/// Minimum-norm least squares solution via SVD.
Signal least_squares_min_norm(const LinearOp& A, const Signal& y);

/// Constrained problem min 1/2 ||Ax - y||^2 s.t. pairing(x) <= r, solved by
/// bisection over the Lagrange multiplier t of the penalized problem
/// min 1/2 ||Ax - y||^2 + t (a1 ||x||_1 + a2 ||x||^2). The report's
/// `multiplier` holds the located t (0 when the constraint is inactive).
SolveReport ivanov_solve(const LinearOp& A, const Signal& y, const Penalty& pen, double r,
                         double tol = 1e-6);

/// Exact minimizer over all operators B of 1/2 ||A x(B) - y||^2: equals
/// ivanov_solve with radius r = ||y||^2 / (4 alpha). Requires y != 0.
SolveReport adp_exact_solve(const LinearOp& A, const Signal& y, const Penalty& pen, double alpha,
                            double tol = 1e-6);

}  // namespace adp
