#pragma once

#include <array>

#include "adp/linear_op.hpp"
#include "adp/penalties.hpp"
#include "adp/signal.hpp"

namespace adp {

struct FeasibilityResult {
  bool feasible = false;
  double margin = 0.0;  // ||y||^2/4 - alpha * pairing(xhat)
};

/// Can some linear operator make xhat the regularized minimizer for data y?
/// Feasible iff alpha * pairing(xhat) <= ||y||^2 / 4.
FeasibilityResult feasibility_check(const Signal& xhat, const Penalty& pen, double alpha,
                                    const Signal& y);

/// Operator of the form  B x = (sigma1 <x, xhat> + sigma2 <x, v_perp>) y,
/// built so that -B*(B xhat - y) = alpha v for a chosen v in dR(xhat).
struct ConstructedOp {
  Signal xhat;
  Signal v_perp;
  Signal y;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  LinearOp materialize() const;
};

/// Solves the coefficient equations for sigma1 (minus root, with the plus root
/// as fallback) and sigma2. Throws InfeasibleError when the pairing bound is
/// violated and InvalidSubgradientError when v is not in dR(xhat).
ConstructedOp construct_optimal_op(const Signal& xhat, const Signal& v, const Signal& y,
                                   const Penalty& pen, double alpha);

struct MinimizerCheck {
  double residual = 0.0;       // distance of -B*(B xhat - y)/alpha to dR(xhat)
  double ista_distance = 0.0;  // ||x(B) - xhat||
};

MinimizerCheck verify_minimizer(const LinearOp& B, const Signal& xhat, const Signal& y,
                                const Penalty& pen, double alpha);

/// For a squared-l2 solution x_adp of the constrained problem, locates the
/// penalty weight whose direct solution matches it, by bisection on the
/// monotone map alpha |-> ||x_alpha||.
double equivalent_tikhonov_parameter(const LinearOp& A, const Signal& y, const Signal& x_adp);

/// Minimal-subgradient pairing of the two-dimensional demo functional.
double nonconvex_demo_pairing(double x1, double x2);

/// Two points satisfying pairing <= level whose midpoint violates it, found by
/// grid search over [0,10]^2: a certificate that the feasible set is not convex.
struct NonconvexDemo {
  std::array<double, 2> a{};
  std::array<double, 2> b{};
  std::array<double, 2> midpoint{};
  double level = 0.0;
  double pairing_a = 0.0;
  double pairing_b = 0.0;
  double pairing_mid = 0.0;
};

NonconvexDemo nonconvex_feasibility_demo();

}  // namespace adp
