#include "adp/constructions.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "adp/errors.hpp"
#include "adp/variational.hpp"

namespace adp {

FeasibilityResult feasibility_check(const Signal& xhat, const Penalty& pen, double alpha,
                                    const Signal& y) {
  if (alpha <= 0.0) throw std::invalid_argument("feasibility_check: alpha must be positive");
  const double ny = norm(y);
  if (ny == 0.0) throw std::invalid_argument("feasibility_check: y must be nonzero");
  const double margin = ny * ny / 4.0 - alpha * pairing(pen, xhat);
  return FeasibilityResult{margin >= 0.0, margin};
}

LinearOp ConstructedOp::materialize() const {
  const Eigen::VectorXd dir = sigma1 * xhat.samples() + sigma2 * v_perp.samples();
  Eigen::MatrixXd m = y.samples() * (xhat.h() * dir).transpose();
  return LinearOp(std::move(m), xhat.interval(), y.interval());
}

ConstructedOp construct_optimal_op(const Signal& xhat, const Signal& v, const Signal& y,
                                   const Penalty& pen, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("construct_optimal_op: alpha must be positive");
  const double ny2 = norm(y) * norm(y);
  if (ny2 == 0.0) throw std::invalid_argument("construct_optimal_op: y must be nonzero");
  if (!in_subdifferential(pen, xhat, v))
    throw InvalidSubgradientError("construct_optimal_op: v is not a subgradient at xhat");

  const double vx = inner(v, xhat);
  if (alpha * vx > ny2 / 4.0) {
    std::ostringstream msg;
    msg << "construct_optimal_op: alpha*<v,x> = " << alpha * vx << " exceeds ||y||^2/4 = "
        << ny2 / 4.0 << "; no linear operator makes xhat the minimizer";
    throw InfeasibleError(msg.str());
  }

  const double nx2 = norm(xhat) * norm(xhat);
  if (nx2 == 0.0) {
    // xhat = 0: the zero operator works whenever 0 is a subgradient at 0.
    if (!in_subdifferential(pen, xhat, Signal::zeros(xhat.size(), xhat.interval())))
      throw InvalidSubgradientError("construct_optimal_op: 0 not in dR(0)");
    return ConstructedOp{xhat, Signal::zeros(xhat.size(), xhat.interval()), y, 0.0, 0.0};
  }

  const double mu = vx / nx2;
  const Signal v_perp = v - mu * xhat;

  const double disc = 1.0 / (4.0 * nx2 * nx2) - alpha * mu / (nx2 * ny2);
  const double root = std::sqrt(std::max(disc, 0.0));
  double sigma1 = 1.0 / (2.0 * nx2) - root;
  if (std::abs(1.0 - sigma1 * nx2) < 1e-14) sigma1 = 1.0 / (2.0 * nx2) + root;
  const double denom = ny2 * (1.0 - sigma1 * nx2);
  const double sigma2 = alpha / denom;
  return ConstructedOp{xhat, v_perp, y, sigma1, sigma2};
}

MinimizerCheck verify_minimizer(const LinearOp& B, const Signal& xhat, const Signal& y,
                                const Penalty& pen, double alpha) {
  const Signal w = -1.0 / alpha * B.apply_adjoint(B.apply(xhat) - y);
  MinimizerCheck out;
  out.residual = subdifferential_distance(pen, xhat, w);
  const SolveReport rep = x_of_b(B, y, pen, alpha, IstaConfig{std::nullopt, 1e-9, 200000});
  out.ista_distance = norm(rep.solution - xhat);
  return out;
}

double equivalent_tikhonov_parameter(const LinearOp& A, const Signal& y, const Signal& x_adp) {
  const double target = norm(x_adp);
  const double n0 = norm(least_squares_min_norm(A, y));
  if (target > n0 * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "equivalent_tikhonov_parameter: ||x_adp|| = " << target
        << " exceeds the unpenalized solution norm " << n0;
    throw NoConvergenceError(msg.str());
  }
  if (target >= n0 * (1.0 - 1e-12)) return 0.0;

  double hi = 1e-8;
  while (norm(tikhonov_l2_solve(A, y, hi)) > target) {
    hi *= 2.0;
    if (hi > 1e16)
      throw NoConvergenceError("equivalent_tikhonov_parameter: no bracket below 1e16");
  }
  double lo = hi > 1e-8 ? hi / 2.0 : 0.0;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double nm = norm(tikhonov_l2_solve(A, y, mid));
    if (std::abs(nm - target) <= 1e-13 * std::max(target, 1.0)) return mid;
    if (nm > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double nonconvex_demo_pairing(double x1, double x2) {
  const double f1 = 3.0 * std::abs(x1 - 5.0);
  const double f2 = std::abs(x2);
  // Gradients of the active pieces; at ties the subdifferential is the hull of
  // the listed vertices and <v,x> attains its minimum at one of them.
  std::vector<std::array<double, 2>> vertices;
  if (f1 >= f2) {
    if (x1 != 5.0) {
      vertices.push_back({x1 > 5.0 ? 3.0 : -3.0, 0.0});
    } else {
      vertices.push_back({3.0, 0.0});
      vertices.push_back({-3.0, 0.0});
    }
  }
  if (f2 >= f1) {
    if (x2 != 0.0) {
      vertices.push_back({0.0, x2 > 0.0 ? 1.0 : -1.0});
    } else {
      vertices.push_back({0.0, 1.0});
      vertices.push_back({0.0, -1.0});
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) best = std::min(best, v[0] * x1 + v[1] * x2);
  return best;
}

namespace {

NonconvexDemo nonconvexity_search(double step) {
  const int m = static_cast<int>(std::lround(10.0 / step)) + 1;
  std::vector<double> q(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) q[static_cast<std::size_t>(i) * m + j] =
        nonconvex_demo_pairing(i * step, j * step);

  NonconvexDemo best;
  double best_gap = 0.0;
  for (int ia = 0; ia < m; ++ia)
    for (int ja = 0; ja < m; ++ja) {
      const double qa = q[static_cast<std::size_t>(ia) * m + ja];
      for (int ib = ia; ib < m; ++ib)
        for (int jb = 0; jb < m; ++jb) {
          const double qb = q[static_cast<std::size_t>(ib) * m + jb];
          const double mx = 0.5 * (ia + ib) * step;
          const double my = 0.5 * (ja + jb) * step;
          const double qm = nonconvex_demo_pairing(mx, my);
          const double gap = qm - std::max(qa, qb);
          if (gap > best_gap) {
            best_gap = gap;
            best.a = {ia * step, ja * step};
            best.b = {ib * step, jb * step};
            best.midpoint = {mx, my};
            best.pairing_a = qa;
            best.pairing_b = qb;
            best.pairing_mid = qm;
          }
        }
    }
  best.level = 0.5 * (std::max(best.pairing_a, best.pairing_b) + best.pairing_mid);
  return best;
}

}  // namespace

NonconvexDemo nonconvex_feasibility_demo() { return nonconvexity_search(0.5); }

}  // namespace adp
