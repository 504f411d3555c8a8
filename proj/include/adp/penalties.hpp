#pragma once

#include <stdexcept>
#include <variant>

#include "adp/signal.hpp"

namespace adp {

/// Elastic net R(x) = alpha1 ||x||_1 + (alpha2/2) ||x||^2.
struct ElasticNet {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  ElasticNet(double a1, double a2) : alpha1(a1), alpha2(a2) {
    if (a1 < 0.0 || a2 < 0.0) throw std::invalid_argument("ElasticNet: negative weight");
    if (a1 + a2 <= 0.0) throw std::invalid_argument("ElasticNet: weights must not both vanish");
  }
  bool strongly_convex() const { return alpha2 > 0.0; }
};

/// R(x) = 1/2 ||x||^2.
struct SquaredL2 {};

using Penalty = std::variant<SquaredL2, ElasticNet>;

/// Every operation on SquaredL2 coincides with ElasticNet(0, 1).
inline ElasticNet effective_weights(const Penalty& pen) {
  if (std::holds_alternative<SquaredL2>(pen)) return ElasticNet(0.0, 1.0);
  return std::get<ElasticNet>(pen);
}

double penalty_value(const Penalty& pen, const Signal& x);

/// prox_{step R}(z): componentwise soft threshold then shrink,
/// sign(z) max(|z| - step a1, 0) / (1 + step a2).
Signal prox(const Penalty& pen, const Signal& z, double step);

/// Minimal-subgradient pairing min_{v in dR(x)} <v, x> = a1 ||x||_1 + a2 ||x||^2.
double pairing(const Penalty& pen, const Signal& x);

/// The subgradient attaining the pairing: v_i = a1 sign(x_i) + a2 x_i, 0 at kinks.
Signal min_subgradient(const Penalty& pen, const Signal& x);

/// Componentwise membership test for v in dR(x).
bool in_subdifferential(const Penalty& pen, const Signal& x, const Signal& v, double tol = 1e-9);

/// Weighted L2 distance from w to dR(x) (componentwise projection).
double subdifferential_distance(const Penalty& pen, const Signal& x, const Signal& w);

/// Two-dimensional functional max(3|x1-5|, |x2|); its minimal-subgradient
/// pairing defines a non-convex feasible set (demo only, no prox).
double nonconvex_demo_functional(double x1, double x2);

}  // namespace adp
