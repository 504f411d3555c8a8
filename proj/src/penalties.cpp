#include "adp/penalties.hpp"

#include <algorithm>
#include <cmath>

namespace adp {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double soft(double z, double t) {
  const double m = std::abs(z) - t;
  return m > 0.0 ? sign(z) * m : 0.0;
}

}  // namespace

double penalty_value(const Penalty& pen, const Signal& x) {
  const ElasticNet w = effective_weights(pen);
  const double n2 = norm(x);
  return w.alpha1 * norm1(x) + 0.5 * w.alpha2 * n2 * n2;
}

Signal prox(const Penalty& pen, const Signal& z, double step) {
  if (step <= 0.0) throw std::invalid_argument("prox: step must be positive");
  const ElasticNet w = effective_weights(pen);
  Eigen::VectorXd out(z.size());
  const double shrink = 1.0 + step * w.alpha2;
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = soft(z[i], step * w.alpha1) / shrink;
  return z.with_samples(std::move(out));
}

double pairing(const Penalty& pen, const Signal& x) {
  const ElasticNet w = effective_weights(pen);
  const double n2 = norm(x);
  return w.alpha1 * norm1(x) + w.alpha2 * n2 * n2;
}

Signal min_subgradient(const Penalty& pen, const Signal& x) {
  const ElasticNet w = effective_weights(pen);
  Eigen::VectorXd v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    v[i] = x[i] != 0.0 ? w.alpha1 * sign(x[i]) + w.alpha2 * x[i] : 0.0;
  return x.with_samples(std::move(v));
}

bool in_subdifferential(const Penalty& pen, const Signal& x, const Signal& v, double tol) {
  if (x.size() != v.size()) return false;
  const ElasticNet w = effective_weights(pen);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) {
      if (std::abs(v[i] - (w.alpha1 * sign(x[i]) + w.alpha2 * x[i])) > tol) return false;
    } else {
      if (std::abs(v[i]) > w.alpha1 + tol) return false;
    }
  }
  return true;
}

double subdifferential_distance(const Penalty& pen, const Signal& x, const Signal& w) {
  const ElasticNet ew = effective_weights(pen);
  Eigen::VectorXd d(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) {
      d[i] = w[i] - (ew.alpha1 * sign(x[i]) + ew.alpha2 * x[i]);
    } else {
      d[i] = std::max(0.0, std::abs(w[i]) - ew.alpha1);
    }
  }
  return std::sqrt(x.h()) * d.norm();
}

double nonconvex_demo_functional(double x1, double x2) {
  const double f1 = 3.0 * std::abs(x1 - 5.0);
  const double f2 = std::abs(x2);
  return f1 >= f2 ? f1 : f2;
}

}  // namespace adp
