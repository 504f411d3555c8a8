#include "adp/operators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace adp {

LinearOp make_integration_operator(Eigen::Index n, Interval interval) {
  if (n < 2) throw std::invalid_argument("make_integration_operator: grid size must be >= 2");
  const double h = interval.length() / static_cast<double>(n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) m(i, j) = h;
  return LinearOp(std::move(m), interval, interval);
}

KernelParam gaussian_kernel(double sigma, double h) {
  if (sigma <= 0.0) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  if (h <= 0.0) throw std::invalid_argument("gaussian_kernel: spacing must be positive");
  const auto radius = static_cast<Eigen::Index>(std::floor(4.0 * sigma / h));
  Eigen::VectorXd g(2 * radius + 1);
  for (Eigen::Index k = -radius; k <= radius; ++k) {
    const double t = static_cast<double>(k) * h;
    g[k + radius] = std::exp(-t * t / (2.0 * sigma * sigma));
  }
  g /= h * g.sum();  // unit discrete integral
  return KernelParam{std::move(g), h};
}

LinearOp make_kernel_operator(const KernelParam& kernel, Eigen::Index n, Interval interval) {
  if (n < 2) throw std::invalid_argument("make_kernel_operator: grid size must be >= 2");
  if (kernel.g.size() % 2 == 0)
    throw std::invalid_argument("make_kernel_operator: kernel length must be odd");
  const double h = interval.length() / static_cast<double>(n);
  if (std::abs(kernel.h - h) > 1e-12 * h)
    throw std::invalid_argument("make_kernel_operator: kernel spacing does not match grid");
  const Eigen::Index center = (kernel.g.size() - 1) / 2;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index off = i - j;
      if (off >= -center && off <= center) m(i, j) = h * kernel.g[off + center];
    }
  }
  return LinearOp(std::move(m), interval, interval);
}

LinearOp make_convolution_operator(Eigen::Index n, Interval interval, double sigma) {
  if (sigma <= 0.0)
    throw std::invalid_argument("make_convolution_operator: sigma must be positive");
  const double h = interval.length() / static_cast<double>(n);
  return make_kernel_operator(gaussian_kernel(sigma, h), n, interval);
}

double operator_norm(const LinearOp& op, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("operator_norm: tol must be positive");
  if (op.matrix().isZero(0.0)) return 0.0;

  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(op.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
  v.normalize();

  const Eigen::MatrixXd gram = op.normal_matrix();
  double sigma = 0.0;
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd w = gram * v;
    const double lambda = v.dot(w);  // Rayleigh quotient for Op*Op
    const double sigma_new = lambda > 0.0 ? std::sqrt(lambda) : 0.0;
    const double wn = w.norm();
    if (wn == 0.0) {  // start vector happened to lie in the kernel: redraw
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
      v.normalize();
      continue;
    }
    v = w / wn;
    if (it > 2 && std::abs(sigma_new - sigma) <= 0.5 * tol * std::max(sigma_new, 1e-300)) {
      return sigma_new;
    }
    sigma = sigma_new;
  }
  return sigma;
}

}  // namespace adp
