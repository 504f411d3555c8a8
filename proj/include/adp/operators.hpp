#pragma once

#include <Eigen/Dense>

#include "adp/linear_op.hpp"
#include "adp/signal.hpp"

namespace adp {

/// Sampled convolution kernel on a centered grid with spacing h.
struct KernelParam {
  Eigen::VectorXd g;  // odd length, index (len-1)/2 is the kernel center
  double h = 1.0;
};

/// Cumulative integration x(s) |-> int_a^t x, left-endpoint rule: the matrix is
/// lower triangular with every nonzero entry equal to h.
LinearOp make_integration_operator(Eigen::Index n, Interval interval);

/// Gaussian kernel exp(-t^2 / (2 sigma^2)), truncated at +-4 sigma and
/// normalized to unit discrete integral.
KernelParam gaussian_kernel(double sigma, double h);

/// Discrete convolution with the sampled kernel, zero padding at the boundary.
/// Matrix entry (i,j) is h * g[i-j+center] for |i-j| <= center.
LinearOp make_kernel_operator(const KernelParam& kernel, Eigen::Index n, Interval interval);

LinearOp make_convolution_operator(Eigen::Index n, Interval interval, double sigma);

/// Largest singular value (with respect to the weighted norms) by power
/// iteration on Op* Op; deterministic start vector. Returns 0 for the zero
/// operator.
double operator_norm(const LinearOp& op, double tol = 1e-6);

}  // namespace adp
