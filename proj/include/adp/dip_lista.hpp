#pragma once

#include <Eigen/Dense>
#include <optional>

#include "adp/adp_iterative.hpp"
#include "adp/linear_op.hpp"
#include "adp/penalties.hpp"
#include "adp/signal.hpp"
#include "adp/solve_report.hpp"

namespace adp {

/// Unrolled shrinkage network with one shared operator B: every layer maps
///   x <- soft_threshold(x - step B*(Bx - y) - step alpha a2 x, step alpha a1),
/// the gradient of the l2 part being taken before the activation.
struct ListaNet {
  LinearOp B;
  long depth = 10;
  double step = 0.0;
  ElasticNet pen;
  double alpha = 1.0;
};

/// Builds a net and validates depth >= 1 and step < 2/||B||^2. Default step
/// 0.999 / (||B||^2 + alpha a2), the contraction-safe choice for this layer.
ListaNet make_lista_net(const LinearOp& B, long depth, const ElasticNet& pen, double alpha,
                        std::optional<double> step = std::nullopt);

Signal lista_forward(const ListaNet& net, const Signal& z, const Signal& y);

/// Reverse-mode gradient of 1/2 ||A lista_forward(z) - y||^2 with respect to
/// the entries of the shared B; the soft-threshold derivative is 1 strictly
/// beyond the kink and 0 otherwise.
Eigen::MatrixXd lista_backward(const ListaNet& net, const Signal& z, const Signal& y,
                               const LinearOp& A);

/// Seeded componentwise-uniform[0,1] network input.
Signal default_net_input(Eigen::Index n, Interval interval, std::uint64_t seed);

/// Gradient descent on B with the network input held fixed at z0.
SolveReport dip_lista_solve(const AdpProblem& problem, long depth, double lr, long iters,
                            const Signal& z0, const LinearOp* B0 = nullptr,
                            const IterateCallback& on_iterate = {});

/// Growing-depth scheme: each step feeds the previous output back as input,
/// z_{k+1} = net_{B_k}(z_k), and backpropagates through the last block only.
SolveReport dip_lista_inf_solve(const AdpProblem& problem, double lr, long iters,
                                const Signal& z0, const LinearOp* B0 = nullptr,
                                long block_depth = 10, const IterateCallback& on_iterate = {});

}  // namespace adp
