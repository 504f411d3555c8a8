#pragma once

#include <optional>
#include <vector>

#include "adp/linear_op.hpp"
#include "adp/penalties.hpp"
#include "adp/signal.hpp"

namespace adp {

enum class StopReason { converged, max_iter, early_stopped };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::max_iter: return "max_iter";
    case StopReason::early_stopped: return "early_stopped";
  }
  return "unknown";
}

struct SolveReport {
  Signal solution;
  std::vector<double> loss_trace;
  std::vector<double> residual_trace;
  long iterations = 0;
  StopReason stop_reason = StopReason::converged;
  double multiplier = 0.0;  // Lagrange multiplier for constrained solves
};

struct IstaConfig {
  std::optional<double> step;  // default 0.999 / ||B||^2
  double tol = 1e-10;          // fixed-point residual tolerance
  long max_iter = 200000;
};

/// One inverse-problem instance: data y, forward operator A, penalty alpha*R,
/// optional proximity weight beta and noise level delta.
struct AdpProblem {
  LinearOp A;
  Signal y;
  Penalty pen;
  double alpha = 1.0;
  double beta = 0.0;
  std::optional<double> delta;
};

}  // namespace adp
