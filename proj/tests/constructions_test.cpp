#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "adp/constructions.hpp"
#include "adp/errors.hpp"
#include "adp/operators.hpp"
#include "adp/variational.hpp"
#include "test_util.hpp"

using namespace adp;

namespace {

/// Scale y so the pairing bound holds with the given safety factor
/// (factor > 1 feasible, factor < 1 infeasible).
Signal scaled_data(std::mt19937_64& g, const Signal& xhat, const Penalty& pen, double alpha,
                   double factor) {
  Signal y = testutil::random_signal(g, xhat.size(), xhat.interval());
  const double need = 4.0 * alpha * std::max(pairing(pen, xhat), 1e-8);
  return y * (std::sqrt(need * factor) / norm(y));
}

double optimality_residual(const ConstructedOp& op, const Penalty& pen, double alpha) {
  const LinearOp B = op.materialize();
  const Signal lhs = B.apply_adjoint(B.apply(op.xhat) - op.y) * (-1.0 / alpha);
  return subdifferential_distance(pen, op.xhat, lhs);
}

}  // namespace

TEST_CASE("feasibility margins") {
  auto g = testutil::rng(301);
  const Signal y = testutil::random_signal(g, 10);
  const double quarter = 0.25 * norm(y) * norm(y);
  const FeasibilityResult zero =
      feasibility_check(Signal::zeros(10, {0.0, 1.0}), ElasticNet(1.0, 1.0), 1.0, y);
  CHECK(zero.feasible);
  CHECK(zero.margin == doctest::Approx(quarter).epsilon(1e-14));

  // alpha ||xhat||^2 = ||y||^2 / 8 sits strictly inside the bound
  Signal xh = testutil::random_signal(g, 10);
  xh = xh * std::sqrt(quarter / 2.0) * (1.0 / norm(xh));
  const FeasibilityResult half = feasibility_check(xh, SquaredL2{}, 1.0, y);
  CHECK(half.feasible);
  CHECK(half.margin == doctest::Approx(quarter / 2.0).epsilon(1e-12));

  CHECK_THROWS_AS(feasibility_check(xh, SquaredL2{}, 1.0, Signal::zeros(10, {0.0, 1.0})),
                  std::invalid_argument);
}

TEST_CASE("feasibility flips exactly once along a scaled family") {
  auto g = testutil::rng(307);
  const Signal xh = testutil::random_signal(g, 8);
  const Signal y = testutil::random_signal(g, 8);
  const Penalty pen = ElasticNet(0.3, 0.8);
  int flips = 0;
  bool prev = feasibility_check(xh * 1e-3, pen, 1.0, y).feasible;
  CHECK(prev);
  for (double t = 2e-3; t <= 120.0; t *= 1.15) {
    const bool now = feasibility_check(xh * t, pen, 1.0, y).feasible;
    if (now != prev) ++flips;
    prev = now;
  }
  CHECK(flips == 1);
  CHECK_FALSE(prev);
}

TEST_CASE("zero minimizer yields the zero operator") {
  auto g = testutil::rng(311);
  const Signal xh = Signal::zeros(9, {0.0, 1.0});
  const Signal y = testutil::random_signal(g, 9);
  const Penalty pen = ElasticNet(0.5, 0.5);
  const ConstructedOp op = construct_optimal_op(xh, Signal::zeros(9, {0.0, 1.0}), y, pen, 1.0);
  CHECK(op.materialize().matrix().norm() == 0.0);
  const SolveReport rep = x_of_b(op.materialize(), y, pen, 1.0);
  CHECK(norm(rep.solution) == 0.0);
}

TEST_CASE("squared-norm penalty with the aligned subgradient") {
  auto g = testutil::rng(313);
  for (int rep = 0; rep < 10; ++rep) {
    const Signal xh = testutil::random_signal(g, 12);
    const Signal y = scaled_data(g, xh, SquaredL2{}, 0.9, 2.0);
    const ConstructedOp op = construct_optimal_op(xh, xh, y, SquaredL2{}, 0.9);
    CHECK(norm(op.v_perp) <= 1e-12 * norm(xh));  // v = xhat means mu = 1
    const LinearOp B = op.materialize();
    const Signal resid = B.apply_adjoint(B.apply(xh) - y) + xh * 0.9;
    CHECK(norm(resid) <= 1e-10);
  }
}

TEST_CASE("random feasible instances are recovered by the inner solver") {
  auto g = testutil::rng(317);
  for (int rep = 0; rep < 15; ++rep) {
    const Signal xh = testutil::sparse_signal(g, 10, 0.7);
    const Penalty pen = ElasticNet(0.4, 0.9);
    const double alpha = 0.5;
    const Signal y = scaled_data(g, xh, pen, alpha, 2.5);
    const ConstructedOp op = construct_optimal_op(xh, min_subgradient(pen, xh), y, pen, alpha);
    const MinimizerCheck chk = verify_minimizer(op.materialize(), xh, y, pen, alpha);
    CHECK(chk.residual <= 1e-10);
    CHECK(chk.ista_distance <= 1e-6);
  }
}

TEST_CASE("construction round trip over random sizes") {
  auto g = testutil::rng(331);
  std::uniform_int_distribution<int> size(2, 30);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index n = size(g);
    const Signal xh = testutil::sparse_signal(g, n, 0.8);
    const ElasticNet pen(0.2 + uni(g), 0.3 + uni(g));
    const double alpha = 0.2 + 2.0 * uni(g);
    const Signal y = scaled_data(g, xh, pen, alpha, 1.5 + 3.0 * uni(g));
    // subgradients may move freely inside the l1 interval at kinks
    Signal v = min_subgradient(pen, xh);
    for (Eigen::Index i = 0; i < n; ++i)
      if (xh[i] == 0.0) v.samples()[i] = pen.alpha1 * (2.0 * uni(g) - 1.0);
    const ConstructedOp op = construct_optimal_op(xh, v, y, pen, alpha);
    CHECK(optimality_residual(op, pen, alpha) <= 1e-10);
  }
}

TEST_CASE("infeasible instances always raise the construction error") {
  auto g = testutil::rng(337);
  std::uniform_int_distribution<int> size(2, 30);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int rejections = 0;
  const int total = 200;
  for (int rep = 0; rep < total; ++rep) {
    const Eigen::Index n = size(g);
    Signal xh = testutil::sparse_signal(g, n, 0.8);
    if (norm(xh) == 0.0) xh.samples()[0] = 1.0;
    const ElasticNet pen(0.2 + uni(g), 0.3 + uni(g));
    const double alpha = 0.2 + 2.0 * uni(g);
    const Signal y = scaled_data(g, xh, pen, alpha, 0.2 + 0.7 * uni(g));
    try {
      construct_optimal_op(xh, min_subgradient(pen, xh), y, pen, alpha);
    } catch (const InfeasibleError&) {
      ++rejections;
    }
  }
  CHECK(rejections == total);
}

TEST_CASE("no random operator of the construction form fits an infeasible instance") {
  auto g = testutil::rng(347);
  const Eigen::Index n = 5;
  const Signal xh = testutil::random_signal(g, n);
  const Penalty pen = ElasticNet(0.5, 0.8);
  const double alpha = 1.0;
  const Signal y = scaled_data(g, xh, pen, alpha, 0.5);  // strictly infeasible
  CHECK_FALSE(feasibility_check(xh, pen, alpha, y).feasible);
  double best = std::numeric_limits<double>::infinity();
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  for (int rep = 0; rep < 10000; ++rep) {
    const Signal p = testutil::random_signal(g, n);
    const Signal q = testutil::random_signal(g, n);
    const Eigen::VectorXd dir = uni(g) * p.samples() + uni(g) * q.samples();
    const LinearOp B(y.samples() * (xh.h() * dir).transpose(), xh.interval(), y.interval());
    const Signal lhs = B.apply_adjoint(B.apply(xh) - y) * (-1.0 / alpha);
    best = std::min(best, subdifferential_distance(pen, xh, lhs));
  }
  CHECK(best > 1e-3);
}

TEST_CASE("negative control: random operators are far from optimality") {
  auto g = testutil::rng(349);
  int generic = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const LinearOp B = testutil::random_op(g, 9, 9);
    const Signal xh = testutil::random_signal(g, 9);
    const Signal y = testutil::random_signal(g, 9);
    const Signal lhs = B.apply_adjoint(B.apply(xh) - y) * (-1.0);
    if (subdifferential_distance(ElasticNet(0.3, 0.5), xh, lhs) > 1e-3) ++generic;
  }
  CHECK(generic == 20);
}

TEST_CASE("solver outputs pass the minimizer verification") {
  auto g = testutil::rng(353);
  const LinearOp B = testutil::random_op(g, 12, 12);
  const Signal y = testutil::random_signal(g, 12);
  const Penalty pen = ElasticNet(0.15, 0.6);
  const Signal xs = x_of_b(B, y, pen, 1.0, IstaConfig{std::nullopt, 1e-10, 400000}).solution;
  const MinimizerCheck chk = verify_minimizer(B, xs, y, pen, 1.0);
  CHECK(chk.residual <= 1e-6);
}

TEST_CASE("matching penalty weight is recovered from the constrained solution") {
  auto g = testutil::rng(359);
  for (int rep = 0; rep < 10; ++rep) {
    const LinearOp A = testutil::random_op(g, 14, 14);
    const Signal y = testutil::random_signal(g, 14);
    const double alpha_adp = 0.8 + rep * 0.3;
    const SolveReport sol = adp_exact_solve(A, y, SquaredL2{}, alpha_adp, 1e-9);
    const double alpha_t = equivalent_tikhonov_parameter(A, y, sol.solution);
    CHECK(alpha_t <= alpha_adp + 1e-8);
    const Signal xt = tikhonov_l2_solve(A, y, alpha_t);
    CHECK(norm(xt - sol.solution) <= 1e-6 * std::max(1e-12, norm(sol.solution)));
    // the inner solution at A never has larger norm than the constrained one
    CHECK(norm(tikhonov_l2_solve(A, y, alpha_adp)) <= norm(sol.solution) + 1e-8);
  }
}

TEST_CASE("unpenalized solution maps to weight zero") {
  auto g = testutil::rng(367);
  const LinearOp A = testutil::random_op(g, 8, 8);
  const Signal y = testutil::random_signal(g, 8);
  CHECK(equivalent_tikhonov_parameter(A, y, least_squares_min_norm(A, y)) == 0.0);
}

TEST_CASE("demo pairing agrees with a sampled-subdifferential oracle") {
  // hull of the active-piece gradients sampled at resolution 1e-3
  auto oracle = [](double x1, double x2) {
    const double f1 = 3.0 * std::abs(x1 - 5.0);
    const double f2 = std::abs(x2);
    std::vector<std::array<double, 2>> verts;
    if (f1 >= f2) {
      if (x1 != 5.0) verts.push_back({x1 > 5.0 ? 3.0 : -3.0, 0.0});
      else {
        verts.push_back({3.0, 0.0});
        verts.push_back({-3.0, 0.0});
      }
    }
    if (f2 >= f1) {
      if (x2 != 0.0) verts.push_back({0.0, x2 > 0.0 ? 1.0 : -1.0});
      else {
        verts.push_back({0.0, 1.0});
        verts.push_back({0.0, -1.0});
      }
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < verts.size(); ++a)
      for (std::size_t b = 0; b < verts.size(); ++b)
        for (double t = 0.0; t <= 1.0; t += 1e-3) {
          const double v1 = t * verts[a][0] + (1.0 - t) * verts[b][0];
          const double v2 = t * verts[a][1] + (1.0 - t) * verts[b][1];
          best = std::min(best, v1 * x1 + v2 * x2);
        }
    return best;
  };
  auto g = testutil::rng(373);
  std::uniform_real_distribution<double> uni(0.0, 10.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double x1 = uni(g), x2 = uni(g);
    CHECK(nonconvex_demo_pairing(x1, x2) == doctest::Approx(oracle(x1, x2)).epsilon(1e-9));
  }
  CHECK(nonconvex_demo_pairing(2.0, 9.0) == doctest::Approx(-6.0).epsilon(1e-14));
}

TEST_CASE("the demo certificate shows a non-convex feasible set") {
  const NonconvexDemo d = nonconvex_feasibility_demo();
  CHECK(d.pairing_a <= d.level);
  CHECK(d.pairing_b <= d.level);
  CHECK(d.pairing_mid > d.level + 1e-6);
  CHECK(d.midpoint[0] == doctest::Approx(0.5 * (d.a[0] + d.b[0])).epsilon(1e-14));
  CHECK(d.midpoint[1] == doctest::Approx(0.5 * (d.a[1] + d.b[1])).epsilon(1e-14));
  CHECK(nonconvex_demo_functional(5.0, 0.0) == 0.0);
  // the pairing inherits the |x2| symmetry
  auto g = testutil::rng(379);
  std::uniform_real_distribution<double> uni(0.0, 10.0);
  for (int rep = 0; rep < 50; ++rep) {
    const double x1 = uni(g), x2 = uni(g);
    CHECK(nonconvex_demo_pairing(x1, x2) == nonconvex_demo_pairing(x1, -x2));
  }
}

TEST_CASE("construction rejects invalid subgradients") {
  auto g = testutil::rng(383);
  const Signal xh = testutil::random_signal(g, 6);
  const Signal y = scaled_data(g, xh, SquaredL2{}, 1.0, 3.0);
  const Signal bad = xh * 2.0;  // not the gradient of the squared norm at xh
  CHECK_THROWS_AS(construct_optimal_op(xh, bad, y, SquaredL2{}, 1.0), InvalidSubgradientError);
}
