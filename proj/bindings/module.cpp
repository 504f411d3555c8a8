#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "adp/adp_iterative.hpp"
#include "adp/constructions.hpp"
#include "adp/dip_lista.hpp"
#include "adp/errors.hpp"
#include "adp/experiments.hpp"
#include "adp/operators.hpp"
#include "adp/penalties.hpp"
#include "adp/variational.hpp"

namespace py = pybind11;
using namespace adp;

namespace {

const LinearOp* opt_ptr(const std::optional<LinearOp>& op) { return op ? &*op : nullptr; }

}  // namespace

PYBIND11_MODULE(_adplab, m) {
  m.doc() = "Solvers for linear ill-posed inverse problems: exact analytic-deep-prior via its "
            "constrained-problem equivalence, operator gradient descent, and unrolled shrinkage "
            "networks.";

  py::register_exception<SingularSystemError>(m, "SingularSystemError");
  py::register_exception<NoConvergenceError>(m, "NoConvergenceError");
  py::register_exception<DivergenceError>(m, "DivergenceError");
  py::register_exception<InfeasibleError>(m, "InfeasibleError");
  py::register_exception<InvalidSubgradientError>(m, "InvalidSubgradientError");

  py::class_<Interval>(m, "Interval")
      .def(py::init<double, double>(), py::arg("a"), py::arg("b"))
      .def_readwrite("a", &Interval::a)
      .def_readwrite("b", &Interval::b)
      .def("length", &Interval::length);

  py::class_<Signal>(m, "Signal")
      .def(py::init<Eigen::VectorXd, Interval>(), py::arg("samples"), py::arg("interval"))
      .def_static("zeros", &Signal::zeros)
      .def_property_readonly("samples",
                             [](const Signal& s) -> Eigen::VectorXd { return s.samples(); })
      .def_property_readonly("h", &Signal::h)
      .def_property_readonly("interval", &Signal::interval)
      .def("grid_point", &Signal::grid_point)
      .def("__len__", &Signal::size)
      .def("__add__", [](const Signal& a, const Signal& b) { return a + b; })
      .def("__sub__", [](const Signal& a, const Signal& b) { return a - b; })
      .def("__neg__", [](const Signal& a) { return -a; })
      .def("__mul__", [](const Signal& s, double c) { return s * c; })
      .def("__rmul__", [](const Signal& s, double c) { return s * c; });

  m.def("inner", &inner);
  m.def("norm", py::overload_cast<const Signal&>(&norm));
  m.def("norm1", &norm1);

  py::class_<LinearOp>(m, "LinearOp")
      .def(py::init<Eigen::MatrixXd, Interval, Interval>(), py::arg("matrix"), py::arg("domain"),
           py::arg("codomain"))
      .def_property_readonly("matrix",
                             [](const LinearOp& o) -> Eigen::MatrixXd { return o.matrix(); })
      .def_property_readonly("h_in", &LinearOp::h_in)
      .def_property_readonly("h_out", &LinearOp::h_out)
      .def_property_readonly("domain", &LinearOp::domain)
      .def_property_readonly("codomain", &LinearOp::codomain)
      .def("apply", &LinearOp::apply)
      .def("apply_adjoint", &LinearOp::apply_adjoint)
      .def("adjoint", &LinearOp::adjoint);

  py::class_<KernelParam>(m, "KernelParam")
      .def(py::init([](Eigen::VectorXd g, double h) { return KernelParam{std::move(g), h}; }),
           py::arg("g"), py::arg("h"))
      .def_readwrite("g", &KernelParam::g)
      .def_readwrite("h", &KernelParam::h);

  m.def("make_integration_operator", &make_integration_operator, py::arg("n"),
        py::arg("interval"));
  m.def("make_convolution_operator", &make_convolution_operator, py::arg("n"),
        py::arg("interval"), py::arg("sigma"));
  m.def("gaussian_kernel", &gaussian_kernel, py::arg("sigma"), py::arg("h"));
  m.def("make_kernel_operator", &make_kernel_operator, py::arg("kernel"), py::arg("n"),
        py::arg("interval"));
  m.def("operator_norm", &operator_norm, py::arg("op"), py::arg("tol") = 1e-6);

  py::class_<ElasticNet>(m, "ElasticNet")
      .def(py::init<double, double>(), py::arg("alpha1"), py::arg("alpha2"))
      .def_readonly("alpha1", &ElasticNet::alpha1)
      .def_readonly("alpha2", &ElasticNet::alpha2);
  py::class_<SquaredL2>(m, "SquaredL2").def(py::init<>());

  m.def("penalty_value", &penalty_value);
  m.def("prox", &prox, py::arg("pen"), py::arg("z"), py::arg("step"));
  m.def("pairing", &pairing);
  m.def("min_subgradient", &min_subgradient);
  m.def("in_subdifferential", &in_subdifferential, py::arg("pen"), py::arg("x"), py::arg("v"),
        py::arg("tol") = 1e-9);
  m.def("nonconvex_demo_functional", &nonconvex_demo_functional);

  py::enum_<StopReason>(m, "StopReason")
      .value("converged", StopReason::converged)
      .value("max_iter", StopReason::max_iter)
      .value("early_stopped", StopReason::early_stopped);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("solution", &SolveReport::solution)
      .def_readonly("loss_trace", &SolveReport::loss_trace)
      .def_readonly("residual_trace", &SolveReport::residual_trace)
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("stop_reason", &SolveReport::stop_reason)
      .def_readonly("multiplier", &SolveReport::multiplier);

  py::class_<IstaConfig>(m, "IstaConfig")
      .def(py::init<>())
      .def_readwrite("step", &IstaConfig::step)
      .def_readwrite("tol", &IstaConfig::tol)
      .def_readwrite("max_iter", &IstaConfig::max_iter);

  py::class_<AdpProblem>(m, "AdpProblem")
      .def(py::init([](LinearOp A, Signal y, Penalty pen, double alpha, double beta,
                       std::optional<double> delta) {
             return AdpProblem{std::move(A), std::move(y), std::move(pen), alpha, beta, delta};
           }),
           py::arg("A"), py::arg("y"), py::arg("pen"), py::arg("alpha"), py::arg("beta") = 0.0,
           py::arg("delta") = std::nullopt)
      .def_readonly("A", &AdpProblem::A)
      .def_readonly("y", &AdpProblem::y)
      .def_readonly("alpha", &AdpProblem::alpha)
      .def_readonly("beta", &AdpProblem::beta);

  m.def(
      "x_of_b",
      [](const LinearOp& B, const Signal& y, const Penalty& pen, double alpha,
         const IstaConfig& cfg, const std::optional<Signal>& warm) {
        return x_of_b(B, y, pen, alpha, cfg, warm ? &*warm : nullptr);
      },
      py::arg("B"), py::arg("y"), py::arg("pen"), py::arg("alpha"),
      py::arg("cfg") = IstaConfig{}, py::arg("warm_start") = std::nullopt);
  m.def("tikhonov_l2_solve", &tikhonov_l2_solve, py::arg("A"), py::arg("y"), py::arg("alpha_t"));
  m.def("least_squares_min_norm", &least_squares_min_norm);
  m.def("ivanov_solve", &ivanov_solve, py::arg("A"), py::arg("y"), py::arg("pen"), py::arg("r"),
        py::arg("tol") = 1e-6);
  m.def("adp_exact_solve", &adp_exact_solve, py::arg("A"), py::arg("y"), py::arg("pen"),
        py::arg("alpha"), py::arg("tol") = 1e-6);

  py::class_<DiscrepancyStop>(m, "DiscrepancyStop")
      .def(py::init([](double tau, double delta) { return DiscrepancyStop{tau, delta}; }),
           py::arg("tau"), py::arg("delta"))
      .def_readwrite("tau", &DiscrepancyStop::tau)
      .def_readwrite("delta", &DiscrepancyStop::delta);

  py::class_<IftConfig>(m, "IftConfig")
      .def(py::init<>())
      .def_readwrite("lr", &IftConfig::lr)
      .def_readwrite("outer_iters", &IftConfig::outer_iters)
      .def_readwrite("inner", &IftConfig::inner)
      .def_readwrite("discrepancy", &IftConfig::discrepancy)
      .def_readwrite("fixed_stop_iter", &IftConfig::fixed_stop_iter)
      .def_readwrite("grad_tol", &IftConfig::grad_tol);

  m.def("ift_gradient", &ift_gradient, py::arg("B"), py::arg("x"), py::arg("A"), py::arg("y"),
        py::arg("pen"), py::arg("alpha"));
  m.def(
      "adp_ift_solve",
      [](const AdpProblem& p, const IftConfig& cfg, const std::optional<LinearOp>& B0) {
        return adp_ift_solve(p, cfg, opt_ptr(B0));
      },
      py::arg("problem"), py::arg("cfg"), py::arg("B0") = std::nullopt);
  m.def("adp_beta_param_solve", &adp_beta_param_solve, py::arg("f"), py::arg("y"), py::arg("pen"),
        py::arg("alpha"), py::arg("beta"), py::arg("cfg"));
  m.def("param_data_gradient", &param_data_gradient, py::arg("f"), py::arg("g"), py::arg("y"),
        py::arg("pen"), py::arg("alpha"), py::arg("inner") = IstaConfig{});
  m.def("bregman_distance", &bregman_distance, py::arg("pen"), py::arg("x_tilde"), py::arg("x"),
        py::arg("v"));

  py::class_<ListaNet>(m, "ListaNet")
      .def_readonly("depth", &ListaNet::depth)
      .def_readonly("step", &ListaNet::step)
      .def_property_readonly("B", [](const ListaNet& n) { return n.B; });
  m.def("make_lista_net", &make_lista_net, py::arg("B"), py::arg("depth"), py::arg("pen"),
        py::arg("alpha"), py::arg("step") = std::nullopt);
  m.def("lista_forward", &lista_forward, py::arg("net"), py::arg("z"), py::arg("y"));
  m.def("lista_backward", &lista_backward, py::arg("net"), py::arg("z"), py::arg("y"),
        py::arg("A"));
  m.def("default_net_input", &default_net_input, py::arg("n"), py::arg("interval"),
        py::arg("seed"));
  m.def(
      "dip_lista_solve",
      [](const AdpProblem& p, long depth, double lr, long iters, const Signal& z0,
         const std::optional<LinearOp>& B0) {
        return dip_lista_solve(p, depth, lr, iters, z0, opt_ptr(B0));
      },
      py::arg("problem"), py::arg("depth"), py::arg("lr"), py::arg("iters"), py::arg("z0"),
      py::arg("B0") = std::nullopt);
  m.def(
      "dip_lista_inf_solve",
      [](const AdpProblem& p, double lr, long iters, const Signal& z0,
         const std::optional<LinearOp>& B0, long block_depth) {
        return dip_lista_inf_solve(p, lr, iters, z0, opt_ptr(B0), block_depth);
      },
      py::arg("problem"), py::arg("lr"), py::arg("iters"), py::arg("z0"),
      py::arg("B0") = std::nullopt, py::arg("block_depth") = 10);

  py::class_<FeasibilityResult>(m, "FeasibilityResult")
      .def_readonly("feasible", &FeasibilityResult::feasible)
      .def_readonly("margin", &FeasibilityResult::margin);
  m.def("feasibility_check", &feasibility_check, py::arg("xhat"), py::arg("pen"),
        py::arg("alpha"), py::arg("y"));

  py::class_<ConstructedOp>(m, "ConstructedOp")
      .def_readonly("sigma1", &ConstructedOp::sigma1)
      .def_readonly("sigma2", &ConstructedOp::sigma2)
      .def_readonly("v_perp", &ConstructedOp::v_perp)
      .def("materialize", &ConstructedOp::materialize);
  m.def("construct_optimal_op", &construct_optimal_op, py::arg("xhat"), py::arg("v"),
        py::arg("y"), py::arg("pen"), py::arg("alpha"));

  py::class_<MinimizerCheck>(m, "MinimizerCheck")
      .def_readonly("residual", &MinimizerCheck::residual)
      .def_readonly("ista_distance", &MinimizerCheck::ista_distance);
  m.def("verify_minimizer", &verify_minimizer, py::arg("B"), py::arg("xhat"), py::arg("y"),
        py::arg("pen"), py::arg("alpha"));
  m.def("equivalent_tikhonov_parameter", &equivalent_tikhonov_parameter, py::arg("A"),
        py::arg("y"), py::arg("x_adp"));
  m.def("nonconvex_demo_pairing", &nonconvex_demo_pairing);

  py::class_<NonconvexDemo>(m, "NonconvexDemo")
      .def_readonly("a", &NonconvexDemo::a)
      .def_readonly("b", &NonconvexDemo::b)
      .def_readonly("midpoint", &NonconvexDemo::midpoint)
      .def_readonly("level", &NonconvexDemo::level)
      .def_readonly("pairing_a", &NonconvexDemo::pairing_a)
      .def_readonly("pairing_b", &NonconvexDemo::pairing_b)
      .def_readonly("pairing_mid", &NonconvexDemo::pairing_mid);
  m.def("nonconvex_feasibility_demo", &nonconvex_feasibility_demo);

  m.def("make_ground_truths", &make_ground_truths, py::arg("n"), py::arg("interval"));
  m.def("add_noise", &add_noise, py::arg("y"), py::arg("target_psnr"), py::arg("seed"));
  py::class_<SignalMetrics>(m, "SignalMetrics")
      .def_readonly("l2_error", &SignalMetrics::l2_error)
      .def_readonly("psnr", &SignalMetrics::psnr);
  m.def("metrics", &metrics, py::arg("x"), py::arg("x_ref"));
}
