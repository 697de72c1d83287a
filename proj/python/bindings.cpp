// Python bindings for the SiDAR core: model loading/validation, finite and
// steady-state solves, classification, and the analysis helpers.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sidar/analysis.hpp"
#include "sidar/lambda_opt.hpp"
#include "sidar/model.hpp"
#include "sidar/riccati.hpp"
#include "sidar/steady_state.hpp"

namespace py = pybind11;
using namespace sidar;

PYBIND11_MODULE(_sidar, m) {
  m.doc() = "Signal-bound disturbance attenuation regulator (SiDAR) core";

  py::class_<LinearSystem>(m, "LinearSystem")
      .def_readonly("A", &LinearSystem::A)
      .def_readonly("B", &LinearSystem::B)
      .def_readonly("G", &LinearSystem::G)
      .def_readonly("Q", &LinearSystem::Q)
      .def_readonly("R", &LinearSystem::R)
      .def_readonly("P_f", &LinearSystem::P_f)
      .def_readonly("name", &LinearSystem::name)
      .def_property_readonly("n", &LinearSystem::n)
      .def_property_readonly("m", &LinearSystem::m)
      .def_property_readonly("q", &LinearSystem::q);

  py::class_<ProblemInstance>(m, "ProblemInstance")
      .def_readonly("system", &ProblemInstance::system)
      .def_readonly("x0", &ProblemInstance::x0)
      .def_readonly("alpha", &ProblemInstance::alpha);

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("stabilizable", &ValidationReport::stabilizable)
      .def_readonly("detectable", &ValidationReport::detectable)
      .def_readonly("range_inclusion", &ValidationReport::range_inclusion)
      .def_readonly("terminal_coupling", &ValidationReport::terminal_coupling)
      .def_readonly("q_pd", &ValidationReport::q_pd)
      .def_readonly("pf_pd", &ValidationReport::pf_pd)
      .def_readonly("messages", &ValidationReport::messages)
      .def("all_ok", &ValidationReport::all_ok);

  py::enum_<Region>(m, "Region")
      .value("Linear", Region::Linear)
      .value("Nonlinear", Region::Nonlinear);

  py::class_<RiccatiTrajectory>(m, "RiccatiTrajectory")
      .def_readonly("lambda_", &RiccatiTrajectory::lambda)
      .def_readonly("lambda_lo", &RiccatiTrajectory::lambda_lo)
      .def_readonly("pis", &RiccatiTrajectory::pis)
      .def_readonly("control_gains", &RiccatiTrajectory::control_gains)
      .def_readonly("disturbance_gains", &RiccatiTrajectory::disturbance_gains)
      .def_readonly("warnings", &RiccatiTrajectory::warnings);

  py::class_<FiniteHorizonSolution>(m, "FiniteHorizonSolution")
      .def_readonly("lambda_star", &FiniteHorizonSolution::lambda_star)
      .def_readonly("lambda_lo", &FiniteHorizonSolution::lambda_lo)
      .def_readonly("value", &FiniteHorizonSolution::value)
      .def_readonly("worst_energy", &FiniteHorizonSolution::worst_energy)
      .def_readonly("region", &FiniteHorizonSolution::region)
      .def_readonly("trajectory", &FiniteHorizonSolution::trajectory);

  py::enum_<SystemKind>(m, "SystemKind")
      .value("Nondegenerate", SystemKind::Nondegenerate)
      .value("Degenerate", SystemKind::Degenerate);

  py::class_<Classification>(m, "Classification")
      .def_readonly("kind", &Classification::kind)
      .def_readonly("slack_at_origin", &Classification::slack_at_origin)
      .def_readonly("tolerance_used", &Classification::tolerance_used);

  py::enum_<SteadyMethod>(m, "SteadyMethod")
      .value("LMI", SteadyMethod::LMI)
      .value("Scan", SteadyMethod::Scan);

  py::class_<SteadyStateSolution>(m, "SteadyStateSolution")
      .def_readonly("lambda_bar", &SteadyStateSolution::lambda_bar)
      .def_readonly("chi", &SteadyStateSolution::chi)
      .def_readonly("P", &SteadyStateSolution::P)
      .def_readonly("F", &SteadyStateSolution::F)
      .def_readonly("Pi_bar", &SteadyStateSolution::Pi_bar)
      .def_readonly("K_bar", &SteadyStateSolution::K_bar)
      .def_readonly("slack", &SteadyStateSolution::slack)
      .def_readonly("g_residual_norm", &SteadyStateSolution::g_residual_norm)
      .def_readonly("method", &SteadyStateSolution::method)
      .def_readonly("warnings", &SteadyStateSolution::warnings);

  py::class_<Ellipsoid>(m, "Ellipsoid")
      .def_readonly("shape", &Ellipsoid::shape)
      .def_readonly("radius_sq", &Ellipsoid::radius_sq)
      .def("contains", &Ellipsoid::contains);

  py::class_<TurnpikeProfile>(m, "TurnpikeProfile")
      .def_readonly("plateau_value", &TurnpikeProfile::plateau_value)
      .def_readonly("plateau_start", &TurnpikeProfile::plateau_start)
      .def_readonly("plateau_end", &TurnpikeProfile::plateau_end)
      .def_readonly("plateau_fraction", &TurnpikeProfile::plateau_fraction)
      .def_readonly("entry_layer", &TurnpikeProfile::entry_layer)
      .def_readonly("exit_layer", &TurnpikeProfile::exit_layer)
      .def_readonly("fixed_point_exists", &TurnpikeProfile::fixed_point_exists);

  py::enum_<DisturbancePolicy>(m, "DisturbancePolicy")
      .value("WorstCase", DisturbancePolicy::WorstCase)
      .value("Random", DisturbancePolicy::Random)
      .value("Zero", DisturbancePolicy::Zero);

  py::class_<SimTrace>(m, "SimTrace")
      .def_readonly("x", &SimTrace::x)
      .def_readonly("u", &SimTrace::u)
      .def_readonly("w", &SimTrace::w)
      .def_readonly("budget", &SimTrace::budget)
      .def_readonly("lambda_", &SimTrace::lambda)
      .def_readonly("horizon", &SimTrace::horizon);

  m.def(
      "make_system",
      [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
         const Eigen::MatrixXd& G, const Eigen::MatrixXd& Q,
         const Eigen::MatrixXd& R, const Eigen::MatrixXd& P_f,
         const std::string& name) {
        return make_system(A, B, G, Q, R, P_f, name);
      },
      py::arg("A"), py::arg("B"), py::arg("G"), py::arg("Q"), py::arg("R"),
      py::arg("P_f"), py::arg("name") = "");
  m.def("make_instance", &make_instance, py::arg("system"), py::arg("x0"),
        py::arg("alpha") = 1.0);
  m.def(
      "load_system",
      [](const std::string& path) { return load_system(path, nullptr); },
      py::arg("path"));
  m.def(
      "validate",
      [](const LinearSystem& sys) { return validate(sys); }, py::arg("system"));
  m.def("random_stable_system", &random_stable_system, py::arg("n"),
        py::arg("seed"));

  m.def("lambda_lower_bound", &lambda_lower_bound, py::arg("system"),
        py::arg("N"));
  m.def(
      "riccati_step",
      [](const Eigen::MatrixXd& Pi, double lam, const LinearSystem& sys) {
        return riccati_step(Pi, lam, sys);
      },
      py::arg("Pi_next"), py::arg("lambda_"), py::arg("system"));
  m.def(
      "recursion_trajectory",
      [](double lam, int N, const LinearSystem& sys) {
        return recursion_trajectory(lam, N, sys);
      },
      py::arg("lambda_"), py::arg("N"), py::arg("system"));

  m.def("objective", &objective, py::arg("lambda_"), py::arg("instance"),
        py::arg("N"));
  m.def("derivative", &derivative, py::arg("lambda_"), py::arg("instance"),
        py::arg("N"));
  m.def("solve_finite", &solve_finite, py::arg("instance"), py::arg("N"));
  m.def(
      "dp_oracle",
      [](const ProblemInstance& inst, int N) { return dp_oracle(inst, N); },
      py::arg("instance"), py::arg("N"));

  m.def("solve_steady_lmi", &solve_steady_lmi, py::arg("instance"));
  m.def("solve_steady_scan", &solve_steady_scan, py::arg("instance"));
  m.def("g_residual", &g_residual, py::arg("lambda_"), py::arg("Pi"),
        py::arg("system"));
  m.def("riccati_fixed_point", &riccati_fixed_point, py::arg("lambda_"),
        py::arg("system"));
  m.def("classify", &classify, py::arg("system"), py::arg("alpha") = 1.0);
  m.def("hinf_gamma_oracle", &hinf_gamma_oracle, py::arg("system"));

  m.def("region_linear", &region_linear, py::arg("instance"), py::arg("N"));
  m.def("turnpike_profile", &turnpike_profile, py::arg("instance"),
        py::arg("N"), py::arg("epsilon") = 1e-6);
  m.def("simulate_receding", &simulate_receding, py::arg("instance"),
        py::arg("T"), py::arg("policy"), py::arg("seed") = 0);
}
