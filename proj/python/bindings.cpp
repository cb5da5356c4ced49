#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dirand/analytic.hpp"
#include "dirand/guessprob.hpp"
#include "dirand/qstate.hpp"
#include "dirand/seesaw.hpp"

namespace py = pybind11;
using namespace dirand;

PYBIND11_MODULE(_dirand, m) {
  m.doc() = "Device-independent randomness bounds for two-qubit Bell experiments";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::enum_<sdp::Status>(m, "Status")
      .value("Optimal", sdp::Status::Optimal)
      .value("MaxIterations", sdp::Status::MaxIterations)
      .value("Infeasible", sdp::Status::Infeasible)
      .value("NumericalFailure", sdp::Status::NumericalFailure);

  py::class_<sdp::SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("tolerance", &sdp::SolverOptions::tolerance)
      .def_readwrite("max_iterations", &sdp::SolverOptions::max_iterations)
      .def_readwrite("verbose", &sdp::SolverOptions::verbose);

  py::class_<DensityMatrix>(m, "DensityMatrix")
      .def(py::init<const Eigen::Matrix4d&>(), py::arg("entries"))
      .def_property_readonly("entries", &DensityMatrix::entries)
      .def_property_readonly("visibility", &DensityMatrix::visibility)
      .def_property_readonly("theta", &DensityMatrix::theta)
      .def("eigenvalues", &DensityMatrix::eigenvalues);
  m.def("make_state", &make_state, py::arg("v"), py::arg("theta"));

  py::class_<MeasurementSet>(m, "MeasurementSet")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("alice_angles"), py::arg("bob_angles"))
      .def_property_readonly("mx", &MeasurementSet::mx)
      .def_property_readonly("my", &MeasurementSet::my)
      .def_property_readonly("alice_angles", &MeasurementSet::alice_angles)
      .def_property_readonly("bob_angles", &MeasurementSet::bob_angles);
  m.def("canonical_settings", py::overload_cast<int, int>(&canonical_settings), py::arg("mx") = 2, py::arg("my") = 3);

  py::class_<Behavior>(m, "Behavior")
      .def(py::init<int, int, std::vector<double>, double>(), py::arg("mx"), py::arg("my"), py::arg("probs"),
           py::arg("tolerance") = num::kTol.probability)
      .def_static("uniform", &Behavior::uniform)
      .def_property_readonly("mx", &Behavior::mx)
      .def_property_readonly("my", &Behavior::my)
      .def_property_readonly("probs", &Behavior::probs)
      .def("__call__", &Behavior::operator(), py::arg("a"), py::arg("b"), py::arg("x"), py::arg("y"))
      .def("correlator", &Behavior::correlator)
      .def("to_csv", [](const Behavior& b) {
        std::ostringstream s;
        write_behavior_csv(s, b);
        return s.str();
      });
  m.def("behavior", &behavior, py::arg("state"), py::arg("meas"));
  m.def("behavior_from_csv", [](const std::string& text) {
    std::istringstream s(text);
    return read_behavior_csv(s);
  });
  m.def("chsh_value", &chsh_value);
  m.def("ibeta_value", &ibeta_value);
  m.def("beta_coefficient", &beta_coefficient);

  py::class_<BellExpression>(m, "BellExpression")
      .def_readonly("mx", &BellExpression::mx)
      .def_readonly("my", &BellExpression::my)
      .def_readonly("coeffs", &BellExpression::coeffs)
      .def_readonly("offset", &BellExpression::offset)
      .def("evaluate", &BellExpression::evaluate);

  py::class_<GuessReport>(m, "GuessReport")
      .def_readonly("guessing_probability", &GuessReport::guessing_probability)
      .def_readonly("hmin", &GuessReport::hmin)
      .def_readonly("dual_bound", &GuessReport::dual_bound)
      .def_readonly("level", &GuessReport::level)
      .def_readonly("status", &GuessReport::status)
      .def_readonly("attack_weights", &GuessReport::attack_weights)
      .def_readonly("bell_expression", &GuessReport::bell_expression)
      .def_readonly("witness", &GuessReport::witness)
      .def_readonly("iterations", &GuessReport::iterations)
      .def_readonly("primal_infeasibility", &GuessReport::primal_infeasibility)
      .def_readonly("dual_infeasibility", &GuessReport::dual_infeasibility)
      .def_readonly("relative_gap", &GuessReport::relative_gap)
      .def("optimal", &GuessReport::optimal)
      .def("usable", &GuessReport::usable, py::arg("tol") = 1e-6)
      .def("report", [](const GuessReport& r) {
        std::ostringstream s;
        write_report(s, r);
        return s.str();
      });

  m.def("guessing_probability", &guessing_probability, py::arg("behavior"), py::arg("level") = 2,
        py::arg("xstar") = 0, py::arg("ystar") = 0, py::arg("options") = default_guess_options());
  m.def("chsh_coefficients", &chsh_coefficients);
  m.def("ibeta_coefficients", &ibeta_coefficients);
  m.def(
      "bell_constrained_bound",
      [](const std::vector<double>& coeffs, double value, int mx, int my, int level, int xstar, int ystar) {
        const BellConstraint bc{coeffs, value};
        return bell_constrained_bound(std::span(&bc, 1), mx, my, level, xstar, ystar);
      },
      py::arg("coeffs"), py::arg("value"), py::arg("mx") = 2, py::arg("my") = 2, py::arg("level") = 2,
      py::arg("xstar") = 0, py::arg("ystar") = 0);
  m.def("tomographic_guessing", &tomographic_guessing, py::arg("state"), py::arg("alice_angle"),
        py::arg("bob_angle"), py::arg("options") = default_guess_options());

  py::class_<SeesawOptions>(m, "SeesawOptions")
      .def(py::init<>())
      .def_readwrite("epsilon", &SeesawOptions::epsilon)
      .def_readwrite("max_iterations", &SeesawOptions::max_iterations)
      .def_readwrite("starts", &SeesawOptions::starts)
      .def_readwrite("seed", &SeesawOptions::seed);
  py::class_<OptResult>(m, "OptResult")
      .def_readonly("best_meas", &OptResult::best_meas)
      .def_readonly("best_report", &OptResult::best_report)
      .def_readonly("trajectory", &OptResult::trajectory)
      .def_readonly("best_start", &OptResult::best_start)
      .def_readonly("starts_used", &OptResult::starts_used)
      .def_readonly("converged", &OptResult::converged);
  m.def("optimize", &optimize, py::arg("state"), py::arg("mx") = 2, py::arg("my") = 2, py::arg("level") = 2,
        py::arg("xstar") = 0, py::arg("ystar") = 0, py::arg("options") = SeesawOptions{});
  py::class_<TomographicOptimum>(m, "TomographicOptimum")
      .def_readonly("alice_angle", &TomographicOptimum::alice_angle)
      .def_readonly("bob_angle", &TomographicOptimum::bob_angle)
      .def_readonly("report", &TomographicOptimum::report);
  m.def("tomographic_optimize", &tomographic_optimize, py::arg("state"), py::arg("grid_size") = 24,
        py::arg("refine_tolerance") = 1e-5);

  py::class_<PureStateResult>(m, "PureStateResult")
      .def_readonly("theta", &PureStateResult::theta)
      .def_readonly("alpha", &PureStateResult::alpha)
      .def_readonly("guessing_probability", &PureStateResult::guessing_probability)
      .def_readonly("hmin", &PureStateResult::hmin);
  m.def("pure_state_alpha", &pure_state_alpha, py::arg("theta"));
  m.def("pure_state_guessing", &pure_state_guessing, py::arg("theta"));
}
