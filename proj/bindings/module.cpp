#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <stdexcept>
#include <string>

#include "slsdp/dp.hpp"
#include "slsdp/model.hpp"
#include "slsdp/objectives.hpp"
#include "slsdp/qp_oracle.hpp"

namespace py = pybind11;

namespace {

std::unique_ptr<slsdp::CostToGoModel> objective_by_name(
    const std::string& name, Eigen::Index state_dim, Eigen::Index input_dim) {
  if (name == "h2") {
    return std::make_unique<slsdp::H2Objective>(
        slsdp::h2_default_weights(state_dim, input_dim));
  }
  if (name == "lq") {
    return std::make_unique<slsdp::LqObjective>(
        slsdp::lq_default_weights(state_dim, input_dim));
  }
  throw std::invalid_argument("unknown objective: " + name);
}

std::unique_ptr<slsdp::CostToGoModel> objective_for(
    const slsdp::Plant& plant, const std::string& name) {
  const Eigen::Index state_dim = plant.nx() * plant.nx() +
                                 plant.nx() * plant.ny() +
                                 plant.nu() * plant.nx();
  return objective_by_name(name, state_dim, plant.nu() * plant.ny());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "FIR output-feedback synthesis via backward recursion";

  py::register_exception<slsdp::InfeasibleError>(m, "InfeasibleError",
                                                 PyExc_RuntimeError);
  py::register_exception<slsdp::UnboundedError>(m, "UnboundedError",
                                                PyExc_RuntimeError);

  py::class_<slsdp::Plant>(m, "Plant")
      .def(py::init<Eigen::MatrixXd, Eigen::MatrixXd, Eigen::MatrixXd>(),
           py::arg("A"), py::arg("B"), py::arg("C"))
      .def_readonly("A", &slsdp::Plant::A)
      .def_readonly("B", &slsdp::Plant::B)
      .def_readonly("C", &slsdp::Plant::C)
      .def_property_readonly("nx", &slsdp::Plant::nx)
      .def_property_readonly("nu", &slsdp::Plant::nu)
      .def_property_readonly("ny", &slsdp::Plant::ny)
      .def("__repr__", [](const slsdp::Plant& p) {
        return "Plant(nx=" + std::to_string(p.nx()) +
               ", nu=" + std::to_string(p.nu()) +
               ", ny=" + std::to_string(p.ny()) + ")";
      });

  py::class_<slsdp::SystemResponse>(m, "SystemResponse")
      .def_readonly("horizon", &slsdp::SystemResponse::horizon)
      .def_readonly("phi_xx", &slsdp::SystemResponse::phi_xx)
      .def_readonly("phi_xy", &slsdp::SystemResponse::phi_xy)
      .def_readonly("phi_ux", &slsdp::SystemResponse::phi_ux)
      .def_readonly("phi_uy", &slsdp::SystemResponse::phi_uy)
      .def("__repr__", [](const slsdp::SystemResponse& r) {
        return "SystemResponse(horizon=" + std::to_string(r.horizon) + ")";
      });

  py::class_<slsdp::VectorizedSystem>(m, "VectorizedSystem")
      .def_readonly("a_tilde", &slsdp::VectorizedSystem::a_tilde)
      .def_readonly("b_tilde", &slsdp::VectorizedSystem::b_tilde)
      .def_readonly("a_eq", &slsdp::VectorizedSystem::a_eq)
      .def_readonly("b0", &slsdp::VectorizedSystem::b0)
      .def("state_dim", &slsdp::VectorizedSystem::state_dim)
      .def("input_dim", &slsdp::VectorizedSystem::input_dim);

  py::class_<slsdp::ResidualReport>(m, "ResidualReport")
      .def_readonly("dynamics", &slsdp::ResidualReport::dynamics)
      .def_readonly("transition", &slsdp::ResidualReport::transition)
      .def_readonly("initial", &slsdp::ResidualReport::initial)
      .def_readonly("termination", &slsdp::ResidualReport::termination)
      .def("max_residual", &slsdp::ResidualReport::max_residual);

  py::class_<slsdp::SolveResult>(m, "SolveResult")
      .def_readonly("response", &slsdp::SolveResult::response)
      .def_readonly("objective", &slsdp::SolveResult::objective)
      .def_readonly("termination_residual",
                    &slsdp::SolveResult::termination_residual);

  py::class_<slsdp::QpSolution>(m, "QpSolution")
      .def_readonly("response", &slsdp::QpSolution::response)
      .def_readonly("objective", &slsdp::QpSolution::objective)
      .def_readonly("equality_residual",
                    &slsdp::QpSolution::equality_residual)
      .def_readonly("stationarity_residual",
                    &slsdp::QpSolution::stationarity_residual);

  m.def("stochastic_chain", &slsdp::stochastic_chain, py::arg("nx"),
        py::arg("nu"), py::arg("ny"), py::arg("alpha") = 0.2,
        "Marginally stable chain plant used by the benchmarks");

  m.def("build_vectorized", &slsdp::build_vectorized, py::arg("plant"),
        "Lift a plant to the vectorized synthesis dynamics");

  m.def(
      "solve",
      [](const slsdp::Plant& plant, Eigen::Index horizon,
         const std::string& objective) {
        return slsdp::solve(plant, *objective_for(plant, objective), horizon);
      },
      py::arg("plant"), py::arg("horizon"), py::arg("objective") = "h2",
      "Exact synthesis over the full horizon");

  m.def(
      "solve_approx",
      [](const slsdp::Plant& plant, Eigen::Index horizon,
         Eigen::Index allowance, const std::string& objective) {
        return slsdp::solve_approx(plant, *objective_for(plant, objective),
                                   horizon, allowance);
      },
      py::arg("plant"), py::arg("horizon"), py::arg("allowance"),
      py::arg("objective") = "h2",
      "Approximate synthesis: steps before the allowance skip the "
      "feasibility certificate");

  m.def(
      "solve_qp",
      [](const slsdp::Plant& plant, Eigen::Index horizon,
         const std::string& objective) {
        const auto model = objective_for(plant, objective);
        return slsdp::solve_kkt(slsdp::assemble(plant, *model, horizon));
      },
      py::arg("plant"), py::arg("horizon"), py::arg("objective") = "h2",
      "Reference solution of the stacked equality-constrained program");

  m.def("verify_response", &slsdp::verify_response, py::arg("plant"),
        py::arg("response"), "Residuals of the response constraints");
}
