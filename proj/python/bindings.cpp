#include "mrdg/app.hpp"
#include "mrdg/operators.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace mrdg;

namespace
{
// Python callables take (x, y); y is 0 in one dimension.
Field wrap_field(py::function f)
{
  return [f = std::move(f)](Point const &x) {
    py::gil_scoped_acquire gil;
    return f(x[0], x[1]).cast<cplx>();
  };
}

py::array_t<double> history_array(std::vector<HistoryRow> const &rows)
{
  py::array_t<double> out({static_cast<py::ssize_t>(rows.size()), py::ssize_t{4}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    v(i, 0) = rows[i].t;
    v(i, 1) = static_cast<double>(rows[i].dof);
    v(i, 2) = rows[i].norm;
    v(i, 3) = rows[i].max_abs;
  }
  return out;
}

py::array_t<cplx> evaluate(HierState const &state, int q, py::array_t<double> const &x,
                           std::optional<py::array_t<double>> const &y)
{
  auto xs = x.unchecked<1>();
  if (y && y->size() != x.size())
    throw std::invalid_argument("x and y must have the same length");
  py::array_t<cplx> out(x.size());
  auto o = out.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < x.size(); ++i)
    o(i) = reconstruct(state, q, {xs(i), y ? y->at(i) : 0.0});
  return out;
}
} // namespace

PYBIND11_MODULE(_mrdg, m)
{
  m.doc() = "Adaptive multiresolution ultra-weak DG solver for NLS equations";

  py::enum_<GridMode>(m, "GridMode")
      .value("full", GridMode::full)
      .value("sparse", GridMode::sparse)
      .value("adaptive", GridMode::adaptive);
  py::enum_<Aggregation>(m, "Aggregation")
      .value("max", Aggregation::max)
      .value("sum", Aggregation::sum);
  py::enum_<RunStatus>(m, "RunStatus")
      .value("completed", RunStatus::completed)
      .value("blowup", RunStatus::blowup)
      .value("solver_failure", RunStatus::solver_failure);

  py::class_<ElementSet, std::shared_ptr<ElementSet>>(m, "ElementSet")
      .def_property_readonly("dim", &ElementSet::dim)
      .def_property_readonly("degree", &ElementSet::degree)
      .def_property_readonly("max_level", &ElementSet::max_level)
      .def_property_readonly("mode", &ElementSet::mode)
      .def_property_readonly("top_level", &ElementSet::top_level)
      .def("__len__", &ElementSet::size)
      .def_property_readonly("dof", &ElementSet::dof)
      .def("keys",
           [](ElementSet const &s) {
             std::vector<std::array<int, 4>> out;
             for (auto const &k : s.keys())
               out.push_back({k.level[0], k.level[1], k.cell[0], k.cell[1]});
             return out;
           },
           "(l1, l2, j1, j2) per element");

  m.def("build_set",
        [](std::string const &mode, int N, int k, int dim) {
          return std::const_pointer_cast<ElementSet>(
              build_set(grid_mode_from_string(mode), N, k, dim));
        },
        py::arg("mode"), py::arg("N"), py::arg("k"), py::arg("dim") = 1);

  py::class_<HierState>(m, "HierState")
      .def_property_readonly(
          "set", [](HierState const &s) { return std::const_pointer_cast<ElementSet>(s.set()); })
      .def_property_readonly("unknowns", &HierState::unknowns)
      .def_property(
          "coeffs", [](HierState const &s) { return Eigen::VectorXcd(s.coeffs()); },
          [](HierState &s, Eigen::VectorXcd const &c) {
            if (c.size() != s.coeffs().size())
              throw std::invalid_argument("coefficient vector has the wrong length");
            s.coeffs() = c;
          })
      .def("norm", &HierState::norm, py::arg("q") = 0)
      .def("evaluate", &evaluate, py::arg("q"), py::arg("x"), py::arg("y") = py::none(),
           "point values of unknown q");

  m.def("project",
        [](py::function f, std::shared_ptr<ElementSet> const &set, int quad_nodes) {
          return project_l2(wrap_field(std::move(f)), set, quad_nodes);
        },
        py::arg("f"), py::arg("set"), py::arg("quad_nodes") = 0,
        "L2 projection of f(x, y) onto the hierarchical space");
  m.def("laplacian",
        [](std::shared_ptr<ElementSet> const &set, std::string const &flux) {
          return Eigen::SparseMatrix<cplx>(assemble_laplacian(set, FluxParams::from_name(flux)).matrix);
        },
        py::arg("set"), py::arg("flux") = "conservative");
  m.def("max_abs", &max_abs);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("tol", &SolverOptions::tol)
      .def_readwrite("max_iter", &SolverOptions::max_iter)
      .def_readwrite("restart", &SolverOptions::restart)
      .def_readwrite("direct_threshold", &SolverOptions::direct_threshold)
      .def_readwrite("krylov_budget", &SolverOptions::krylov_budget)
      .def_readwrite("adaptive_direct_threshold", &SolverOptions::adaptive_direct_threshold);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("problem", &RunConfig::problem)
      .def_readwrite("grid", &RunConfig::grid)
      .def_readwrite("N", &RunConfig::N)
      .def_readwrite("k", &RunConfig::k)
      .def_readwrite("flux", &RunConfig::flux)
      .def_readwrite("tableau", &RunConfig::tableau)
      .def_readwrite("epsilon", &RunConfig::epsilon)
      .def_readwrite("eta", &RunConfig::eta)
      .def_readwrite("aggregation", &RunConfig::aggregation)
      .def_readwrite("cfl", &RunConfig::cfl)
      .def_readwrite("exponent", &RunConfig::exponent)
      .def_readwrite("dt", &RunConfig::dt)
      .def_readwrite("t_final", &RunConfig::t_final)
      .def_readwrite("snapshots", &RunConfig::snapshots)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_readwrite("solver", &RunConfig::solver)
      .def_readwrite("guard", &RunConfig::guard)
      .def_readwrite("init_sweeps", &RunConfig::init_sweeps)
      .def("validate", &RunConfig::validate);

  py::class_<RunReport>(m, "RunReport")
      .def_property_readonly("status", [](RunReport const &r) { return r.status; })
      .def_readonly("message", &RunReport::message)
      .def_readonly("time", &RunReport::time)
      .def_readonly("dt", &RunReport::dt)
      .def_readonly("steps", &RunReport::steps)
      .def_readonly("state", &RunReport::state)
      .def_property_readonly("history",
                             [](RunReport const &r) { return history_array(r.history); },
                             "columns t, dof, norm, max|u|")
      .def_property_readonly("snapshots",
                             [](RunReport const &r) {
                               std::vector<std::pair<double, HierState>> out;
                               for (auto const &s : r.snapshots)
                                 out.emplace_back(s.t, s.state);
                               return out;
                             })
      .def_property_readonly("errors", [](RunReport const &r) {
        std::vector<std::pair<double, double>> out;
        for (auto const &e : r.errors)
          out.emplace_back(e.re, e.im);
        return out;
      });

  m.def("problem_names", &problem_names);
  m.def("default_config", &default_config, py::arg("problem"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("time_step", [](RunConfig const &cfg) { return time_step(cfg, make_problem(cfg.problem)); });
  m.def("initial_state", [](RunConfig const &cfg) { return initial_state(cfg, make_problem(cfg.problem)); });
  m.def("run",
        [](RunConfig const &cfg) {
          cfg.validate();
          auto const spec = make_problem(cfg.problem);
          py::gil_scoped_release release;
          return run(cfg, spec);
        },
        py::arg("config"));
  m.def("emit_outputs", &emit_outputs, py::arg("report"), py::arg("config"), py::arg("dir"));
  m.def("exact",
        [](std::string const &problem, double x, double y, double t) {
          auto const spec = make_problem(problem);
          if (!spec.has_exact())
            throw std::invalid_argument("no closed-form solution for " + problem);
          return spec.exact({x, y}, t);
        },
        py::arg("problem"), py::arg("x"), py::arg("y") = 0.0, py::arg("t") = 0.0);
  m.def("orders", &orders);
}
