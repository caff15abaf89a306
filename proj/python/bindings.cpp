#include "nplap/analysis.hpp"
#include "nplap/commands.hpp"
#include "nplap/config.hpp"
#include "nplap/io.hpp"
#include "nplap/operator.hpp"
#include "nplap/profiles.hpp"
#include "nplap/solver.hpp"

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace nplap;

namespace {

// Vec and Mat carry a fixed maximum size, so they cross the boundary as plain lists.
Vec to_vec(const std::vector<double>& xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) v[static_cast<Eigen::Index>(i)] = xs[i];
  return v;
}

std::vector<double> from_vec(const Vec& v) { return {v.data(), v.data() + v.size()}; }

// Python holds grids through a mutable holder; the library never mutates them.
using PyGrid = std::shared_ptr<Grid>;
PyGrid to_py(const GridPtr& g) { return std::const_pointer_cast<Grid>(g); }

Mat to_mat(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Mat m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != n)
      throw InvalidArgument("matrix must be square");
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

EnvelopeMode envelope(const std::string& name, double eps_grad) {
  if (name == "regularized") return EnvelopeMode::regularized(eps_grad);
  if (name == "sub") return EnvelopeMode::sub_envelope();
  if (name == "super") return EnvelopeMode::super_envelope();
  throw InvalidArgument("unknown envelope mode '" + name + "' (regularized | sub | super)");
}

py::array_t<double> values_array(const ScalarField& u) {
  py::array_t<double> a(static_cast<py::ssize_t>(u.size()));
  std::copy(u.values().begin(), u.values().end(), a.mutable_data());
  return a;
}

py::dict solve_config(const std::string& text, int threads) {
  const Experiment ex = build_experiment(parse_experiment(text));
  SolveResult res;
  {
    py::gil_scoped_release release;
    res = run_solver(ex, threads);
  }
  py::dict out;
  out["values"] = values_array(res.u);
  out["report"] = dump_json(to_json(res.report));
  out["field"] = res.u;
  return out;
}

}  // namespace

PYBIND11_MODULE(_nplap, m) {
  m.doc() = "Finite-difference laboratory for degenerate normalized p-Laplacian equations";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<Grid, PyGrid>(m, "Grid")
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("spacing", &Grid::spacing)
      .def_property_readonly("node_count", &Grid::node_count)
      .def_property_readonly("interior_count", [](const Grid& g) { return g.interior_nodes().size(); })
      .def_property_readonly("boundary_count", [](const Grid& g) { return g.boundary_nodes().size(); })
      .def("positions",
           [](const Grid& g) {
             py::array_t<double> a({static_cast<py::ssize_t>(g.node_count()),
                                    static_cast<py::ssize_t>(g.dim())});
             auto w = a.mutable_unchecked<2>();
             for (std::size_t i = 0; i < g.node_count(); ++i) {
               const Vec x = g.position(i);
               for (int k = 0; k < g.dim(); ++k) w(static_cast<py::ssize_t>(i), k) = x[k];
             }
             return a;
           })
      .def("classes", [](const Grid& g) {
        py::array_t<std::uint8_t> a(static_cast<py::ssize_t>(g.node_count()));
        for (std::size_t i = 0; i < g.node_count(); ++i)
          a.mutable_data()[i] = static_cast<std::uint8_t>(g.node_class(i));
        return a;
      });

  m.def(
      "build_grid",
      [](int dim, double h, const std::vector<double>& center, double radius) {
        return to_py(build_grid(dim, h, center.empty() ? Vec(Vec::Zero(dim)) : to_vec(center), radius));
      },
      py::arg("dim"), py::arg("h"), py::arg("center") = std::vector<double>{},
      py::arg("radius") = 1.0);

  py::class_<ScalarField>(m, "ScalarField")
      .def(py::init([](const PyGrid& g, const std::vector<double>& values) {
             if (values.size() != g->node_count())
               throw InvalidArgument("value count does not match the grid");
             return ScalarField(g, values);
           }),
           py::arg("grid"), py::arg("values"))
      .def_property_readonly("grid", [](const ScalarField& u) { return to_py(u.grid_ptr()); })
      .def_property_readonly("tag", &ScalarField::tag)
      .def_property_readonly("values", &values_array)
      .def("sup_norm", &ScalarField::sup_norm)
      .def("__len__", &ScalarField::size);

  m.def(
      "sample",
      [](const std::function<double(std::vector<double>)>& fn, const PyGrid& g) {
        return sample([&](const Vec& x) { return fn(from_vec(x)); }, g);
      },
      py::arg("fn"), py::arg("grid"));

  m.def(
      "normalized_p_laplacian",
      [](const std::vector<double>& grad, const std::vector<std::vector<double>>& hess, double p,
         const std::string& mode, double eps_grad) {
        return normalized_p_laplacian(to_vec(grad), to_mat(hess), p, envelope(mode, eps_grad));
      },
      py::arg("grad"), py::arg("hess"), py::arg("p"), py::arg("mode") = "regularized",
      py::arg("eps_grad") = 1e-12);
  m.def(
      "pucci",
      [](const std::vector<std::vector<double>>& hess, double lambda, double Lambda, bool plus) {
        return pucci(to_mat(hess), lambda, Lambda, plus ? PucciSign::Plus : PucciSign::Minus);
      },
      py::arg("hess"), py::arg("lam"), py::arg("Lam"), py::arg("plus"));
  m.def(
      "gradient", [](const ScalarField& u, std::size_t node) { return from_vec(gradient(u, node)); },
      py::arg("u"), py::arg("node"));

  m.def("solve_config", &solve_config, py::arg("text"), py::arg("threads") = 0);
  m.def("comparison_check", &comparison_check, py::arg("u_sub"), py::arg("u_super"));

  m.def(
      "henon_constants",
      [](double theta, double p, double m_, double sigma) {
        const HenonConstants c = henon_constants(theta, p, m_, sigma);
        py::dict d;
        d["beta_hat"] = c.beta_hat;
        d["c_profile"] = c.c_profile;
        d["sigma_constraint_ok"] = c.sigma_constraint_ok;
        d["m_lower_bound_ok"] = c.m_lower_bound_ok;
        return d;
      },
      py::arg("theta"), py::arg("p"), py::arg("m"), py::arg("sigma") = 0.0);
  m.def(
      "reference_exponents",
      [](double p, double theta) { return dump_json(to_json(reference_exponents(p, theta))); },
      py::arg("p"), py::arg("theta"));
  m.def(
      "verify_profiles",
      [](const std::string& selector, double h_coarse) {
        nlohmann::json all = nlohmann::json::array();
        for (const auto& prof : profiles_for_selector(selector))
          all.push_back(to_json(verify_profile(prof, h_coarse)));
        return dump_json(all);
      },
      py::arg("selector") = "all", py::arg("h_coarse") = 1.0 / 64);

  m.def(
      "growth_exponent",
      [](const ScalarField& u, const std::vector<double>& x0, const std::vector<double>& radii) {
        return dump_json(to_json(growth_exponent(u, to_vec(x0), radii)));
      },
      py::arg("u"), py::arg("x0"), py::arg("radii"));
  m.def(
      "locate_extremum",
      [](const ScalarField& u, bool maximum) {
        return from_vec(locate_extremum(u, maximum ? Extremum::Max : Extremum::Min));
      },
      py::arg("u"), py::arg("maximum") = false);
  m.def("dyadic_radii", &dyadic_radii, py::arg("first"), py::arg("last"), py::arg("scale") = 1.0);

  m.def(
      "write_solution",
      [](const ScalarField& u, const std::string& stem) { write_solution(u, stem); },
      py::arg("u"), py::arg("stem"));
  m.def(
      "read_solution", [](const std::string& stem) { return read_solution(stem); },
      py::arg("stem"));
}
