#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "radau_dae/analysis.hpp"
#include "radau_dae/basis.hpp"
#include "radau_dae/dae_model.hpp"
#include "radau_dae/errors.hpp"
#include "radau_dae/predictor.hpp"
#include "radau_dae/reference.hpp"
#include "radau_dae/stepper.hpp"

namespace py = pybind11;
using namespace radau_dae;

namespace {

py::array_t<double> to_numpy(const DenseMatrix& m) {
  py::array_t<double> a({m.rows(), m.cols()});
  auto v = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) v(i, j) = m(i, j);
  return a;
}

py::array_t<double> to_numpy(const Vector& x) { return py::array_t<double>(x.size(), x.data()); }

py::dict counters_dict(const SolverCounters& c) {
  py::dict d;
  d["f_evals"] = c.f_evals;
  d["g_evals"] = c.g_evals;
  d["jf_u_evals"] = c.jf_u_evals;
  d["jf_v_evals"] = c.jf_v_evals;
  d["jg_u_evals"] = c.jg_u_evals;
  d["jg_v_evals"] = c.jg_v_evals;
  d["lu_factorizations"] = c.lu_factorizations;
  d["block_factorizations"] = c.block_factorizations;
  d["newton_iterations"] = c.newton_iterations;
  return d;
}

NewtonOptions make_options(std::optional<double> tol, std::size_t max_iters, const std::string& reduction) {
  NewtonOptions o;
  o.tolerance = tol;
  o.max_iterations = max_iters;
  o.reduction = parse_reduction(reduction);
  return o;
}

py::dict tables_dict(std::size_t degree) {
  const BasisTables t = build_tables(degree);
  py::dict d;
  d["degree"] = t.degree;
  d["nodes"] = to_numpy(t.nodes);
  d["weights"] = to_numpy(t.weights);
  d["a_matrix"] = to_numpy(t.a_matrix);
  d["k_matrix"] = to_numpy(t.k_matrix);
  d["k_inv"] = to_numpy(t.k_inv);
  d["conditioning_guaranteed"] = t.conditioning_guaranteed;
  return d;
}

py::dict solve_py(const std::string& spec, std::size_t degree, const std::string& grid,
                  std::optional<double> tol, std::size_t max_iters, const std::string& reduction,
                  std::size_t subnodes) {
  const DaeProblem p = builtin_problems().make_from_spec(spec);
  const GridSpec g = grid.empty() ? GridSpec::uniform(p.t0, p.tf, 10) : GridSpec::parse(grid);
  const NewtonOptions opts = make_options(tol, max_iters, reduction);
  const BasisTables tables = build_tables(degree);

  SolveReport r;
  Trajectory local;
  std::optional<ErrorSeries> errors;
  {
    py::gil_scoped_release release;
    r = solve(p, g, tables, opts);
    if (subnodes > 0) local = tabulate_local(r, tables, subnodes);
    if (p.exact) errors = pointwise_errors(p, r, tables, p.exact, subnodes > 0 ? subnodes : 1);
  }

  py::dict d;
  d["problem"] = r.problem;
  d["degree"] = r.degree;
  d["ok"] = r.ok();
  d["t"] = to_numpy(r.node_t);
  d["u"] = to_numpy(r.node_u);
  d["v"] = to_numpy(r.node_v);
  d["counters"] = counters_dict(r.counters);
  std::vector<std::size_t> iters;
  for (const auto& tr : r.traces) iters.push_back(tr.iterations);
  d["iterations"] = iters;
  py::list failures;
  for (const auto& f : r.failures) {
    py::dict fd;
    fd["cell"] = f.cell;
    fd["t_left"] = f.t_left;
    fd["message"] = f.message;
    failures.append(fd);
  }
  d["failures"] = failures;
  if (subnodes > 0) {
    py::dict ld;
    ld["t"] = to_numpy(local.t);
    ld["u"] = to_numpy(local.u);
    ld["v"] = to_numpy(local.v);
    d["local"] = ld;
  }
  if (errors) {
    py::dict ed;
    ed["node_u"] = to_numpy(extract(errors->nodes, Quantity::u));
    ed["node_v"] = to_numpy(extract(errors->nodes, Quantity::v));
    ed["node_g"] = to_numpy(extract(errors->nodes, Quantity::g));
    ed["local_u"] = to_numpy(extract(errors->local, Quantity::u));
    d["errors"] = ed;
  }
  return d;
}

py::list convergence_py(const std::string& spec, std::size_t degree, const std::vector<std::string>& grids,
                        std::size_t subnodes) {
  const DaeProblem p = builtin_problems().make_from_spec(spec);
  std::vector<GridSpec> gs;
  for (const auto& g : grids) gs.push_back(GridSpec::parse(g));
  StudyOptions so;
  so.subnodes = subnodes;
  ConvergenceStudy s;
  {
    py::gil_scoped_release release;
    s = convergence_study(p, degree, gs, so);
  }
  py::list rows;
  for (const auto& row : s.rows) {
    py::dict d;
    d["target"] = to_string(row.target);
    d["norm"] = to_string(row.norm);
    d["p"] = row.fit ? py::cast(row.fit->order) : py::none();
    d["samples_used"] = row.fit ? row.fit->used : 0;
    d["note"] = row.note;
    rows.append(d);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ADER-DG integrator for differential-algebraic systems";

  auto base = py::register_exception<Error>(m, "RadauDaeError", PyExc_RuntimeError);
  py::register_exception<UnknownProblem>(m, "UnknownProblem", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<NonConvergence>(m, "NonConvergence", base.ptr());
  py::register_exception<SingularMatrix>(m, "SingularMatrix", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());

  m.def("build_tables", &tables_dict, py::arg("degree"),
        "Radau nodes, weights, A, K and K^-1 for the given degree.");
  m.def("radau_nodes", &radau_nodes, py::arg("s"));
  m.def(
      "stability_R",
      [](std::size_t degree, Complex z) { return stability_R(build_tables(degree), z); },
      py::arg("degree"), py::arg("z"));
  m.def(
      "problems",
      [] {
        py::list out;
        for (const auto& e : builtin_problems().entries()) {
          py::dict d;
          d["name"] = e.name;
          d["description"] = e.description;
          d["defaults"] = e.defaults;
          out.append(d);
        }
        return out;
      },
      "Built-in problems with their default parameters.");
  m.def("solve", &solve_py, py::arg("problem"), py::arg("degree"), py::arg("grid") = "",
        py::arg("newton_tol") = py::none(), py::arg("newton_max_iters") = 50,
        py::arg("reduction") = "auto", py::arg("subnodes") = 0,
        "Solve a built-in problem; grid uses start:end:cells[,...] and defaults to 10 cells.");
  m.def("convergence", &convergence_py, py::arg("problem"), py::arg("degree"), py::arg("grids"),
        py::arg("subnodes") = 50, "Fitted orders per target and norm over a grid family.");

  m.def("lambert_w", &lambert_w, py::arg("x"));
  m.def("lambert_w_log", &lambert_w_log, py::arg("y"));
  m.def("elliptic_k", &elliptic_k, py::arg("k"));
  m.def(
      "jacobi_sn_cn_dn",
      [](double u, double k) {
        const JacobiValues j = jacobi_sn_cn_dn(u, k);
        return py::make_tuple(j.sn, j.cn, j.dn);
      },
      py::arg("u"), py::arg("k"));
  m.def(
      "flame_exact",
      [](double t, double delta) {
        const State s = flame_exact(t, delta);
        return py::make_tuple(s.u[0], s.v[0]);
      },
      py::arg("t"), py::arg("delta"));
  m.def(
      "pendulum_exact",
      [](double t, double phi0, double g) {
        const State s = pendulum_exact(t, phi0, g);
        return py::make_tuple(s.u, s.v);
      },
      py::arg("t"), py::arg("phi0"), py::arg("g") = 1.0);
}
