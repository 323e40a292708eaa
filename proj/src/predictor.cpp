#include "radau_dae/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "radau_dae/errors.hpp"

namespace radau_dae {

std::string to_string(Reduction r) {
  switch (r) {
    case Reduction::full_block: return "full";
    case Reduction::via_r: return "via-r";
    case Reduction::via_s: return "via-s";
    case Reduction::automatic: return "auto";
  }
  return "unknown";
}

Reduction parse_reduction(const std::string& text) {
  if (text == "full" || text == "full_block") return Reduction::full_block;
  if (text == "via-r" || text == "via_r") return Reduction::via_r;
  if (text == "via-s" || text == "via_s") return Reduction::via_s;
  if (text == "auto") return Reduction::automatic;
  throw InvalidArgument("unknown reduction '" + text + "' (expected full, via-r, via-s or auto)");
}

SolverCounters& SolverCounters::operator+=(const SolverCounters& o) {
  f_evals += o.f_evals;
  g_evals += o.g_evals;
  jf_u_evals += o.jf_u_evals;
  jf_v_evals += o.jf_v_evals;
  jg_u_evals += o.jg_u_evals;
  jg_v_evals += o.jg_v_evals;
  lu_factorizations += o.lu_factorizations;
  block_factorizations += o.block_factorizations;
  newton_iterations += o.newton_iterations;
  return *this;
}

CellSolution initial_guess(std::span<const double> u_n, std::span<const double> v_n,
                           const BasisTables& tables) {
  const std::size_t n = tables.size();
  CellSolution c;
  c.q_hat = DenseMatrix(n, u_n.size());
  c.r_hat = DenseMatrix(n, v_n.size());
  for (std::size_t p = 0; p < n; ++p) {
    std::copy(u_n.begin(), u_n.end(), c.q_hat.row(p).begin());
    std::copy(v_n.begin(), v_n.end(), c.r_hat.row(p).begin());
  }
  return c;
}

DenseMatrix NewtonBlocks::full_matrix() const {
  const std::size_t nu = n_nodes * d_u, nv = n_nodes * d_v;
  DenseMatrix m(nu + nv, nu + nv);
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = 0; j < nu; ++j) m(i, j) = p(i, j);
    for (std::size_t j = 0; j < nv; ++j) m(i, nu + j) = q(i, j);
  }
  for (std::size_t k = 0; k < n_nodes; ++k)
    for (std::size_t i = 0; i < d_v; ++i) {
      for (std::size_t j = 0; j < d_u; ++j) m(nu + k * d_v + i, k * d_u + j) = r[k](i, j);
      for (std::size_t j = 0; j < d_v; ++j) m(nu + k * d_v + i, nu + k * d_v + j) = s[k](i, j);
    }
  return m;
}

Vector NewtonBlocks::full_rhs() const {
  Vector out(b);
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

NewtonBlocks assemble_newton_system(const DaeProblem& problem, const BasisTables& tables, double dt,
                                    double t_left, std::span<const double> u_n,
                                    const CellSolution& iterate, SolverCounters& counters) {
  const std::size_t n = tables.size(), du = problem.d_u, dv = problem.d_v;
  NewtonBlocks bl;
  bl.n_nodes = n;
  bl.d_u = du;
  bl.d_v = dv;
  bl.f_hat = DenseMatrix(n, du);
  bl.jf_u.resize(n);
  bl.jf_v.resize(n);
  bl.r.resize(n);
  bl.s.resize(n);
  bl.c.assign(n * dv, 0.0);

  for (std::size_t k = 0; k < n; ++k) {
    const double t = t_left + tables.nodes[k] * dt;
    const auto q = iterate.q_hat.row(k);
    const auto r = iterate.r_hat.row(k);
    const Vector f = problem.f(q, r, t);
    std::copy(f.begin(), f.end(), bl.f_hat.row(k).begin());
    bl.jf_u[k] = problem.jf_u(q, r, t);
    bl.jf_v[k] = problem.jf_v(q, r, t);
    ++counters.f_evals;
    ++counters.jf_u_evals;
    ++counters.jf_v_evals;
    if (dv > 0) {
      const Vector g = problem.g(q, r, t);
      for (std::size_t i = 0; i < dv; ++i) bl.c[k * dv + i] = -g[i];
      bl.r[k] = problem.jg_u(q, r, t);
      bl.s[k] = problem.jg_v(q, r, t);
    } else {
      bl.r[k] = DenseMatrix(0, du);
      bl.s[k] = DenseMatrix(0, 0);
    }
    ++counters.g_evals;
    ++counters.jg_u_evals;
    ++counters.jg_v_evals;
  }

  const auto& a = tables.a_matrix;
  bl.p = DenseMatrix(n * du, n * du);
  bl.q = DenseMatrix(n * du, n * dv);
  bl.b.assign(n * du, 0.0);
  for (std::size_t pp = 0; pp < n; ++pp) {
    for (std::size_t i = 0; i < du; ++i) {
      double acc = u_n[i] - iterate.q_hat(pp, i);
      for (std::size_t qq = 0; qq < n; ++qq) acc += a(pp, qq) * dt * bl.f_hat(qq, i);
      bl.b[pp * du + i] = acc;
    }
    for (std::size_t qq = 0; qq < n; ++qq) {
      const double s = a(pp, qq) * dt;
      for (std::size_t i = 0; i < du; ++i) {
        for (std::size_t j = 0; j < du; ++j) bl.p(pp * du + i, qq * du + j) = -s * bl.jf_u[qq](i, j);
        for (std::size_t j = 0; j < dv; ++j) bl.q(pp * du + i, qq * dv + j) = -s * bl.jf_v[qq](i, j);
      }
    }
    for (std::size_t i = 0; i < du; ++i) bl.p(pp * du + i, pp * du + i) += 1.0;
  }
  return bl;
}

double Increment::max_abs() const {
  return std::max(norm_inf(dq.entries()), norm_inf(dr.entries()));
}

namespace {

// Inverts each block, or reports why the reduction cannot be used.
std::vector<DenseMatrix> invert_blocks(const std::vector<DenseMatrix>& blocks, const char* name,
                                       SolverCounters* counters) {
  std::vector<DenseMatrix> inv;
  inv.reserve(blocks.size());
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const DenseMatrix& m = blocks[k];
    if (!m.square()) {
      throw ReductionInapplicable(std::string(name) + " blocks are not square");
    }
    try {
      const LuFactors f = lu_factor(m);
      if (counters) ++counters->block_factorizations;
      if (f.pivot_ratio() <= kBlockPivotRatio) {
        throw ReductionInapplicable(std::string(name) + " block at node " + std::to_string(k) +
                                    " is ill conditioned");
      }
      inv.push_back(lu_solve(f, DenseMatrix::identity(m.rows())));
    } catch (const SingularMatrix&) {
      throw ReductionInapplicable(std::string(name) + " block at node " + std::to_string(k) +
                                  " is singular");
    }
  }
  return inv;
}

}  // namespace

ReducedSystem reduce_via_s(const NewtonBlocks& bl, SolverCounters* counters) {
  const std::size_t n = bl.n_nodes, du = bl.d_u, dv = bl.d_v;
  ReducedSystem red;
  red.kind = Reduction::via_s;
  red.matrix = bl.p;
  red.rhs = bl.b;
  if (dv == 0) return red;
  red.block_inverses = invert_blocks(bl.s, "S", counters);

  // column node qq: S^-1 R (dv x du) and S^-1 c (dv)
  for (std::size_t qq = 0; qq < n; ++qq) {
    const DenseMatrix& sinv = red.block_inverses[qq];
    const DenseMatrix sr = multiply(sinv, bl.r[qq]);
    const Vector sc = multiply(sinv, std::span<const double>(bl.c).subspan(qq * dv, dv));
    for (std::size_t row = 0; row < n * du; ++row) {
      for (std::size_t j = 0; j < du; ++j) {
        double acc = 0.0;
        for (std::size_t l = 0; l < dv; ++l) acc += bl.q(row, qq * dv + l) * sr(l, j);
        red.matrix(row, qq * du + j) -= acc;
      }
      double acc = 0.0;
      for (std::size_t l = 0; l < dv; ++l) acc += bl.q(row, qq * dv + l) * sc[l];
      red.rhs[row] -= acc;
    }
  }
  return red;
}

ReducedSystem reduce_via_r(const NewtonBlocks& bl, SolverCounters* counters) {
  const std::size_t n = bl.n_nodes, du = bl.d_u, dv = bl.d_v;
  if (du != dv) {
    throw ReductionInapplicable("via-R needs d_u == d_v (have " + std::to_string(du) + " and " +
                                std::to_string(dv) + ")");
  }
  ReducedSystem red;
  red.kind = Reduction::via_r;
  red.matrix = bl.q;
  red.rhs = bl.b;
  red.block_inverses = invert_blocks(bl.r, "R", counters);

  for (std::size_t qq = 0; qq < n; ++qq) {
    const DenseMatrix& rinv = red.block_inverses[qq];
    const DenseMatrix rs = multiply(rinv, bl.s[qq]);
    const Vector rc = multiply(rinv, std::span<const double>(bl.c).subspan(qq * dv, dv));
    for (std::size_t row = 0; row < n * du; ++row) {
      for (std::size_t j = 0; j < dv; ++j) {
        double acc = 0.0;
        for (std::size_t l = 0; l < du; ++l) acc += bl.p(row, qq * du + l) * rs(l, j);
        red.matrix(row, qq * dv + j) -= acc;
      }
      double acc = 0.0;
      for (std::size_t l = 0; l < du; ++l) acc += bl.p(row, qq * du + l) * rc[l];
      red.rhs[row] -= acc;
    }
  }
  return red;
}

Increment back_substitute(const NewtonBlocks& bl, const ReducedSystem& red,
                          std::span<const double> x) {
  const std::size_t n = bl.n_nodes, du = bl.d_u, dv = bl.d_v;
  Increment inc{DenseMatrix(n, du), DenseMatrix(n, dv)};
  if (red.kind == Reduction::via_s) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < du; ++i) inc.dq(k, i) = x[k * du + i];
      if (dv == 0) continue;
      // dr_k = S_k^-1 (c_k - R_k dq_k)
      Vector rhs(dv);
      for (std::size_t i = 0; i < dv; ++i) {
        double acc = bl.c[k * dv + i];
        for (std::size_t j = 0; j < du; ++j) acc -= bl.r[k](i, j) * inc.dq(k, j);
        rhs[i] = acc;
      }
      const Vector dr = multiply(red.block_inverses[k], rhs);
      std::copy(dr.begin(), dr.end(), inc.dr.row(k).begin());
    }
  } else if (red.kind == Reduction::via_r) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < dv; ++i) inc.dr(k, i) = x[k * dv + i];
      // dq_k = R_k^-1 (c_k - S_k dr_k)
      Vector rhs(du);
      for (std::size_t i = 0; i < dv; ++i) {
        double acc = bl.c[k * dv + i];
        for (std::size_t j = 0; j < dv; ++j) acc -= bl.s[k](i, j) * inc.dr(k, j);
        rhs[i] = acc;
      }
      const Vector dq = multiply(red.block_inverses[k], rhs);
      std::copy(dq.begin(), dq.end(), inc.dq.row(k).begin());
    }
  } else {
    throw InvalidArgument("back_substitute: reduced system has no reduction kind");
  }
  return inc;
}

Increment solve_increment(const NewtonBlocks& bl, Reduction reduction, SolverCounters& counters) {
  const std::size_t n = bl.n_nodes, du = bl.d_u, dv = bl.d_v;
  switch (reduction) {
    case Reduction::via_s:
    case Reduction::via_r: {
      const ReducedSystem red =
          reduction == Reduction::via_s ? reduce_via_s(bl, &counters) : reduce_via_r(bl, &counters);
      const LuFactors f = lu_factor(red.matrix);
      ++counters.lu_factorizations;
      return back_substitute(bl, red, lu_solve(f, red.rhs));
    }
    case Reduction::full_block: {
      const LuFactors f = lu_factor(bl.full_matrix());
      ++counters.lu_factorizations;
      const Vector x = lu_solve(f, bl.full_rhs());
      Increment inc{DenseMatrix(n, du), DenseMatrix(n, dv)};
      std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n * du), inc.dq.entries().begin());
      std::copy(x.begin() + static_cast<std::ptrdiff_t>(n * du), x.end(), inc.dr.entries().begin());
      return inc;
    }
    case Reduction::automatic: break;
  }
  throw InvalidArgument("solve_increment needs a concrete reduction");
}

namespace {

bool blocks_invertible(const std::vector<DenseMatrix>& blocks) {
  for (const auto& m : blocks) {
    if (!m.square()) return false;
    try {
      if (lu_factor(m).pivot_ratio() <= kBlockPivotRatio) return false;
    } catch (const SingularMatrix&) {
      return false;
    }
  }
  return true;
}

}  // namespace

Reduction probe_reduction(const NewtonBlocks& bl) {
  const std::size_t size_s = bl.n_nodes * bl.d_u;
  const std::size_t size_r = bl.n_nodes * bl.d_v;
  const bool s_ok = blocks_invertible(bl.s);
  const bool r_ok = bl.d_u == bl.d_v && bl.d_v > 0 && blocks_invertible(bl.r);
  if (s_ok && r_ok) return size_r < size_s ? Reduction::via_r : Reduction::via_s;
  if (s_ok) return Reduction::via_s;
  if (r_ok) return Reduction::via_r;
  return Reduction::full_block;
}

double default_newton_tolerance(std::span<const double> u_n, std::span<const double> v_n) {
  return 1e-13 * (1.0 + std::max(norm_inf(u_n), norm_inf(v_n)));
}

NewtonResult newton_solve(const DaeProblem& problem, const BasisTables& tables, double dt,
                          double t_left, std::span<const double> u_n, std::span<const double> v_n,
                          const NewtonOptions& opts, SolverCounters& counters,
                          std::size_t cell_index) {
  const double tol = opts.tolerance.value_or(default_newton_tolerance(u_n, v_n));
  if (!(tol > 0.0)) throw InvalidArgument("newton tolerance must be positive");
  if (opts.max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");

  const std::size_t n = tables.size(), du = problem.d_u, dv = problem.d_v;
  NewtonResult res;
  res.cell = initial_guess(u_n, v_n, tables);
  res.cell.cell_index = cell_index;
  res.cell.t_left = t_left;
  res.cell.dt = dt;

  Reduction active = opts.reduction;
  int growth = 0;
  auto where = [&] {
    std::ostringstream os;
    os << "cell " << cell_index << " (t = " << t_left << ")";
    return os.str();
  };

  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    const NewtonBlocks bl = assemble_newton_system(problem, tables, dt, t_left, u_n, res.cell, counters);
    ++counters.newton_iterations;
    if (opts.reduction == Reduction::automatic && it == 1) active = probe_reduction(bl);
    res.trace.used = active;

    Increment inc;
    try {
      try {
        inc = solve_increment(bl, active, counters);
      } catch (const ReductionInapplicable&) {
        if (opts.reduction != Reduction::automatic) throw;
        active = Reduction::full_block;
        res.trace.used = active;
        inc = solve_increment(bl, active, counters);
      }
    } catch (const SingularMatrix& e) {
      throw SingularMatrix(where() + ": " + e.what());
    }

    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < du; ++i) res.cell.q_hat(k, i) += inc.dq(k, i);
      for (std::size_t i = 0; i < dv; ++i) res.cell.r_hat(k, i) += inc.dr(k, i);
    }
    // first-order update of F to the new iterate; exact for linear problems
    res.cell.f_hat = bl.f_hat;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < du; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < du; ++j) acc += bl.jf_u[k](i, j) * inc.dq(k, j);
        for (std::size_t j = 0; j < dv; ++j) acc += bl.jf_v[k](i, j) * inc.dr(k, j);
        res.cell.f_hat(k, i) += acc;
      }

    const double dx = inc.max_abs();
    if (!std::isfinite(dx)) {
      throw NonConvergence(where() + ": Newton increment is not finite", cell_index);
    }
    if (!res.trace.increments.empty() && dx > res.trace.increments.back()) {
      ++growth;
    } else {
      growth = 0;
    }
    res.trace.increments.push_back(dx);
    res.trace.iterations = it;
    if (dx <= tol) {
      res.trace.converged = true;
      return res;
    }
    // rounding floor: the increment stopped shrinking while already near the tolerance
    if (res.trace.increments.size() >= 2 && dx <= kStagnationFactor * tol &&
        dx > 0.5 * res.trace.increments[res.trace.increments.size() - 2]) {
      res.trace.converged = true;
      res.trace.stagnated = true;
      return res;
    }
    if (growth >= 3) {
      throw NonConvergence(where() + ": Newton increments grew for 3 consecutive iterations",
                           cell_index);
    }
  }
  std::ostringstream os;
  os << where() << ": Newton did not converge in " << opts.max_iterations
     << " iterations (last increment " << res.trace.increments.back() << ", tolerance " << tol << ")";
  throw NonConvergence(os.str(), cell_index);
}

}  // namespace radau_dae
