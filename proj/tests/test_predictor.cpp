#include <doctest.h>

#include <cmath>
#include <numbers>

#include "radau_dae/errors.hpp"
#include "radau_dae/predictor.hpp"

using namespace radau_dae;

namespace {

using In = std::span<const double>;

DaeProblem dahlquist(double lambda) {
  DaeProblem p;
  p.name = "dahlquist";
  p.d_u = 1;
  p.u0 = {1.0};
  p.f = [lambda](In u, In, double) { return Vector{lambda * u[0]}; };
  p.g = [](In, In, double) { return Vector{}; };
  p.jf_u = [lambda](In, In, double) { return DenseMatrix{{lambda}}; };
  p.jf_v = [](In, In, double) { return DenseMatrix(1, 0); };
  p.jg_u = [](In, In, double) { return DenseMatrix(0, 1); };
  p.jg_v = [](In, In, double) { return DenseMatrix(0, 0); };
  return p;
}

// one scalar ODE u' = -u + v, one constraint 0 = a v - u with a tunable
DaeProblem scalar_index1(double a) {
  DaeProblem p;
  p.name = "scalar_index1";
  p.d_u = 1;
  p.d_v = 1;
  p.u0 = {a};
  p.v0 = {1.0};
  p.f = [](In u, In v, double) { return Vector{-u[0] + 0.5 * v[0]}; };
  p.g = [a](In u, In v, double) { return Vector{a * v[0] - u[0]}; };
  p.jf_u = [](In, In, double) { return DenseMatrix{{-1.0}}; };
  p.jf_v = [](In, In, double) { return DenseMatrix{{0.5}}; };
  p.jg_u = [](In, In, double) { return DenseMatrix{{-1.0}}; };
  p.jg_v = [a](In, In, double) { return DenseMatrix{{a}}; };
  return p;
}

CellSolution perturbed(const DaeProblem& p, const BasisTables& t, double scale) {
  CellSolution c = initial_guess(p.u0, p.v0, t);
  double k = 0.0;
  for (auto& x : c.q_hat.entries()) x += scale * std::sin(k += 1.3);
  for (auto& x : c.r_hat.entries()) x += scale * std::cos(k += 0.7);
  return c;
}

double rel_diff(const Increment& a, const Increment& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.dq.entries().size(); ++i) {
    num = std::max(num, std::abs(a.dq.entries()[i] - b.dq.entries()[i]));
    den = std::max(den, std::abs(b.dq.entries()[i]));
  }
  for (std::size_t i = 0; i < a.dr.entries().size(); ++i) {
    num = std::max(num, std::abs(a.dr.entries()[i] - b.dr.entries()[i]));
    den = std::max(den, std::abs(b.dr.entries()[i]));
  }
  return num / std::max(den, 1e-300);
}

}  // namespace

TEST_CASE("initial guess copies the node state") {
  const auto t1 = build_tables(1);
  const CellSolution c = initial_guess(Vector{1.0, 0.0}, Vector{1.0}, t1);
  CHECK(c.q_hat == DenseMatrix{{1.0, 0.0}, {1.0, 0.0}});
  CHECK(c.r_hat == DenseMatrix{{1.0}, {1.0}});
  const CellSolution d = initial_guess(Vector{2.0}, Vector{}, t1);
  CHECK(d.r_hat.cols() == 0);
  const CellSolution e = initial_guess(Vector{2.0, 3.0}, Vector{4.0}, build_tables(0));
  CHECK(e.q_hat.rows() == 1);
  CHECK(e.q_hat(0, 1) == 3.0);
}

TEST_CASE("reduction names") {
  CHECK(to_string(Reduction::via_s) == "via-s");
  CHECK(parse_reduction("full") == Reduction::full_block);
  CHECK(parse_reduction("via_r") == Reduction::via_r);
  CHECK(parse_reduction("auto") == Reduction::automatic);
  CHECK_THROWS_AS(parse_reduction("diagonal"), InvalidArgument);
}

TEST_CASE("Dahlquist N=0 assembly") {
  const DaeProblem p = dahlquist(-1.0);
  const auto t = build_tables(0);
  SolverCounters cnt;
  const auto bl = assemble_newton_system(p, t, 1.0, 0.0, p.u0, initial_guess(p.u0, {}, t), cnt);
  const DenseMatrix m = bl.full_matrix();
  REQUIRE(m.rows() == 1);
  CHECK(m(0, 0) == doctest::Approx(2.0));
  CHECK(bl.full_rhs()[0] == doctest::Approx(-1.0));
  const Increment inc = solve_increment(bl, Reduction::full_block, cnt);
  CHECK(inc.dq(0, 0) == doctest::Approx(-0.5));
}

TEST_CASE("Dahlquist N=1 converges to the stability function") {
  const DaeProblem p = dahlquist(-1.0);
  const auto t = build_tables(1);
  SolverCounters cnt;
  const auto res = newton_solve(p, t, 1.0, 0.0, p.u0, {}, NewtonOptions{}, cnt);
  CHECK(res.trace.converged);
  CHECK(res.cell.q_hat(0, 0) == doctest::Approx(8.0 / 11.0).epsilon(1e-14));
  CHECK(res.cell.q_hat(1, 0) == doctest::Approx(4.0 / 11.0).epsilon(1e-14));
  // linear problem: the second increment is already at rounding level
  REQUIRE(res.trace.increments.size() >= 2);
  CHECK(res.trace.increments[1] <= 1e-12);
}

TEST_CASE("demo_index1 block shapes") {
  const DaeProblem p = builtin_problems().make("demo_index1");
  const auto t = build_tables(1);
  SolverCounters cnt;
  const auto bl = assemble_newton_system(p, t, 0.1, 0.0, p.u0, initial_guess(p.u0, p.v0, t), cnt);
  REQUIRE(bl.r.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(bl.r[k] == DenseMatrix{{1.0, 0.0}});
    CHECK(bl.s[k] == DenseMatrix{{-1.0}});
  }
  CHECK(bl.p.rows() == 4);
  CHECK(bl.q.cols() == 2);
  CHECK(bl.full_matrix().rows() == 6);
  // the constant guess is consistent, so c vanishes
  for (double c : bl.c) CHECK(c == 0.0);
}

TEST_CASE("linear DAE converges in two iterations") {
  const DaeProblem p = builtin_problems().make("demo_index1");
  for (std::size_t n : {1u, 4u, 8u}) {
    const auto t = build_tables(n);
    SolverCounters cnt;
    NewtonOptions o;
    o.tolerance = 1e-12;
    const auto res = newton_solve(p, t, 0.4, 0.0, p.u0, p.v0, o, cnt);
    CHECK(res.trace.converged);
    CHECK(res.trace.iterations <= 2);
  }
}

TEST_CASE("counters per Newton iteration") {
  const DaeProblem p = builtin_problems().make("newton_demo");
  for (std::size_t n : {1u, 3u, 6u}) {
    for (Reduction r : {Reduction::full_block, Reduction::via_s}) {
      const auto t = build_tables(n);
      SolverCounters cnt;
      const auto bl = assemble_newton_system(p, t, 0.3, 0.0, p.u0, perturbed(p, t, 0.1), cnt);
      solve_increment(bl, r, cnt);
      CHECK(cnt.f_evals == n + 1);
      CHECK(cnt.g_evals == n + 1);
      CHECK(cnt.jf_u_evals == n + 1);
      CHECK(cnt.jf_v_evals == n + 1);
      CHECK(cnt.jg_u_evals == n + 1);
      CHECK(cnt.jg_v_evals == n + 1);
      CHECK(cnt.lu_factorizations == 1);
    }
  }
  // full solve: counts scale with iterations
  const auto t = build_tables(2);
  SolverCounters cnt;
  const auto res = newton_solve(p, t, 0.3, 0.0, p.u0, p.v0, NewtonOptions{}, cnt);
  CHECK(cnt.newton_iterations == res.trace.iterations);
  CHECK(cnt.f_evals == 3 * res.trace.iterations);
  CHECK(cnt.lu_factorizations == res.trace.iterations);
}

TEST_CASE("reductions agree with the full block system") {
  const auto& reg = builtin_problems();
  for (const std::string name : {"demo_index1", "pendulum_index1", "newton_demo", "flame",
                                 "double_pendulum_index1", "hessenberg_index1"}) {
    CAPTURE(name);
    const DaeProblem p = reg.make(name);
    for (std::size_t n : {1u, 3u, 5u}) {
      const auto t = build_tables(n);
      const double dt = name == "flame" ? 10.0 : 0.2;
      SolverCounters cnt;
      const auto bl = assemble_newton_system(p, t, dt, p.t0, p.u0, perturbed(p, t, 1e-2), cnt);
      const Increment full = solve_increment(bl, Reduction::full_block, cnt);
      CHECK(rel_diff(solve_increment(bl, Reduction::via_s, cnt), full) <= 1e-9);
      if (p.d_u == p.d_v) CHECK(rel_diff(solve_increment(bl, Reduction::via_r, cnt), full) <= 1e-9);
    }
  }
}

TEST_CASE("via-R on square blocks") {
  const DaeProblem p = scalar_index1(2.0);
  for (std::size_t n : {1u, 2u, 7u}) {
    const auto t = build_tables(n);
    SolverCounters cnt;
    const auto bl = assemble_newton_system(p, t, 0.5, 0.0, p.u0, perturbed(p, t, 0.3), cnt);
    const Increment full = solve_increment(bl, Reduction::full_block, cnt);
    CHECK(rel_diff(solve_increment(bl, Reduction::via_r, cnt), full) <= 1e-12);
    CHECK(rel_diff(solve_increment(bl, Reduction::via_s, cnt), full) <= 1e-12);
    const ReducedSystem rs = reduce_via_r(bl);
    CHECK(rs.matrix.rows() == n + 1);
  }
}

TEST_CASE("inapplicable reductions") {
  const auto t = build_tables(2);
  SolverCounters cnt;
  const DaeProblem demo = builtin_problems().make("demo_index1");
  const auto bl = assemble_newton_system(demo, t, 0.1, 0.0, demo.u0,
                                         initial_guess(demo.u0, demo.v0, t), cnt);
  CHECK_THROWS_AS(reduce_via_r(bl), ReductionInapplicable);  // d_u != d_v

  const DaeProblem h = builtin_problems().make("hessenberg_index2");
  const auto bh = assemble_newton_system(h, t, 0.1, 0.0, h.u0, initial_guess(h.u0, h.v0, t), cnt);
  CHECK_THROWS_AS(reduce_via_s(bh), ReductionInapplicable);  // dg1/dv vanishes
  CHECK(probe_reduction(bh) == Reduction::full_block);

  // zero R block
  const DaeProblem z = scalar_index1(1.0);
  DaeProblem zr = z;
  zr.jg_u = [](In, In, double) { return DenseMatrix{{0.0}}; };
  const auto bz = assemble_newton_system(zr, t, 0.1, 0.0, z.u0, initial_guess(z.u0, z.v0, t), cnt);
  CHECK_THROWS_AS(reduce_via_r(bz), ReductionInapplicable);
  CHECK(probe_reduction(bz) == Reduction::via_s);
}

TEST_CASE("pure ODE reduction is a no-op") {
  const DaeProblem p = builtin_problems().make("ode_harmonic");
  const auto t = build_tables(3);
  SolverCounters cnt;
  const auto bl = assemble_newton_system(p, t, 0.5, 0.0, p.u0, initial_guess(p.u0, p.v0, t), cnt);
  const ReducedSystem rs = reduce_via_s(bl);
  CHECK(rs.matrix == bl.p);
  CHECK(rel_diff(solve_increment(bl, Reduction::via_s, cnt),
                 solve_increment(bl, Reduction::full_block, cnt)) == 0.0);
}

TEST_CASE("automatic reduction picks the smallest system") {
  const auto t = build_tables(2);
  SolverCounters cnt;
  const DaeProblem p = builtin_problems().make("pendulum_index1");
  const auto bl = assemble_newton_system(p, t, 0.1, 0.0, p.u0, initial_guess(p.u0, p.v0, t), cnt);
  CHECK(probe_reduction(bl) == Reduction::via_s);
  const auto sq = scalar_index1(3.0);
  const auto bs = assemble_newton_system(sq, t, 0.1, 0.0, sq.u0, initial_guess(sq.u0, sq.v0, t), cnt);
  CHECK(probe_reduction(bs) != Reduction::full_block);
  const auto res = newton_solve(p, t, 0.1, 0.0, p.u0, p.v0, NewtonOptions{}, cnt);
  CHECK(res.trace.used == Reduction::via_s);
}

TEST_CASE("solved cells satisfy the predictor system") {
  const auto& reg = builtin_problems();
  for (const std::string name : {"newton_demo", "hessenberg_index1", "hessenberg_index2",
                                 "pendulum_index3", "pendulum_index1", "flame"}) {
    CAPTURE(name);
    const DaeProblem p = reg.make(name);
    const auto t = build_tables(4);
    const double dt = name == "flame" ? 100.0 : 0.1;
    SolverCounters cnt;
    const double tol = default_newton_tolerance(p.u0, p.v0);
    const auto res = newton_solve(p, t, dt, p.t0, p.u0, p.v0, NewtonOptions{}, cnt);
    REQUIRE(res.trace.converged);
    const auto& c = res.cell;
    for (std::size_t k = 0; k <= 4; ++k) {
      const double tk = p.t0 + t.nodes[k] * dt;
      const Vector g = p.g(c.q_hat.row(k), c.r_hat.row(k), tk);
      for (double x : g) CHECK(std::abs(x) <= 10 * tol);
      for (std::size_t i = 0; i < p.d_u; ++i) {
        double s = p.u0[i];
        for (std::size_t q = 0; q <= 4; ++q) {
          const Vector f = p.f(c.q_hat.row(q), c.r_hat.row(q), p.t0 + t.nodes[q] * dt);
          s += t.a_matrix(k, q) * dt * f[i];
        }
        CHECK(std::abs(c.q_hat(k, i) - s) <= 10 * tol);
      }
    }
  }
}

TEST_CASE("quadratic convergence tail") {
  const DaeProblem p = builtin_problems().make("newton_demo");
  for (std::size_t n : {2u, 4u, 8u}) {
    const auto t = build_tables(n);
    SolverCounters cnt;
    NewtonOptions o;
    o.tolerance = 1e-14;
    const auto res = newton_solve(p, t, 2 * std::numbers::pi / 10, 0.0, p.u0, p.v0, o, cnt);
    const auto& inc = res.trace.increments;
    for (std::size_t i = 0; i + 1 < inc.size(); ++i) {
      if (inc[i] < 1e-4 && inc[i + 1] > 1e-13) CHECK(inc[i + 1] <= std::pow(inc[i], 1.5));
    }
  }
}

TEST_CASE("non-convergence is reported with the cell") {
  const DaeProblem p = builtin_problems().make("newton_demo");
  const auto t = build_tables(3);
  SolverCounters cnt;
  NewtonOptions o;
  o.max_iterations = 2;
  o.tolerance = 1e-15;
  try {
    newton_solve(p, t, 0.6, 0.0, p.u0, p.v0, o, cnt, 7);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence& e) {
    CHECK(e.cell() == 7);
  }
}

TEST_CASE("singular Newton matrix is tagged") {
  DaeProblem p = scalar_index1(1.0);
  p.jg_u = [](In, In, double) { return DenseMatrix{{0.0}}; };
  p.jg_v = [](In, In, double) { return DenseMatrix{{0.0}}; };
  const auto t = build_tables(1);
  SolverCounters cnt;
  NewtonOptions o;
  o.reduction = Reduction::full_block;
  try {
    newton_solve(p, t, 0.1, 0.0, p.u0, Vector{1.5}, o, cnt, 3);
    FAIL("expected SingularMatrix");
  } catch (const SingularMatrix& e) {
    CHECK(std::string(e.what()).find("cell 3") != std::string::npos);
  }
}
