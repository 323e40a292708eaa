#include <doctest.h>

#include <cmath>
#include <numbers>

#include "radau_dae/dae_model.hpp"
#include "radau_dae/errors.hpp"

using namespace radau_dae;

namespace {

const std::vector<std::string> kBuiltins = {
    "ode_harmonic",         "demo_index1",          "newton_demo",
    "simple_index1",        "hessenberg_index1",    "hessenberg_index2",
    "hessenberg_index2_reduced1", "pendulum_index3", "pendulum_index2",
    "pendulum_index1",      "double_pendulum_index3", "double_pendulum_index2",
    "double_pendulum_index1", "flame"};

double max_abs(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("registry holds every built-in") {
  const auto& reg = builtin_problems();
  for (const auto& name : kBuiltins) {
    CAPTURE(name);
    CHECK(reg.contains(name));
    const DaeProblem p = reg.make(name);
    CHECK(p.name == name);
    CHECK(p.u0.size() == p.d_u);
    CHECK(p.v0.size() == p.d_v);
  }
  CHECK(reg.names().size() == kBuiltins.size());
}

TEST_CASE("unknown names and parameters") {
  const auto& reg = builtin_problems();
  CHECK_THROWS_AS(reg.make("no_such_problem"), UnknownProblem);
  try {
    reg.make("no_such_problem");
  } catch (const UnknownProblem& e) {
    CHECK(std::string(e.what()).find("pendulum_index3") != std::string::npos);
  }
  CHECK_THROWS_AS(reg.make("flame", {{"epsilon", 1.0}}), InvalidArgument);
  ProblemRegistry r;
  r.add({"a", "", {}, [](const ProblemParams&) { return DaeProblem{}; }});
  CHECK_THROWS_AS(r.add({"a", "", {}, [](const ProblemParams&) { return DaeProblem{}; }}),
                  InvalidArgument);
}

TEST_CASE("problem spec parsing") {
  const auto s = parse_problem_spec("flame,delta=1e-5");
  CHECK(s.name == "flame");
  CHECK(s.params.at("delta") == doctest::Approx(1e-5));
  const auto s2 = parse_problem_spec("name=flame,delta=1e-4");
  CHECK(s2.name == "flame");
  CHECK(parse_problem_spec("ode_harmonic").params.empty());
  CHECK_THROWS_AS(parse_problem_spec("flame,delta"), InvalidArgument);
  CHECK_THROWS_AS(parse_problem_spec("flame,delta=abc"), InvalidArgument);
}

TEST_CASE("pendulum initial state") {
  const DaeProblem p = builtin_problems().make("pendulum_index3");
  const double phi0 = std::numbers::pi / 4;
  CHECK(p.u0[0] == doctest::Approx(std::sin(phi0)));
  CHECK(p.u0[1] == doctest::Approx(-std::cos(phi0)));
  CHECK(p.u0[2] == 0.0);
  CHECK(p.u0[3] == 0.0);
  CHECK(p.v0[0] == doctest::Approx(std::cos(phi0)));
  CHECK(p.index == 3);
  const auto c = check_consistency(p);
  CHECK(c.constraint_residual <= 1e-15);
}

TEST_CASE("flame defaults and overrides") {
  const DaeProblem p = builtin_problems().make("flame");
  CHECK(p.t0 == 0.0);
  CHECK(p.tf == doctest::Approx(2e4));
  CHECK(p.u0[0] == doctest::Approx(1e-4));
  CHECK(p.v0[0] == doctest::Approx(1e-12));
  const DaeProblem q = builtin_problems().make_from_spec("flame,delta=1e-5");
  CHECK(q.tf == doctest::Approx(2e5));
  CHECK(q.u0[0] == doctest::Approx(1e-5));
}

TEST_CASE("pure ODE mode") {
  const DaeProblem p = builtin_problems().make("ode_harmonic");
  CHECK(p.d_v == 0);
  CHECK(p.g(p.u0, p.v0, 0.0).empty());
  CHECK(p.all_constraints().empty());
}

TEST_CASE("consistency checks") {
  const auto& reg = builtin_problems();
  CHECK(check_consistency(reg.make("demo_index1")).constraint_residual == 0.0);
  for (const auto& name : kBuiltins) {
    CAPTURE(name);
    const auto c = check_consistency(reg.make(name));
    CHECK(c.ok());
    CHECK(c.constraint_residual <= kConsistencyTolerance);
    CHECK(c.jacobian_deviation <= kJacobianTolerance);
  }
}

TEST_CASE("corrupted initial data is flagged") {
  DaeProblem p = builtin_problems().make("pendulum_index3");
  p.v0[0] += 0.5;
  DaeProblem q = builtin_problems().make("simple_index1");
  q.v0[0] = 2.0;
  CHECK(check_consistency(q).constraint_residual > 1.0);
  CHECK_FALSE(check_consistency(q).ok());
  // the index-3 position constraint does not involve v
  CHECK(check_consistency(p).ok());
}

TEST_CASE("wrong Jacobian is flagged") {
  DaeProblem p = builtin_problems().make("demo_index1");
  p.jf_u = [](std::span<const double>, std::span<const double>, double) {
    return DenseMatrix{{0.0, 2.0}, {0.0, 0.0}};
  };
  const auto c = check_consistency(p);
  CHECK_FALSE(c.jacobians_match);
  CHECK(c.jacobian_deviation > 0.1);
}

TEST_CASE("finite-difference fallback") {
  DaeProblem p = builtin_problems().make("hessenberg_index1");
  const DaeProblem ref = p;
  p.jf_u = nullptr;
  p.jg_v = nullptr;
  const DaeProblem q = with_finite_difference_jacobians(p);
  const DenseMatrix a = q.jf_u(q.u0, q.v0, 0.3);
  const DenseMatrix b = ref.jf_u(ref.u0, ref.v0, 0.3);
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    CHECK(std::abs(a.entries()[i] - b.entries()[i]) <= 1e-7);
  CHECK(check_consistency(q).ok());
}

TEST_CASE("index-reduced variants share F and initial data") {
  const auto& reg = builtin_problems();
  const std::vector<std::vector<std::string>> families = {
      {"pendulum_index3", "pendulum_index2", "pendulum_index1"},
      {"double_pendulum_index3", "double_pendulum_index2", "double_pendulum_index1"},
      {"hessenberg_index2", "hessenberg_index2_reduced1"}};
  for (const auto& fam : families) {
    const DaeProblem base = reg.make(fam[0]);
    for (std::size_t i = 1; i < fam.size(); ++i) {
      const DaeProblem p = reg.make(fam[i]);
      CHECK(p.u0 == base.u0);
      CHECK(p.v0 == base.v0);
      CHECK(p.t0 == base.t0);
      CHECK(p.tf == base.tf);
      const Vector fu = p.f(p.u0, p.v0, 0.37), fb = base.f(base.u0, base.v0, 0.37);
      CHECK(fu == fb);
      CHECK(p.all_constraints().size() == base.all_constraints().size());
    }
  }
}

TEST_CASE("exact solutions satisfy the equations") {
  const auto& reg = builtin_problems();
  for (const auto& name : kBuiltins) {
    const DaeProblem p = reg.make(name);
    if (!p.exact) continue;
    CAPTURE(name);
    const double span = p.tf - p.t0;
    for (int i = 1; i <= 20; ++i) {
      const double t = p.t0 + span * (i - 0.5) / 20.0;
      const double h = 1e-5 * std::max(1.0, span / 20.0);
      const State s = p.exact(t);
      const State sp = p.exact(t + h), sm = p.exact(t - h);
      const Vector f = p.f(s.u, s.v, t);
      Vector resid(p.d_u);
      for (std::size_t k = 0; k < p.d_u; ++k) resid[k] = (sp.u[k] - sm.u[k]) / (2 * h) - f[k];
      CHECK(max_abs(resid) <= 1e-8);
      for (const auto& c : p.all_constraints()) CHECK(max_abs(c.eval(s.u, s.v, t)) <= 1e-9);
    }
  }
}

TEST_CASE("constraint labels") {
  const auto& reg = builtin_problems();
  const auto labels = [&](const std::string& n) {
    std::vector<std::string> out;
    for (const auto& c : reg.make(n).all_constraints()) out.push_back(c.label);
    return out;
  };
  CHECK(labels("pendulum_index3") == std::vector<std::string>{"g1", "g2", "g3"});
  CHECK(labels("pendulum_index1") == std::vector<std::string>{"g3", "g1", "g2"});
  CHECK(labels("hessenberg_index2_reduced1").front() == "g2");
  CHECK(labels("flame") == std::vector<std::string>{"g1"});
}
