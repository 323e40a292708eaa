// Built-in DAE systems. u holds positions then velocities; v the algebraic unknowns.
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include "radau_dae/dae_model.hpp"
#include "radau_dae/errors.hpp"
#include "radau_dae/reference.hpp"

namespace radau_dae {

namespace {

using In = std::span<const double>;

DenseMatrix zeros(std::size_t r, std::size_t c) { return DenseMatrix(r, c); }

JacobianEvaluator constant(DenseMatrix m) {
  return [m = std::move(m)](In, In, double) { return m; };
}

Evaluator no_constraint() {
  return [](In, In, double) { return Vector{}; };
}

double param(const ProblemParams& p, const char* key) { return p.at(key); }

// ---- pure ODE and simple index-1 systems

DaeProblem ode_harmonic(const ProblemParams&) {
  DaeProblem p;
  p.name = "ode_harmonic";
  p.description = "harmonic oscillator u1' = u2, u2' = -u1 as a pure ODE";
  p.d_u = 2;
  p.t0 = 0.0;
  p.tf = 4.0 * std::numbers::pi;
  p.u0 = {1.0, 0.0};
  p.f = [](In u, In, double) { return Vector{u[1], -u[0]}; };
  p.g = no_constraint();
  p.jf_u = constant(DenseMatrix{{0.0, 1.0}, {-1.0, 0.0}});
  p.jf_v = constant(zeros(2, 0));
  p.jg_u = constant(zeros(0, 2));
  p.jg_v = constant(zeros(0, 0));
  p.exact = [](double t) { return State{{std::cos(t), -std::sin(t)}, {}}; };
  p.constraint_label = "";
  p.index = 0;
  return p;
}

DaeProblem demo_index1(const ProblemParams&) {
  DaeProblem p;
  p.name = "demo_index1";
  p.description = "linear oscillator with algebraic copy v1 = u1";
  p.d_u = 2;
  p.d_v = 1;
  p.t0 = 0.0;
  p.tf = 40.0 * std::numbers::pi;
  p.u0 = {1.0, 0.0};
  p.v0 = {1.0};
  p.f = [](In u, In v, double) { return Vector{u[1], -v[0]}; };
  p.g = [](In u, In v, double) { return Vector{u[0] - v[0]}; };
  p.jf_u = constant(DenseMatrix{{0.0, 1.0}, {0.0, 0.0}});
  p.jf_v = constant(DenseMatrix{{0.0}, {-1.0}});
  p.jg_u = constant(DenseMatrix{{1.0, 0.0}});
  p.jg_v = constant(DenseMatrix{{-1.0}});
  p.exact = [](double t) { return State{{std::cos(t), -std::sin(t)}, {std::cos(t)}}; };
  p.index = 1;
  return p;
}

DaeProblem circle_index1(const std::string& name, const ProblemParams&) {
  DaeProblem p;
  p.name = name;
  p.description = "x'' + x = z - 1, y'' + y = 1 - z, x^2 + y^2 = z^2";
  p.d_u = 4;
  p.d_v = 1;
  p.t0 = 0.0;
  p.tf = 2.0 * std::numbers::pi;
  p.u0 = {1.0, 0.0, 0.0, 1.0};
  p.v0 = {1.0};
  p.f = [](In u, In v, double) {
    return Vector{u[2], u[3], -u[0] + v[0] - 1.0, -u[1] + 1.0 - v[0]};
  };
  p.g = [](In u, In v, double) { return Vector{u[0] * u[0] + u[1] * u[1] - v[0] * v[0]}; };
  p.jf_u = constant(DenseMatrix{{0, 0, 1, 0}, {0, 0, 0, 1}, {-1, 0, 0, 0}, {0, -1, 0, 0}});
  p.jf_v = constant(DenseMatrix{{0}, {0}, {1}, {-1}});
  p.jg_u = [](In u, In, double) { return DenseMatrix{{2.0 * u[0], 2.0 * u[1], 0.0, 0.0}}; };
  p.jg_v = [](In, In v, double) { return DenseMatrix{{-2.0 * v[0]}}; };
  p.exact = [](double t) {
    return State{{std::cos(t), std::sin(t), -std::sin(t), std::cos(t)}, {1.0}};
  };
  p.constraint_label = "g1";
  p.extra_constraints = {{"g2", [](In, In v, double) { return Vector{v[0] - 1.0}; }}};
  p.index = 1;
  return p;
}

// ---- Hessenberg systems

DaeProblem hessenberg_index1(const ProblemParams&) {
  DaeProblem p;
  p.name = "hessenberg_index1";
  p.description = "Hessenberg system of index 1 with exact solution x = t cos(t^2 + t)";
  p.d_u = 4;
  p.d_v = 1;
  p.t0 = 0.0;
  p.tf = 1.0;
  p.u0 = {0.0, 0.0, 1.0, 2.0};
  p.v0 = {0.0};
  p.f = [](In u, In v, double t) {
    return Vector{u[2], u[3], -u[0] * (4.0 * v[0] + 1.0) - u[1] * (3.0 * t + 1.0),
                  -u[1] * (4.0 * v[0] + 1.0) + 4.0 * std::cos(v[0])};
  };
  p.g = [](In u, In v, double t) {
    return Vector{4.0 * u[0] * std::cos(v[0]) + t * u[1] * u[1] - 4.0 * (v[0] - t * t)};
  };
  p.jf_u = [](In, In v, double t) {
    const double a = -(4.0 * v[0] + 1.0);
    return DenseMatrix{{0, 0, 1, 0}, {0, 0, 0, 1}, {a, -(3.0 * t + 1.0), 0, 0}, {0, a, 0, 0}};
  };
  p.jf_v = [](In u, In v, double) {
    return DenseMatrix{{0}, {0}, {-4.0 * u[0]}, {-4.0 * u[1] - 4.0 * std::sin(v[0])}};
  };
  p.jg_u = [](In u, In v, double t) {
    return DenseMatrix{{4.0 * std::cos(v[0]), 2.0 * t * u[1], 0.0, 0.0}};
  };
  p.jg_v = [](In u, In v, double) { return DenseMatrix{{-4.0 * u[0] * std::sin(v[0]) - 4.0}}; };
  p.exact = [](double t) {
    const double s = t * t + t, c = std::cos(s), sn = std::sin(s);
    return State{{t * c, 2.0 * sn, c - t * (2.0 * t + 1.0) * sn, 2.0 * (2.0 * t + 1.0) * c}, {s}};
  };
  p.constraint_label = "g1";
  p.extra_constraints = {{"g2", [](In, In v, double t) { return Vector{v[0] - t * t - t}; }}};
  p.index = 1;
  return p;
}

Vector hess2_g1(In u, In, double t) { return Vector{u[0] * u[0] + t * t * (u[1] * u[1] - 1.0)}; }

Vector hess2_g2(In u, In, double t) {
  return Vector{u[0] * u[2] + t * t * u[1] * u[3] + t * (u[1] * u[1] - 1.0)};
}

DaeProblem hessenberg_index2(const std::string& name, bool reduced) {
  DaeProblem p;
  p.name = name;
  p.description = reduced ? "Hessenberg system of index 2, constraint replaced by its derivative g2"
                          : "Hessenberg system of index 2 with position constraint g1";
  p.d_u = 4;
  p.d_v = 1;
  p.t0 = 0.0;
  p.tf = 1.0;
  p.u0 = {0.0, 1.0, 0.0, 0.0};
  p.v0 = {0.0};
  p.f = [](In u, In v, double t) {
    return Vector{u[2], u[3], u[0] * (4.0 * v[0] - 1.0) + 2.0 * (1.0 - 3.0 * t) * u[1],
                  u[1] * (4.0 * v[0] - 1.0) + 2.0 * std::sin(v[0])};
  };
  p.jf_u = [](In, In v, double t) {
    const double a = 4.0 * v[0] - 1.0;
    return DenseMatrix{{0, 0, 1, 0}, {0, 0, 0, 1}, {a, 2.0 * (1.0 - 3.0 * t), 0, 0}, {0, a, 0, 0}};
  };
  p.jf_v = [](In u, In v, double) {
    return DenseMatrix{{0}, {0}, {4.0 * u[0]}, {4.0 * u[1] + 2.0 * std::cos(v[0])}};
  };
  const Evaluator g1 = hess2_g1, g2 = hess2_g2;
  if (reduced) {
    p.g = g2;
    p.jg_u = [](In u, In, double t) {
      return DenseMatrix{{u[2], t * t * u[3] + 2.0 * t * u[1], u[0], t * t * u[1]}};
    };
    p.constraint_label = "g2";
    p.extra_constraints = {{"g1", g1}};
    p.index = 1;
  } else {
    p.g = g1;
    p.jg_u = [](In u, In, double t) { return DenseMatrix{{2.0 * u[0], 2.0 * t * t * u[1], 0.0, 0.0}}; };
    p.constraint_label = "g1";
    p.extra_constraints = {{"g2", g2}};
    p.index = 2;
  }
  p.jg_v = constant(zeros(1, 1));
  p.exact = [](double t) {
    const double s = t - t * t, c = std::cos(s), sn = std::sin(s);
    return State{{t * sn, c, sn + t * (1.0 - 2.0 * t) * c, -(1.0 - 2.0 * t) * sn}, {s}};
  };
  return p;
}

// ---- mathematical pendulum

DaeProblem pendulum(int index, const ProblemParams& prm) {
  const double phi0 = param(prm, "phi0"), g = param(prm, "g");
  if (!(std::abs(phi0) < std::numbers::pi) || !(g > 0.0)) {
    throw InvalidArgument("pendulum needs |phi0| < pi and g > 0");
  }
  DaeProblem p;
  p.name = "pendulum_index" + std::to_string(index);
  p.description = "mathematical pendulum in Cartesian coordinates, constraint g" +
                  std::to_string(4 - index);
  p.d_u = 4;
  p.d_v = 1;
  p.t0 = 0.0;
  p.tf = 10.0;
  p.u0 = {std::sin(phi0), -std::cos(phi0), 0.0, 0.0};
  p.v0 = {g * std::cos(phi0)};
  p.f = [g](In u, In v, double) { return Vector{u[2], u[3], -u[0] * v[0], -u[1] * v[0] - g}; };
  p.jf_u = [](In, In v, double) {
    return DenseMatrix{{0, 0, 1, 0}, {0, 0, 0, 1}, {-v[0], 0, 0, 0}, {0, -v[0], 0, 0}};
  };
  p.jf_v = [](In u, In, double) { return DenseMatrix{{0}, {0}, {-u[0]}, {-u[1]}}; };

  const Evaluator g1 = [](In u, In, double) { return Vector{u[0] * u[0] + u[1] * u[1] - 1.0}; };
  const Evaluator g2 = [](In u, In, double) { return Vector{u[0] * u[2] + u[1] * u[3]}; };
  const Evaluator g3 = [g](In u, In v, double) {
    return Vector{u[2] * u[2] + u[3] * u[3] - v[0] * (u[0] * u[0] + u[1] * u[1]) - g * u[1]};
  };
  const std::vector<LabelledConstraint> all = {{"g1", g1}, {"g2", g2}, {"g3", g3}};
  const std::size_t enforced = static_cast<std::size_t>(3 - index);
  p.g = all[enforced].eval;
  p.constraint_label = all[enforced].label;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (i != enforced) p.extra_constraints.push_back(all[i]);

  switch (index) {
    case 3:
      p.jg_u = [](In u, In, double) { return DenseMatrix{{2.0 * u[0], 2.0 * u[1], 0.0, 0.0}}; };
      p.jg_v = constant(zeros(1, 1));
      break;
    case 2:
      p.jg_u = [](In u, In, double) { return DenseMatrix{{u[2], u[3], u[0], u[1]}}; };
      p.jg_v = constant(zeros(1, 1));
      break;
    default:
      p.jg_u = [g](In u, In v, double) {
        return DenseMatrix{{-2.0 * v[0] * u[0], -2.0 * v[0] * u[1] - g, 2.0 * u[2], 2.0 * u[3]}};
      };
      p.jg_v = [](In u, In, double) { return DenseMatrix{{-(u[0] * u[0] + u[1] * u[1])}}; };
      break;
  }
  p.exact = [phi0, g](double t) { return pendulum_exact(t, phi0, g); };
  p.index = index;
  return p;
}

// ---- double pendulum

Vector dp_g1(In u, In, double) {
  const double d1 = u[0] - u[2], d2 = u[1] - u[3];
  return Vector{u[0] * u[0] + u[1] * u[1] - 1.0, d1 * d1 + d2 * d2 - 1.0};
}

Vector dp_g2(In u, In, double) {
  const double d1 = u[0] - u[2], d2 = u[1] - u[3], e1 = u[4] - u[6], e2 = u[5] - u[7];
  return Vector{u[0] * u[4] + u[1] * u[5], d1 * e1 + d2 * e2};
}

Evaluator dp_g3(double g) {
  return [g](In u, In v, double) {
    const double d1 = u[0] - u[2], d2 = u[1] - u[3], e1 = u[4] - u[6], e2 = u[5] - u[7];
    return Vector{u[4] * u[4] + u[5] * u[5] - g * u[1] - v[0] * (u[0] * u[0] + u[1] * u[1]) -
                      v[1] * (u[0] * d1 + u[1] * d2),
                  e1 * e1 + e2 * e2 - d1 * (v[0] * u[0] + 2.0 * v[1] * d1) -
                      d2 * (v[0] * u[1] + 2.0 * v[1] * d2)};
  };
}

// Lazily built reference shared by all copies of one registered problem.
struct LazyDoublePendulum {
  double phi10, phi20, g, tf;
  std::once_flag once;
  std::shared_ptr<const DoublePendulumReference> ref;

  const DoublePendulumReference& get() {
    std::call_once(once, [this] { ref = double_pendulum_reference(phi10, phi20, g, tf); });
    return *ref;
  }
};

DaeProblem double_pendulum(int index, const ProblemParams& prm) {
  const double phi1 = param(prm, "phi1"), phi2 = param(prm, "phi2"), g = param(prm, "g");
  if (!(g > 0.0)) throw InvalidArgument("double pendulum needs g > 0");
  DaeProblem p;
  p.name = "double_pendulum_index" + std::to_string(index);
  p.description = "planar double pendulum with unit masses and lengths, constraints g" +
                  std::to_string(4 - index) + "1/g" + std::to_string(4 - index) + "2";
  p.d_u = 8;
  p.d_v = 2;
  p.t0 = 0.0;
  p.tf = 20.0;
  const State s0 = double_pendulum_state({phi1, phi2, 0.0, 0.0}, g);
  p.u0 = s0.u;
  p.v0 = s0.v;
  p.f = [g](In u, In v, double) {
    const double d1 = u[0] - u[2], d2 = u[1] - u[3];
    return Vector{u[4], u[5], u[6], u[7], -v[0] * u[0] - v[1] * d1, -v[0] * u[1] - v[1] * d2 - g,
                  v[1] * d1, v[1] * d2 - g};
  };
  p.jf_u = [](In, In v, double) {
    DenseMatrix j(8, 8);
    for (std::size_t i = 0; i < 4; ++i) j(i, i + 4) = 1.0;
    j(4, 0) = -v[0] - v[1];
    j(4, 2) = v[1];
    j(5, 1) = -v[0] - v[1];
    j(5, 3) = v[1];
    j(6, 0) = v[1];
    j(6, 2) = -v[1];
    j(7, 1) = v[1];
    j(7, 3) = -v[1];
    return j;
  };
  p.jf_v = [](In u, In, double) {
    DenseMatrix j(8, 2);
    j(4, 0) = -u[0];
    j(4, 1) = -(u[0] - u[2]);
    j(5, 0) = -u[1];
    j(5, 1) = -(u[1] - u[3]);
    j(6, 1) = u[0] - u[2];
    j(7, 1) = u[1] - u[3];
    return j;
  };

  const std::vector<LabelledConstraint> all = {{"g1", dp_g1}, {"g2", dp_g2}, {"g3", dp_g3(g)}};
  const std::size_t enforced = static_cast<std::size_t>(3 - index);
  p.g = all[enforced].eval;
  p.constraint_label = all[enforced].label;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (i != enforced) p.extra_constraints.push_back(all[i]);

  switch (index) {
    case 3:
      p.jg_u = [](In u, In, double) {
        const double d1 = u[0] - u[2], d2 = u[1] - u[3];
        DenseMatrix j(2, 8);
        j(0, 0) = 2.0 * u[0];
        j(0, 1) = 2.0 * u[1];
        j(1, 0) = 2.0 * d1;
        j(1, 2) = -2.0 * d1;
        j(1, 1) = 2.0 * d2;
        j(1, 3) = -2.0 * d2;
        return j;
      };
      p.jg_v = constant(zeros(2, 2));
      break;
    case 2:
      p.jg_u = [](In u, In, double) {
        const double d1 = u[0] - u[2], d2 = u[1] - u[3], e1 = u[4] - u[6], e2 = u[5] - u[7];
        DenseMatrix j(2, 8);
        j(0, 0) = u[4];
        j(0, 1) = u[5];
        j(0, 4) = u[0];
        j(0, 5) = u[1];
        j(1, 0) = e1;
        j(1, 2) = -e1;
        j(1, 4) = d1;
        j(1, 6) = -d1;
        j(1, 1) = e2;
        j(1, 3) = -e2;
        j(1, 5) = d2;
        j(1, 7) = -d2;
        return j;
      };
      p.jg_v = constant(zeros(2, 2));
      break;
    default:
      p.jg_u = [g](In u, In v, double) {
        const double d1 = u[0] - u[2], d2 = u[1] - u[3], e1 = u[4] - u[6], e2 = u[5] - u[7];
        DenseMatrix j(2, 8);
        j(0, 0) = -2.0 * v[0] * u[0] - v[1] * (d1 + u[0]);
        j(0, 1) = -g - 2.0 * v[0] * u[1] - v[1] * (d2 + u[1]);
        j(0, 2) = v[1] * u[0];
        j(0, 3) = v[1] * u[1];
        j(0, 4) = 2.0 * u[4];
        j(0, 5) = 2.0 * u[5];
        j(1, 0) = -v[0] * (u[0] + d1) - 4.0 * v[1] * d1;
        j(1, 2) = v[0] * u[0] + 4.0 * v[1] * d1;
        j(1, 1) = -v[0] * (u[1] + d2) - 4.0 * v[1] * d2;
        j(1, 3) = v[0] * u[1] + 4.0 * v[1] * d2;
        j(1, 4) = 2.0 * e1;
        j(1, 6) = -2.0 * e1;
        j(1, 5) = 2.0 * e2;
        j(1, 7) = -2.0 * e2;
        return j;
      };
      p.jg_v = [](In u, In, double) {
        const double d1 = u[0] - u[2], d2 = u[1] - u[3];
        return DenseMatrix{{-(u[0] * u[0] + u[1] * u[1]), -(u[0] * d1 + u[1] * d2)},
                           {-(d1 * u[0] + d2 * u[1]), -2.0 * (d1 * d1 + d2 * d2)}};
      };
      break;
  }
  auto lazy = std::make_shared<LazyDoublePendulum>();
  lazy->phi10 = phi1;
  lazy->phi20 = phi2;
  lazy->g = g;
  lazy->tf = p.tf;
  p.exact = [lazy](double t) { return lazy->get().state(t); };
  p.index = index;
  return p;
}

// ---- stiff flame

DaeProblem flame(const ProblemParams& prm) {
  const double delta = param(prm, "delta");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("flame needs 0 < delta < 1");
  DaeProblem p;
  p.name = "flame";
  p.description = "flame propagation u' = u^2 - v, 0 = u^3 - v (stiff near t = 1/delta)";
  p.d_u = 1;
  p.d_v = 1;
  p.t0 = 0.0;
  p.tf = 2.0 / delta;
  p.u0 = {delta};
  p.v0 = {delta * delta * delta};
  p.f = [](In u, In v, double) { return Vector{u[0] * u[0] - v[0]}; };
  p.g = [](In u, In v, double) { return Vector{u[0] * u[0] * u[0] - v[0]}; };
  p.jf_u = [](In u, In, double) { return DenseMatrix{{2.0 * u[0]}}; };
  p.jf_v = constant(DenseMatrix{{-1.0}});
  p.jg_u = [](In u, In, double) { return DenseMatrix{{3.0 * u[0] * u[0]}}; };
  p.jg_v = constant(DenseMatrix{{-1.0}});
  p.exact = [delta](double t) { return flame_exact(t, delta); };
  p.constraint_label = "g1";
  p.index = 1;
  return p;
}

}  // namespace

ProblemRegistry register_builtin_problems() {
  ProblemRegistry r;
  const ProblemParams pend = {{"phi0", std::numbers::pi / 4.0}, {"g", 1.0}};
  const ProblemParams dpend = {{"phi1", 0.25 * std::numbers::pi}, {"phi2", 0.30 * std::numbers::pi}, {"g", 1.0}};

  r.add({"ode_harmonic", "harmonic oscillator as a pure ODE (d_v = 0), span [0, 4pi]", {}, ode_harmonic});
  r.add({"demo_index1", "linear index-1 oscillator u1' = u2, u2' = -v1, 0 = u1 - v1, span [0, 40pi]", {},
         demo_index1});
  r.add({"newton_demo", "index-1 circle system used for Newton traces, span [0, 2pi]", {},
         [](const ProblemParams& p) { return circle_index1("newton_demo", p); }});
  r.add({"simple_index1", "index-1 circle system x^2 + y^2 = z^2, span [0, 2pi]", {},
         [](const ProblemParams& p) { return circle_index1("simple_index1", p); }});
  r.add({"hessenberg_index1", "Hessenberg index-1 system, span [0, 1]", {}, hessenberg_index1});
  r.add({"hessenberg_index2", "Hessenberg index-2 system with constraint g1, span [0, 1]", {},
         [](const ProblemParams&) { return hessenberg_index2("hessenberg_index2", false); }});
  r.add({"hessenberg_index2_reduced1", "Hessenberg system with differentiated constraint g2, span [0, 1]", {},
         [](const ProblemParams&) { return hessenberg_index2("hessenberg_index2_reduced1", true); }});
  for (int idx : {3, 2, 1}) {
    r.add({"pendulum_index" + std::to_string(idx),
           "mathematical pendulum, index " + std::to_string(idx) + ", span [0, 10]", pend,
           [idx](const ProblemParams& p) { return pendulum(idx, p); }});
  }
  for (int idx : {3, 2, 1}) {
    r.add({"double_pendulum_index" + std::to_string(idx),
           "double pendulum, index " + std::to_string(idx) + ", span [0, 20], reference solution", dpend,
           [idx](const ProblemParams& p) { return double_pendulum(idx, p); }});
  }
  r.add({"flame", "stiff flame model with parameter delta, span [0, 2/delta]", {{"delta", 1e-4}}, flame});
  return r;
}

}  // namespace radau_dae
