#include "radau_dae/reference.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "radau_dae/errors.hpp"
#include "radau_dae/stepper.hpp"

namespace radau_dae {

namespace {

void check_modulus(double k, const char* who) {
  if (!(k >= 0.0 && k < 1.0)) {
    std::ostringstream os;
    os << who << ": modulus " << k << " outside [0, 1)";
    throw DomainError(os.str());
  }
}

}  // namespace

double elliptic_k(double k) {
  check_modulus(k, "elliptic_k");
  double a = 1.0, b = std::sqrt((1.0 - k) * (1.0 + k));
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return std::numbers::pi / (a + b);
}

JacobiValues jacobi_sn_cn_dn(double u, double k) {
  check_modulus(k, "jacobi_sn_cn_dn");
  if (k == 0.0) return {std::sin(u), std::cos(u), 1.0};

  constexpr int kMaxDescent = 32;
  double a[kMaxDescent + 1], c[kMaxDescent + 1];
  a[0] = 1.0;
  c[0] = k;
  double b = std::sqrt((1.0 - k) * (1.0 + k));
  int n = 0;
  while (std::abs(c[n]) > 1e-16 * a[n]) {
    if (n == kMaxDescent) throw ConvergenceFailure("jacobi_sn_cn_dn: Landen descent did not settle");
    a[n + 1] = 0.5 * (a[n] + b);
    c[n + 1] = 0.25 * c[n] * c[n] / a[n + 1];  // (a - b) / 2 without the cancellation
    b = std::sqrt(a[n] * b);
    ++n;
  }
  double phi = std::ldexp(a[n] * u, n);
  for (int i = n; i > 0; --i) phi = 0.5 * (phi + std::asin(c[i] / a[i] * std::sin(phi)));
  const double sn = std::sin(phi), cn = std::cos(phi);
  // dn > 0 for real k < 1; the factored form avoids the 0/0 of cn / cos(phi_1 - phi_0) at cn = 0
  return {sn, cn, std::sqrt((1.0 - k * sn) * (1.0 + k * sn))};
}

State pendulum_exact(double t, double phi0, double g) {
  if (!(std::abs(phi0) < std::numbers::pi)) throw DomainError("pendulum_exact: |phi0| must be < pi");
  if (!(g > 0.0)) throw DomainError("pendulum_exact: g must be positive");
  const double k = std::sin(0.5 * std::abs(phi0));
  const double sign = phi0 < 0.0 ? -1.0 : 1.0;
  const double w0 = std::sqrt(g);
  const JacobiValues j = jacobi_sn_cn_dn(elliptic_k(k) - w0 * t, k);
  const double phi = sign * 2.0 * std::asin(k * j.sn);
  const double dphi = -sign * 2.0 * w0 * k * j.cn;
  const double s = std::sin(phi), c = std::cos(phi);
  return {{s, -c, dphi * c, dphi * s}, {dphi * dphi + g * c}};
}

double lambert_w_log_ln(double y) {
  if (!std::isfinite(y)) throw DomainError("lambert_w_log: argument must be finite");
  // solve e^s + s = y for s = ln w
  double s = y > 1.0 ? std::log(y - std::log(y)) : y - std::exp(y);
  constexpr double step_tol = 4.0 * std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 100; ++it) {
    const double w = std::exp(s);
    const double ds = (w + s - y) / (w + 1.0);
    s -= ds;
    if (std::abs(ds) <= step_tol * (1.0 + std::abs(s))) return s;
  }
  // last-bit oscillation: accept when the residual already meets its bound
  if (std::abs(std::exp(s) + s - y) <= 1e-13 * (1.0 + std::abs(y))) return s;
  throw ConvergenceFailure("lambert_w_log: Newton did not converge");
}

double lambert_w_log(double y) { return std::exp(lambert_w_log_ln(y)); }

double lambert_w(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("lambert_w: x must be positive and finite");
  return lambert_w_log(std::log(x));
}

State flame_exact(double t, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("flame_exact: delta must be in (0, 1)");
  if (t < 0.0) throw DomainError("flame_exact: t must be >= 0");
  const double a = 1.0 / delta - 1.0;
  const double w = lambert_w_log(std::log(a) + a - t);
  const double u = 1.0 / (w + 1.0);
  return {{u}, {u * u * u}};
}

DaeProblem double_pendulum_angle_problem(double phi10, double phi20, double g, double tf) {
  DaeProblem p;
  p.name = "double_pendulum_angles";
  p.description = "double pendulum angle ODE (phi1, phi2, phi1', phi2')";
  p.d_u = 4;
  p.d_v = 0;
  p.t0 = 0.0;
  p.tf = tf;
  p.u0 = {phi10, phi20, 0.0, 0.0};
  p.f = [g](std::span<const double> u, std::span<const double>, double) {
    const double d = u[0] - u[1];
    const double sd = std::sin(d), cd = std::cos(d);
    const double den = 2.0 - cd * cd;
    const double a = sd * u[3] * u[3] + 2.0 * g * std::sin(u[0]);
    const double b = sd * u[2] * u[2] - g * std::sin(u[1]);
    return Vector{u[2], u[3], -(a + cd * b) / den, (cd * a + 2.0 * b) / den};
  };
  p.index = 0;
  return with_finite_difference_jacobians(std::move(p));
}

State double_pendulum_state(const DoublePendulumAngles& a, double g) {
  const double s1 = std::sin(a.phi1), c1 = std::cos(a.phi1);
  const double s2 = std::sin(a.phi2), c2 = std::cos(a.phi2);
  const double x1 = s1, y1 = -c1, x2 = s1 + s2, y2 = -(c1 + c2);
  const double vx1 = a.dphi1 * c1, vy1 = a.dphi1 * s1;
  const double vx2 = vx1 + a.dphi2 * c2, vy2 = vy1 + a.dphi2 * s2;
  const double c = 1.0 - x1 * x2 - y1 * y2;
  const double e1 = vx1 * vx1 + vy1 * vy1 - g * y1;
  const double rel = (vx1 - vx2) * (vx1 - vx2) + (vy1 - vy2) * (vy1 - vy2);
  const double den = 2.0 - c * c;
  return {{x1, y1, x2, y2, vx1, vy1, vx2, vy2}, {(2.0 * e1 - rel * c) / den, (rel - c * e1) / den}};
}

struct DoublePendulumReference::Impl {
  BasisTables tables;
  SolveReport report;
};

DoublePendulumReference::DoublePendulumReference(double phi10, double phi20, double g, double tf)
    : g_(g), tf_(tf) {
  const DaeProblem p = double_pendulum_angle_problem(phi10, phi20, g, tf);
  auto impl = std::make_shared<Impl>();
  impl->tables = build_tables(kDegree);
  impl->report = solve(p, GridSpec::uniform(0.0, tf, kCells), impl->tables);
  const SolveReport fine = solve(p, GridSpec::uniform(0.0, tf, 2 * kCells), impl->tables);
  if (!impl->report.ok() || !fine.ok()) {
    throw ReferenceAccuracyFailure("double pendulum reference: solver failed");
  }
  const auto last = impl->report.node_u.row(kCells);
  const auto last_fine = fine.node_u.row(2 * kCells);
  for (std::size_t i = 0; i < 4; ++i) deviation_ = std::max(deviation_, std::abs(last[i] - last_fine[i]));
  if (!(deviation_ <= kAccuracy)) {
    std::ostringstream os;
    os << "double pendulum reference: Richardson deviation " << deviation_ << " exceeds " << kAccuracy;
    throw ReferenceAccuracyFailure(os.str());
  }
  impl_ = std::move(impl);
}

DoublePendulumAngles DoublePendulumReference::angles(double t) const {
  const State s = eval_local(impl_->report, impl_->tables, t);
  return {s.u[0], s.u[1], s.u[2], s.u[3]};
}

State DoublePendulumReference::state(double t) const { return double_pendulum_state(angles(t), g_); }

std::shared_ptr<const DoublePendulumReference> double_pendulum_reference(double phi10,
                                                                         double phi20, double g,
                                                                         double tf) {
  return std::make_shared<const DoublePendulumReference>(phi10, phi20, g, tf);
}

}  // namespace radau_dae
