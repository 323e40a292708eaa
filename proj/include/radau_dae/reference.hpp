#pragma once

#include <memory>

#include "radau_dae/dae_model.hpp"

namespace radau_dae {

/// Complete elliptic integral of the first kind, modulus k in [0, 1).
double elliptic_k(double k);

struct JacobiValues {
  double sn;
  double cn;
  double dn;
};

/// Jacobi elliptic functions with modulus k in [0, 1) by descending Landen transformation.
JacobiValues jacobi_sn_cn_dn(double u, double k);

/// Exact pendulum state (x, y, x', y'; lambda) for release from rest at angle phi0.
State pendulum_exact(double t, double phi0, double g);

/// Principal Lambert W in log form: returns w > 0 with w + ln w = y.
double lambert_w_log(double y);
/// Same root, returned as s = ln w (finite even where w underflows).
double lambert_w_log_ln(double y);
/// W(x) for x > 0; a thin wrapper over the log form.
double lambert_w(double x);

/// Exact flame solution u = 1/(W(a e^(a - t)) + 1), v = u^3 with a = 1/delta - 1.
State flame_exact(double t, double delta);

/// Angles (phi1, phi2) and rates of the double pendulum.
struct DoublePendulumAngles {
  double phi1, phi2, dphi1, dphi2;
};

/// High-accuracy reference for the double pendulum, built once and then read-only.
class DoublePendulumReference {
 public:
  DoublePendulumReference(double phi10, double phi20, double g, double tf);

  DoublePendulumAngles angles(double t) const;
  /// Full DAE state (x1, y1, x2, y2, x1', y1', x2', y2'; lambda1, lambda2).
  State state(double t) const;
  State operator()(double t) const { return state(t); }

  double g() const noexcept { return g_; }
  double tf() const noexcept { return tf_; }
  /// max |angle difference| at tf between the 400- and 800-cell runs.
  double richardson_deviation() const noexcept { return deviation_; }

  static constexpr std::size_t kDegree = 10;
  static constexpr std::size_t kCells = 400;
  static constexpr double kAccuracy = 1e-11;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  double g_;
  double tf_;
  double deviation_ = 0.0;
};

/// Throws ReferenceAccuracyFailure when the Richardson check fails.
std::shared_ptr<const DoublePendulumReference> double_pendulum_reference(double phi10,
                                                                         double phi20, double g,
                                                                         double tf);

/// The angle ODE as a pure-ODE problem (d_v = 0).
DaeProblem double_pendulum_angle_problem(double phi10, double phi20, double g, double tf);

/// Maps angles to the Cartesian DAE state including the constraint forces.
State double_pendulum_state(const DoublePendulumAngles& a, double g);

}  // namespace radau_dae
