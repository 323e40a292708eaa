#include "radau_dae/basis.hpp"

#include <cmath>
#include <string>

#include "radau_dae/errors.hpp"

namespace radau_dae {

namespace {

// L_s - L_{s-1} on [-1, 1] and its derivative
LegendreValue radau_difference(std::size_t s, double x) {
  const LegendreValue hi = legendre(s, x);
  const LegendreValue lo = legendre(s - 1, x);
  return {hi.value - lo.value, hi.derivative - lo.derivative};
}

double refine_root(std::size_t s, double lo, double hi) {
  LegendreValue f_lo = radau_difference(s, lo);
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const LegendreValue f = radau_difference(s, x);
    if (f.value == 0.0) return x;
    if ((f.value < 0.0) == (f_lo.value < 0.0)) {
      lo = x;
      f_lo = f;
    } else {
      hi = x;
    }
    double next = x - f.value / f.derivative;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= 1e-16 * (1.0 + std::abs(x))) {
      // one more Newton step as polish
      const LegendreValue g = radau_difference(s, x);
      if (g.derivative != 0.0) x -= g.value / g.derivative;
      return x;
    }
  }
  throw ConvergenceFailure("radau_nodes: root refinement did not converge for s=" +
                           std::to_string(s));
}

}  // namespace

double radau_polynomial(std::size_t s, double tau) {
  if (s == 0) throw InvalidArgument("radau_polynomial: s must be >= 1");
  const double sign = (s % 2 == 0) ? 1.0 : -1.0;
  return 0.5 * sign * radau_difference(s, 2.0 * tau - 1.0).value;
}

Vector radau_nodes(std::size_t s) {
  if (s == 0) throw InvalidArgument("radau_nodes: s must be >= 1");
  Vector nodes(s);
  nodes[s - 1] = 1.0;
  if (s == 1) return nodes;
  // each interior root sits between two adjacent Gauss-Legendre nodes of order s
  const QuadratureRule gl = gauss_legendre_rule(s);
  for (std::size_t i = 0; i + 1 < s; ++i) {
    const double lo = 2.0 * gl.nodes[i] - 1.0;
    const double hi = 2.0 * gl.nodes[i + 1] - 1.0;
    nodes[i] = 0.5 * (1.0 + refine_root(s, lo, hi));
  }
  return nodes;
}

Vector eval_basis(const BasisTables& tables, double tau) {
  const std::size_t n = tables.size();
  Vector phi(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (tau == tables.nodes[j]) {
      phi[j] = 1.0;
      return phi;
    }
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    phi[j] = tables.barycentric_weights[j] / (tau - tables.nodes[j]);
    denom += phi[j];
  }
  for (double& v : phi) v /= denom;
  return phi;
}

DenseMatrix eval_basis_matrix(const BasisTables& tables, std::span<const double> taus) {
  DenseMatrix out(taus.size(), tables.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const Vector phi = eval_basis(tables, taus[i]);
    for (std::size_t j = 0; j < phi.size(); ++j) out(i, j) = phi[j];
  }
  return out;
}

BasisTables build_tables(std::size_t degree) {
  BasisTables t;
  const std::size_t n = degree + 1;
  t.degree = degree;
  t.conditioning_guaranteed = degree <= kMaxConditionedDegree;
  t.nodes = radau_nodes(n);

  t.barycentric_weights.assign(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) t.barycentric_weights[j] /= (t.nodes[j] - t.nodes[k]);

  // phi_j and phi_j' at the quadrature points via the product form
  const QuadratureRule gl = gauss_legendre_rule(n);
  DenseMatrix phi(n, n), dphi(n, n);  // [point][basis]
  for (std::size_t i = 0; i < n; ++i) {
    const double x = gl.nodes[i];
    for (std::size_t j = 0; j < n; ++j) {
      double prod = t.barycentric_weights[j];
      double recip = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == j) continue;
        prod *= (x - t.nodes[k]);
        recip += 1.0 / (x - t.nodes[k]);
      }
      phi(i, j) = prod;
      dphi(i, j) = prod * recip;
    }
  }

  t.phi_at_one.assign(n, 0.0);
  t.phi_at_one[n - 1] = 1.0;
  t.phi_at_zero = eval_basis(t, 0.0);

  t.weights.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t.weights[j] += gl.weights[i] * phi(i, j);

  t.k_matrix = DenseMatrix(n, n);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      double integral = 0.0;
      for (std::size_t i = 0; i < n; ++i) integral += gl.weights[i] * dphi(i, p) * phi(i, q);
      t.k_matrix(p, q) = t.phi_at_one[p] * t.phi_at_one[q] - integral;
    }
  }

  t.mass_matrix = DenseMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) t.mass_matrix(k, k) = t.weights[k];

  t.k_inv = inverse(t.k_matrix);
  t.a_matrix = multiply(t.k_inv, t.mass_matrix);
  return t;
}

}  // namespace radau_dae
