#pragma once

#include <cstddef>
#include <span>

#include "radau_dae/linalg.hpp"

namespace radau_dae {

/// Highest degree whose tables are considered well conditioned in double precision.
inline constexpr std::size_t kMaxConditionedDegree = 30;

/// Nodal right-Radau basis of degree N on the reference cell [0, 1].
struct BasisTables {
  std::size_t degree = 0;
  Vector nodes;    // tau_0 < ... < tau_N = 1
  Vector weights;  // w_k = integral of phi_k over [0, 1]
  DenseMatrix a_matrix;
  DenseMatrix k_matrix;
  DenseMatrix k_inv;
  DenseMatrix mass_matrix;
  Vector phi_at_zero;
  Vector phi_at_one;
  Vector barycentric_weights;
  bool conditioning_guaranteed = true;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// R_s(tau) = ((-1)^s / 2) (L_s - L_{s-1}) in shifted Legendre polynomials.
double radau_polynomial(std::size_t s, double tau);

/// The s roots of R_s on (0, 1], ascending; the last one is exactly 1.
Vector radau_nodes(std::size_t s);

BasisTables build_tables(std::size_t degree);

/// phi_p(tau) for every p, in barycentric form.
Vector eval_basis(const BasisTables& tables, double tau);

/// Row i holds eval_basis(tables, taus[i]).
DenseMatrix eval_basis_matrix(const BasisTables& tables, std::span<const double> taus);

}  // namespace radau_dae
