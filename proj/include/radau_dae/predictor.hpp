#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radau_dae/basis.hpp"
#include "radau_dae/dae_model.hpp"
#include "radau_dae/linalg.hpp"

namespace radau_dae {

/// How the Newton block system is solved.
enum class Reduction { full_block, via_r, via_s, automatic };

std::string to_string(Reduction r);
/// Accepts full, full_block, via-r, via_r, via-s, via_s, auto.
Reduction parse_reduction(const std::string& text);

struct NewtonOptions {
  std::optional<double> tolerance;  // default 1e-13 (1 + |(u_n, v_n)|_inf)
  std::size_t max_iterations = 50;
  Reduction reduction = Reduction::automatic;
};

struct SolverCounters {
  std::size_t f_evals = 0;
  std::size_t g_evals = 0;
  std::size_t jf_u_evals = 0;
  std::size_t jf_v_evals = 0;
  std::size_t jg_u_evals = 0;
  std::size_t jg_v_evals = 0;
  std::size_t lu_factorizations = 0;     // one per solve of the active system
  std::size_t block_factorizations = 0;  // small R_p / S_p inverses used by reductions
  std::size_t newton_iterations = 0;

  std::size_t jac_evals() const noexcept { return jf_u_evals + jf_v_evals + jg_u_evals + jg_v_evals; }
  SolverCounters& operator+=(const SolverCounters& o);
  friend bool operator==(const SolverCounters&, const SolverCounters&) = default;
};

/// Predictor coefficients on one cell. Rows are basis nodes.
struct CellSolution {
  std::size_t cell_index = 0;
  double t_left = 0.0;
  double dt = 0.0;
  DenseMatrix q_hat;  // (N+1) x d_u
  DenseMatrix r_hat;  // (N+1) x d_v
  DenseMatrix f_hat;  // F at the nodes: last assembly plus its linear update
};

struct NewtonTrace {
  std::vector<double> increments;
  bool converged = false;
  bool stagnated = false;  // accepted at the rounding floor just above the tolerance
  std::size_t iterations = 0;
  Reduction used = Reduction::full_block;
};

/// Constant-in-time starting iterate.
CellSolution initial_guess(std::span<const double> u_n, std::span<const double> v_n,
                           const BasisTables& tables);

/// Linearized predictor system [[P, Q], [diag R, diag S]] [dq; dr] = [b; c].
struct NewtonBlocks {
  std::size_t n_nodes = 0;
  std::size_t d_u = 0;
  std::size_t d_v = 0;
  DenseMatrix p;               // (n d_u) x (n d_u)
  DenseMatrix q;               // (n d_u) x (n d_v)
  std::vector<DenseMatrix> r;  // per node, d_v x d_u
  std::vector<DenseMatrix> s;  // per node, d_v x d_v
  Vector b;
  Vector c;
  DenseMatrix f_hat;  // F at the nodes of the iterate
  std::vector<DenseMatrix> jf_u;
  std::vector<DenseMatrix> jf_v;

  DenseMatrix full_matrix() const;
  Vector full_rhs() const;
};

NewtonBlocks assemble_newton_system(const DaeProblem& problem, const BasisTables& tables, double dt,
                                    double t_left, std::span<const double> u_n,
                                    const CellSolution& iterate, SolverCounters& counters);

struct Increment {
  DenseMatrix dq;  // (N+1) x d_u
  DenseMatrix dr;  // (N+1) x d_v
  double max_abs() const;
};

/// Block-eliminated system plus the small inverses needed for back substitution.
struct ReducedSystem {
  Reduction kind = Reduction::via_s;
  DenseMatrix matrix;
  Vector rhs;
  std::vector<DenseMatrix> block_inverses;  // S_p^-1 or R_p^-1
};

/// An increment within this factor of the tolerance that no longer halves counts as converged.
inline constexpr double kStagnationFactor = 1e3;

/// Pivot ratio below which a block counts as singular.
inline constexpr double kBlockPivotRatio = 1e-10;

/// V = P - Q S^-1 R, h = b - Q S^-1 c. Throws ReductionInapplicable.
ReducedSystem reduce_via_s(const NewtonBlocks& blocks, SolverCounters* counters = nullptr);
/// U = Q - P R^-1 S, d = b - P R^-1 c. Throws ReductionInapplicable.
ReducedSystem reduce_via_r(const NewtonBlocks& blocks, SolverCounters* counters = nullptr);

Increment back_substitute(const NewtonBlocks& blocks, const ReducedSystem& reduced,
                          std::span<const double> solution);

/// Solves with a concrete reduction; one LU of the active system.
Increment solve_increment(const NewtonBlocks& blocks, Reduction reduction,
                          SolverCounters& counters);

/// Smallest applicable system: via_s, via_r or full_block.
Reduction probe_reduction(const NewtonBlocks& blocks);

struct NewtonResult {
  CellSolution cell;
  NewtonTrace trace;
};

/// Full Newton on one cell. Throws NonConvergence or SingularMatrix tagged with the cell.
NewtonResult newton_solve(const DaeProblem& problem, const BasisTables& tables, double dt,
                          double t_left, std::span<const double> u_n, std::span<const double> v_n,
                          const NewtonOptions& opts, SolverCounters& counters,
                          std::size_t cell_index = 0);

double default_newton_tolerance(std::span<const double> u_n, std::span<const double> v_n);

}  // namespace radau_dae
