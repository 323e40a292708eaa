#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "radau_dae/basis.hpp"
#include "radau_dae/dae_model.hpp"
#include "radau_dae/predictor.hpp"

namespace radau_dae {

struct GridSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t cells = 1;

  double dt() const noexcept { return (t_end - t_start) / static_cast<double>(cells); }
};

/// Piecewise-uniform time grid.
struct GridSpec {
  std::vector<GridSegment> segments;

  static GridSpec uniform(double t0, double tf, std::size_t cells);
  /// "start:end:cells[,start:end:cells...]"
  static GridSpec parse(const std::string& text);

  void validate() const;
  std::size_t cell_count() const;
  double t_start() const;
  double t_end() const;
  /// t_0 < ... < t_L; segment ends are pinned exactly.
  Vector nodes() const;
  /// Per-cell step sizes.
  Vector steps() const;
  std::string to_string() const;
};

struct CellFailure {
  std::size_t cell = 0;
  double t_left = 0.0;
  std::string message;
};

struct SolveReport {
  std::string problem;
  std::size_t degree = 0;
  Vector node_t;
  DenseMatrix node_u;  // (L+1) x d_u, rows that were reached
  DenseMatrix node_v;  // (L+1) x d_v
  std::vector<CellSolution> cells;
  std::vector<NewtonTrace> traces;
  SolverCounters counters;
  std::vector<CellFailure> failures;

  bool ok() const noexcept { return failures.empty(); }
  /// Number of node rows actually computed (L+1 on success).
  std::size_t nodes_reached() const noexcept { return cells.size() + 1; }
};

/// Corrector: u_{n+1} = u_n + dt sum_p w_p F_p and v_{n+1} = r_hat_N.
State advance_cell(const BasisTables& tables, const CellSolution& cell,
                   std::span<const double> u_n);

/// Marches the grid, stopping at the first failed cell with the failure recorded.
SolveReport solve(const DaeProblem& problem, const GridSpec& grid, const BasisTables& tables,
                  const NewtonOptions& opts = {});

/// Cell n covers (t_n, t_{n+1}]; t_0 belongs to cell 0. Throws OutOfRange.
std::size_t locate_cell(const SolveReport& report, double t);

/// Local solution u_L(t), v_L(t) of the cell containing t.
State eval_local(const SolveReport& report, const BasisTables& tables, double t);

/// Sampled local solution; weight is the time-measure of each sample.
struct Trajectory {
  Vector t;
  Vector weight;
  DenseMatrix u;
  DenseMatrix v;
};

/// m midpoint sub-nodes per cell at tau = (j + 1/2) / m.
Trajectory tabulate_local(const SolveReport& report, const BasisTables& tables, std::size_t m);
/// Samples every cell at the given local coordinates, each weighted dt / taus.size().
Trajectory tabulate_local_at(const SolveReport& report, const BasisTables& tables,
                             std::span<const double> taus);

}  // namespace radau_dae
