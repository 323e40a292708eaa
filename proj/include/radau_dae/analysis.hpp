#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radau_dae/basis.hpp"
#include "radau_dae/dae_model.hpp"
#include "radau_dae/predictor.hpp"
#include "radau_dae/stepper.hpp"

namespace radau_dae {

/// Point-wise errors, each the max-abs over components.
struct ErrorSample {
  double t = 0.0;
  double weight = 0.0;  // time measure used by the L1 / L2 sums
  double eps_u = 0.0;
  double eps_v = 0.0;
  Vector eps_g;  // one entry per labelled constraint, enforced first
};

struct ErrorSeries {
  std::vector<std::string> constraint_labels;
  std::vector<ErrorSample> nodes;  // node 0 carries weight 0, node n+1 the step of cell n
  std::vector<ErrorSample> local;  // m sub-nodes per cell
};

/// Errors at the nodes and at m midpoint sub-nodes per cell against `exact`.
ErrorSeries pointwise_errors(const DaeProblem& problem, const SolveReport& report,
                             const BasisTables& tables, const ExactEvaluator& exact,
                             std::size_t m_subnodes);

enum class Norm { l1, l2, linf, final_value };
std::string to_string(Norm n);
Norm parse_norm(const std::string& text);
inline constexpr Norm kAllNorms[] = {Norm::l1, Norm::l2, Norm::linf, Norm::final_value};

/// Discrete norm of psi with per-sample weights: L1 = sum |psi| w, L2 = sqrt(sum psi^2 w).
double global_error(std::span<const double> psi, std::span<const double> weights, Norm norm);

enum class Quantity { u, v, g };
/// Pulls eps_u, eps_v or the enforced eps_g out of a sample list.
Vector extract(const std::vector<ErrorSample>& samples, Quantity q);
Vector extract_weights(const std::vector<ErrorSample>& samples);

struct OrderFit {
  double order = 0.0;
  double residual = 0.0;  // rms deviation of ln e from the fitted line
  std::size_t used = 0;
  std::size_t discarded = 0;
};

/// Slope of ln e against ln dt after dropping samples with e <= floor. Throws InsufficientData.
OrderFit fit_order(std::span<const std::pair<double, double>> samples, double floor);

// ---- linear stability

/// R(z) = 1 + z w^T (I - z A)^-1 1.
Complex stability_R(const BasisTables& tables, Complex z);

struct StabilityScan {
  Vector re;          // n_re samples on [re_min, re_max)
  Vector im;          // n_im samples on [im_min, im_max]
  DenseMatrix abs_r;  // rows follow im, columns follow re
  double max_abs_left = 0.0;  // over samples with Re z < 0
  std::size_t stable_count = 0;  // samples with |R| < 1

  bool stable(std::size_t i_im, std::size_t j_re) const { return abs_r(i_im, j_re) < 1.0; }
};

StabilityScan stability_scan(const BasisTables& tables, double re_min, double re_max, double im_min,
                             double im_max, std::size_t n_re, std::size_t n_im);

struct RayProfile {
  double angle = 0.0;
  Vector radius;  // log-spaced
  Vector abs_r;
  Complex r_at_zero{1.0, 0.0};
  double slope = 0.0;  // least-squares slope of ln|R| against ln|z|
};

RayProfile stability_ray(const BasisTables& tables, double angle, double r_min, double r_max,
                         std::size_t count);

// ---- convergence studies

enum class Target { u_node, v_node, g_node, u_local, v_local, g_local };
std::string to_string(Target t);

struct StudyOptions {
  std::size_t subnodes = 50;
  NewtonOptions newton;
  std::optional<double> floor;  // default 1e-12 (1 + |exact|_inf)
  std::vector<Norm> norms{Norm::l1, Norm::l2, Norm::linf, Norm::final_value};
  std::size_t threads = 0;  // 0: RADAU_DAE_THREADS or hardware concurrency
};

struct StudyRun {
  std::size_t cells = 0;
  double dt = 0.0;
  bool ok = true;
  std::string failure;
  SolverCounters counters;
  // error per (target, norm), laid out as errors[target][norm]
  std::vector<std::vector<double>> errors;
};

struct OrderRow {
  Target target = Target::u_node;
  Norm norm = Norm::l1;
  std::vector<std::pair<double, double>> samples;
  std::optional<OrderFit> fit;
  std::string note;
};

struct ConvergenceStudy {
  std::string problem;
  std::size_t degree = 0;
  double floor = 0.0;
  std::vector<StudyRun> runs;
  std::vector<OrderRow> rows;

  const OrderRow& row(Target t, Norm n) const;
  /// Fitted order or throws InsufficientData when the row could not be fitted.
  double order(Target t, Norm n) const;
};

/// Solves on every grid (in parallel, results in grid order) and fits orders per target and norm.
ConvergenceStudy convergence_study(const DaeProblem& problem, std::size_t degree,
                                   std::span<const GridSpec> grids, const StudyOptions& opts = {});

/// Worker count: RADAU_DAE_THREADS when set and positive, else hardware concurrency.
std::size_t worker_count(std::size_t requested = 0);

/// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first exception.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace radau_dae
