#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radau_dae/linalg.hpp"

namespace radau_dae {

struct State {
  Vector u;
  Vector v;
};

using Evaluator = std::function<Vector(std::span<const double> u, std::span<const double> v, double t)>;
using JacobianEvaluator =
    std::function<DenseMatrix(std::span<const double> u, std::span<const double> v, double t)>;
using ExactEvaluator = std::function<State(double t)>;
using ProblemParams = std::map<std::string, double>;

/// A constraint tracked for diagnostics, enforced or not.
struct LabelledConstraint {
  std::string label;
  Evaluator eval;
};

/// du/dt = f(u, v, t), 0 = g(u, v, t) on [t0, tf].
struct DaeProblem {
  std::string name;
  std::size_t d_u = 0;
  std::size_t d_v = 0;
  double t0 = 0.0;
  double tf = 1.0;
  Vector u0;
  Vector v0;
  Evaluator f;
  Evaluator g;
  JacobianEvaluator jf_u;  // d_u x d_u
  JacobianEvaluator jf_v;  // d_u x d_v
  JacobianEvaluator jg_u;  // d_v x d_u
  JacobianEvaluator jg_v;  // d_v x d_v
  ExactEvaluator exact;    // empty when no exact or reference solution is known
  std::string constraint_label = "g";
  std::vector<LabelledConstraint> extra_constraints;
  int index = 0;
  std::string description;
  ProblemParams params;

  /// The enforced constraint followed by the extra ones.
  std::vector<LabelledConstraint> all_constraints() const;
};

struct ConsistencyReport {
  double constraint_residual = 0.0;
  double jacobian_deviation = 0.0;
  bool consistent_initial_state = true;
  bool jacobians_match = true;

  bool ok() const noexcept { return consistent_initial_state && jacobians_match; }
};

inline constexpr double kConsistencyTolerance = 1e-10;
inline constexpr double kJacobianTolerance = 1e-6;

/// Checks g(u0, v0, t0) and the four Jacobians against central differences.
ConsistencyReport check_consistency(const DaeProblem& p);

/// Central-difference Jacobians of f and g with respect to u and v.
DenseMatrix fd_jacobian_u(const Evaluator& e, std::size_t rows, std::span<const double> u,
                          std::span<const double> v, double t);
DenseMatrix fd_jacobian_v(const Evaluator& e, std::size_t rows, std::span<const double> u,
                          std::span<const double> v, double t);

/// Fills any missing Jacobian evaluator with a finite-difference fallback.
DaeProblem with_finite_difference_jacobians(DaeProblem p);

struct ProblemEntry {
  std::string name;
  std::string description;
  ProblemParams defaults;
  std::function<DaeProblem(const ProblemParams&)> factory;
};

class ProblemRegistry {
 public:
  void add(ProblemEntry entry);
  bool contains(const std::string& name) const;
  const ProblemEntry& entry(const std::string& name) const;
  std::vector<std::string> names() const;
  const std::vector<ProblemEntry>& entries() const noexcept { return entries_; }

  /// Builds a problem; overrides must name existing parameters.
  DaeProblem make(const std::string& name, const ProblemParams& overrides = {}) const;
  /// Accepts "name" or "name,key=value,...".
  DaeProblem make_from_spec(const std::string& spec) const;

 private:
  std::vector<ProblemEntry> entries_;
};

struct ProblemSpec {
  std::string name;
  ProblemParams params;
};
ProblemSpec parse_problem_spec(const std::string& spec);

ProblemRegistry register_builtin_problems();

/// Shared instance of the built-in registry.
const ProblemRegistry& builtin_problems();

}  // namespace radau_dae
