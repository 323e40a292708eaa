#include "radau_dae/dae_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "radau_dae/errors.hpp"

namespace radau_dae {

std::vector<LabelledConstraint> DaeProblem::all_constraints() const {
  std::vector<LabelledConstraint> out;
  if (d_v > 0) out.push_back({constraint_label, g});
  out.insert(out.end(), extra_constraints.begin(), extra_constraints.end());
  return out;
}

namespace {

double fd_step(double x) { return 1e-5 * (1.0 + std::abs(x)); }

double max_deviation(const DenseMatrix& analytic, const DenseMatrix& numeric) {
  if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.rows(); ++i)
    for (std::size_t j = 0; j < analytic.cols(); ++j) {
      const double scale = std::max({1.0, std::abs(analytic(i, j)), std::abs(numeric(i, j))});
      worst = std::max(worst, std::abs(analytic(i, j) - numeric(i, j)) / scale);
    }
  return worst;
}

}  // namespace

DenseMatrix fd_jacobian_u(const Evaluator& e, std::size_t rows, std::span<const double> u,
                          std::span<const double> v, double t) {
  DenseMatrix j(rows, u.size());
  Vector up(u.begin(), u.end());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double h = fd_step(u[k]);
    up[k] = u[k] + h;
    const Vector fp = e(up, v, t);
    up[k] = u[k] - h;
    const Vector fm = e(up, v, t);
    up[k] = u[k];
    for (std::size_t i = 0; i < rows; ++i) j(i, k) = (fp[i] - fm[i]) / (2.0 * h);
  }
  return j;
}

DenseMatrix fd_jacobian_v(const Evaluator& e, std::size_t rows, std::span<const double> u,
                          std::span<const double> v, double t) {
  DenseMatrix j(rows, v.size());
  Vector vp(v.begin(), v.end());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double h = fd_step(v[k]);
    vp[k] = v[k] + h;
    const Vector fp = e(u, vp, t);
    vp[k] = v[k] - h;
    const Vector fm = e(u, vp, t);
    vp[k] = v[k];
    for (std::size_t i = 0; i < rows; ++i) j(i, k) = (fp[i] - fm[i]) / (2.0 * h);
  }
  return j;
}

ConsistencyReport check_consistency(const DaeProblem& p) {
  ConsistencyReport r;
  if (p.d_v > 0) r.constraint_residual = norm_inf(p.g(p.u0, p.v0, p.t0));
  r.consistent_initial_state = r.constraint_residual <= kConsistencyTolerance;

  const auto& u = p.u0;
  const auto& v = p.v0;
  const double t = p.t0;
  double dev = max_deviation(p.jf_u(u, v, t), fd_jacobian_u(p.f, p.d_u, u, v, t));
  dev = std::max(dev, max_deviation(p.jf_v(u, v, t), fd_jacobian_v(p.f, p.d_u, u, v, t)));
  if (p.d_v > 0) {
    dev = std::max(dev, max_deviation(p.jg_u(u, v, t), fd_jacobian_u(p.g, p.d_v, u, v, t)));
    dev = std::max(dev, max_deviation(p.jg_v(u, v, t), fd_jacobian_v(p.g, p.d_v, u, v, t)));
  }
  r.jacobian_deviation = dev;
  r.jacobians_match = dev <= kJacobianTolerance;
  return r;
}

DaeProblem with_finite_difference_jacobians(DaeProblem p) {
  const std::size_t du = p.d_u, dv = p.d_v;
  if (!p.g) {
    p.g = [](std::span<const double>, std::span<const double>, double) { return Vector{}; };
  }
  if (!p.jf_u) {
    p.jf_u = [f = p.f, du](auto u, auto v, double t) { return fd_jacobian_u(f, du, u, v, t); };
  }
  if (!p.jf_v) {
    p.jf_v = [f = p.f, du](auto u, auto v, double t) { return fd_jacobian_v(f, du, u, v, t); };
  }
  if (!p.jg_u) {
    p.jg_u = [g = p.g, dv](auto u, auto v, double t) { return fd_jacobian_u(g, dv, u, v, t); };
  }
  if (!p.jg_v) {
    p.jg_v = [g = p.g, dv](auto u, auto v, double t) { return fd_jacobian_v(g, dv, u, v, t); };
  }
  return p;
}

void ProblemRegistry::add(ProblemEntry entry) {
  if (contains(entry.name)) throw InvalidArgument("duplicate problem name: " + entry.name);
  entries_.push_back(std::move(entry));
}

bool ProblemRegistry::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const ProblemEntry& e) { return e.name == name; });
}

const ProblemEntry& ProblemRegistry::entry(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  std::string known;
  for (const auto& e : entries_) known += (known.empty() ? "" : ", ") + e.name;
  throw UnknownProblem("unknown problem '" + name + "'; known problems: " + known);
}

std::vector<std::string> ProblemRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

DaeProblem ProblemRegistry::make(const std::string& name, const ProblemParams& overrides) const {
  const ProblemEntry& e = entry(name);
  ProblemParams params = e.defaults;
  for (const auto& [key, value] : overrides) {
    if (!params.count(key)) {
      throw InvalidArgument("problem '" + name + "' has no parameter '" + key + "'");
    }
    params[key] = value;
  }
  DaeProblem p = e.factory(params);
  p.params = params;
  return p;
}

DaeProblem ProblemRegistry::make_from_spec(const std::string& spec) const {
  const ProblemSpec parsed = parse_problem_spec(spec);
  return make(parsed.name, parsed.params);
}

ProblemSpec parse_problem_spec(const std::string& spec) {
  ProblemSpec out;
  std::stringstream ss(spec);
  std::string item;
  bool first = true;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (first) {
      first = false;
      if (eq == std::string::npos) {
        out.name = item;
        continue;
      }
      if (item.substr(0, eq) == "name") {
        out.name = item.substr(eq + 1);
        continue;
      }
      throw InvalidArgument("problem spec must start with a name: '" + spec + "'");
    }
    if (eq == std::string::npos || eq == 0) {
      throw InvalidArgument("malformed problem parameter '" + item + "'");
    }
    const std::string value = item.substr(eq + 1);
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size()) {
      throw InvalidArgument("parameter '" + item.substr(0, eq) + "' is not a number");
    }
    out.params[item.substr(0, eq)] = x;
  }
  if (out.name.empty()) throw InvalidArgument("empty problem spec");
  return out;
}

const ProblemRegistry& builtin_problems() {
  static const ProblemRegistry registry = register_builtin_problems();
  return registry;
}

}  // namespace radau_dae
