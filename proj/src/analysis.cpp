#include "radau_dae/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cctype>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "radau_dae/errors.hpp"

namespace radau_dae {

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ErrorSample make_sample(const std::vector<LabelledConstraint>& constraints, double t, double weight,
                        std::span<const double> u, std::span<const double> v, const State& ex) {
  ErrorSample s;
  s.t = t;
  s.weight = weight;
  s.eps_u = max_abs_diff(u, ex.u);
  s.eps_v = max_abs_diff(v, ex.v);
  s.eps_g.reserve(constraints.size());
  for (const auto& c : constraints) s.eps_g.push_back(norm_inf(c.eval(u, v, t)));
  return s;
}

}  // namespace

ErrorSeries pointwise_errors(const DaeProblem& problem, const SolveReport& report,
                             const BasisTables& tables, const ExactEvaluator& exact,
                             std::size_t m_subnodes) {
  if (!exact) throw InvalidArgument("pointwise_errors needs an exact or reference solution");
  const auto constraints = problem.all_constraints();
  ErrorSeries out;
  for (const auto& c : constraints) out.constraint_labels.push_back(c.label);

  const std::size_t reached = report.nodes_reached();
  out.nodes.reserve(reached);
  for (std::size_t n = 0; n < reached; ++n) {
    const double t = report.node_t[n];
    const double w = n == 0 ? 0.0 : report.cells[n - 1].dt;
    out.nodes.push_back(
        make_sample(constraints, t, w, report.node_u.row(n), report.node_v.row(n), exact(t)));
  }
  if (m_subnodes > 0 && !report.cells.empty()) {
    const Trajectory tr = tabulate_local(report, tables, m_subnodes);
    out.local.reserve(tr.t.size());
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      out.local.push_back(
          make_sample(constraints, tr.t[i], tr.weight[i], tr.u.row(i), tr.v.row(i), exact(tr.t[i])));
    }
  }
  return out;
}

std::string to_string(Norm n) {
  switch (n) {
    case Norm::l1: return "L1";
    case Norm::l2: return "L2";
    case Norm::linf: return "Linf";
    case Norm::final_value: return "final";
  }
  return "unknown";
}

Norm parse_norm(const std::string& text) {
  std::string t;
  for (char c : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "l1") return Norm::l1;
  if (t == "l2") return Norm::l2;
  if (t == "linf" || t == "inf") return Norm::linf;
  if (t == "final") return Norm::final_value;
  throw InvalidArgument("unknown norm '" + text + "' (expected L1, L2, Linf or final)");
}

double global_error(std::span<const double> psi, std::span<const double> weights, Norm norm) {
  if (psi.empty()) throw InvalidArgument("global_error needs at least one sample");
  if (weights.size() != psi.size()) throw InvalidArgument("global_error: weight count mismatch");
  switch (norm) {
    case Norm::l1: {
      double s = 0.0;
      for (std::size_t i = 0; i < psi.size(); ++i) s += std::abs(psi[i]) * weights[i];
      return s;
    }
    case Norm::l2: {
      double s = 0.0;
      for (std::size_t i = 0; i < psi.size(); ++i) s += psi[i] * psi[i] * weights[i];
      return std::sqrt(s);
    }
    case Norm::linf: return norm_inf(psi);
    case Norm::final_value: return std::abs(psi.back());
  }
  return 0.0;
}

Vector extract(const std::vector<ErrorSample>& samples, Quantity q) {
  Vector out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    switch (q) {
      case Quantity::u: out.push_back(s.eps_u); break;
      case Quantity::v: out.push_back(s.eps_v); break;
      case Quantity::g: out.push_back(s.eps_g.empty() ? 0.0 : s.eps_g.front()); break;
    }
  }
  return out;
}

Vector extract_weights(const std::vector<ErrorSample>& samples) {
  Vector w;
  w.reserve(samples.size());
  for (const auto& s : samples) w.push_back(s.weight);
  return w;
}

OrderFit fit_order(std::span<const std::pair<double, double>> samples, double floor) {
  OrderFit fit;
  std::vector<std::pair<double, double>> logs;
  for (const auto& [dt, e] : samples) {
    if (dt > 0.0 && e > floor && std::isfinite(e)) {
      logs.emplace_back(std::log(dt), std::log(e));
    } else {
      ++fit.discarded;
    }
  }
  fit.used = logs.size();
  if (logs.size() < 2) {
    throw InsufficientData("fit_order: " + std::to_string(logs.size()) +
                           " sample(s) above the floor, need at least 2");
  }
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : logs) {
    mx += x;
    my += y;
  }
  const double n = static_cast<double>(logs.size());
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw InsufficientData("fit_order: all step sizes are equal");
  fit.order = sxy / sxx;
  double ss = 0.0;
  for (const auto& [x, y] : logs) {
    const double r = y - (my + fit.order * (x - mx));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

Complex stability_R(const BasisTables& tables, Complex z) {
  const std::size_t n = tables.size();
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = (i == j ? 1.0 : 0.0) - z * tables.a_matrix(i, j);
  const ComplexVector x = complex_solve(m, ComplexVector(n, Complex{1.0, 0.0}));
  Complex wx{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) wx += tables.weights[i] * x[i];
  return 1.0 + z * wx;
}

StabilityScan stability_scan(const BasisTables& tables, double re_min, double re_max, double im_min,
                             double im_max, std::size_t n_re, std::size_t n_im) {
  if (n_re < 2 || n_im < 2) throw InvalidArgument("stability_scan needs resolution >= 2 per axis");
  if (!(re_max > re_min) || !(im_max > im_min)) throw InvalidArgument("stability_scan: empty window");
  StabilityScan scan;
  scan.re.resize(n_re);
  scan.im.resize(n_im);
  for (std::size_t j = 0; j < n_re; ++j)
    scan.re[j] = re_min + (re_max - re_min) * static_cast<double>(j) / static_cast<double>(n_re);
  for (std::size_t i = 0; i < n_im; ++i)
    scan.im[i] = im_min + (im_max - im_min) * static_cast<double>(i) / static_cast<double>(n_im - 1);
  scan.abs_r = DenseMatrix(n_im, n_re);

  parallel_for(n_im, worker_count(), [&](std::size_t i) {
    for (std::size_t j = 0; j < n_re; ++j) {
      double value;
      try {
        value = std::abs(stability_R(tables, {scan.re[j], scan.im[i]}));
      } catch (const SingularMatrix&) {
        value = std::numeric_limits<double>::infinity();  // sample sits on a pole
      }
      scan.abs_r(i, j) = value;
    }
  });
  for (std::size_t i = 0; i < n_im; ++i)
    for (std::size_t j = 0; j < n_re; ++j) {
      const double a = scan.abs_r(i, j);
      if (a < 1.0) ++scan.stable_count;
      if (scan.re[j] < 0.0) scan.max_abs_left = std::max(scan.max_abs_left, a);
    }
  return scan;
}

RayProfile stability_ray(const BasisTables& tables, double angle, double r_min, double r_max,
                         std::size_t count) {
  if (count < 2 || !(r_min > 0.0) || !(r_max > r_min)) {
    throw InvalidArgument("stability_ray needs 0 < r_min < r_max and count >= 2");
  }
  RayProfile ray;
  ray.angle = angle;
  ray.r_at_zero = stability_R(tables, {0.0, 0.0});
  const double lo = std::log(r_min), hi = std::log(r_max);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < count; ++i) {
    const double r = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    const double a = std::abs(stability_R(tables, std::polar(r, angle)));
    ray.radius.push_back(r);
    ray.abs_r.push_back(a);
    pts.emplace_back(r, a);
  }
  ray.slope = fit_order(pts, 0.0).order;
  return ray;
}

std::string to_string(Target t) {
  switch (t) {
    case Target::u_node: return "u-node";
    case Target::v_node: return "v-node";
    case Target::g_node: return "g-node";
    case Target::u_local: return "u-local";
    case Target::v_local: return "v-local";
    case Target::g_local: return "g-local";
  }
  return "unknown";
}

std::size_t worker_count(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("RADAU_DAE_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v > 0) n = static_cast<std::size_t>(v);
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::min(std::max<std::size_t>(workers, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

const OrderRow& ConvergenceStudy::row(Target t, Norm n) const {
  for (const auto& r : rows)
    if (r.target == t && r.norm == n) return r;
  throw InvalidArgument("study has no row for " + to_string(t) + " " + to_string(n));
}

double ConvergenceStudy::order(Target t, Norm n) const {
  const OrderRow& r = row(t, n);
  if (!r.fit) throw InsufficientData(to_string(t) + " " + to_string(n) + ": " + r.note);
  return r.fit->order;
}

ConvergenceStudy convergence_study(const DaeProblem& problem, std::size_t degree,
                                   std::span<const GridSpec> grids, const StudyOptions& opts) {
  if (grids.size() < 2) throw InvalidArgument("convergence_study needs at least two grids");
  if (!problem.exact) throw InvalidArgument("convergence_study needs an exact or reference solution");
  const BasisTables tables = build_tables(degree);

  std::vector<Target> targets{Target::u_node, Target::u_local};
  if (problem.d_v > 0) {
    targets = {Target::u_node, Target::v_node, Target::g_node,
               Target::u_local, Target::v_local, Target::g_local};
  }
  constexpr std::size_t kTargets = 6, kNorms = 4;

  ConvergenceStudy study;
  study.problem = problem.name;
  study.degree = degree;
  study.runs.resize(grids.size());
  std::vector<double> exact_scale(grids.size(), 0.0);

  parallel_for(grids.size(), worker_count(opts.threads), [&](std::size_t k) {
    const GridSpec& grid = grids[k];
    StudyRun& run = study.runs[k];
    run.cells = grid.cell_count();
    run.dt = (grid.t_end() - grid.t_start()) / static_cast<double>(run.cells);
    run.errors.assign(kTargets, Vector(kNorms, std::numeric_limits<double>::quiet_NaN()));
    const SolveReport rep = solve(problem, grid, tables, opts.newton);
    run.counters = rep.counters;
    if (!rep.ok()) {
      run.ok = false;
      run.failure = rep.failures.front().message;
      return;
    }
    const ErrorSeries es = pointwise_errors(problem, rep, tables, problem.exact, opts.subnodes);
    double scale = 0.0;
    for (double t : rep.node_t) {
      const State ex = problem.exact(t);
      scale = std::max({scale, norm_inf(ex.u), norm_inf(ex.v)});
    }
    exact_scale[k] = scale;
    const Vector wn = extract_weights(es.nodes), wl = extract_weights(es.local);
    for (Target t : targets) {
      const bool node = t == Target::u_node || t == Target::v_node || t == Target::g_node;
      const Quantity q = (t == Target::u_node || t == Target::u_local)   ? Quantity::u
                         : (t == Target::v_node || t == Target::v_local) ? Quantity::v
                                                                         : Quantity::g;
      const auto& samples = node ? es.nodes : es.local;
      if (samples.empty()) continue;
      const Vector psi = extract(samples, q);
      for (Norm n : opts.norms) {
        run.errors[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)] =
            global_error(psi, node ? wn : wl, n);
      }
    }
  });

  study.floor = opts.floor.value_or(1e-12 * (1.0 + *std::max_element(exact_scale.begin(), exact_scale.end())));
  for (Target t : targets) {
    for (Norm n : opts.norms) {
      OrderRow row;
      row.target = t;
      row.norm = n;
      for (const auto& run : study.runs) {
        if (!run.ok) continue;
        row.samples.emplace_back(run.dt, run.errors[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)]);
      }
      try {
        row.fit = fit_order(row.samples, study.floor);
      } catch (const InsufficientData& e) {
        row.note = e.what();
      }
      study.rows.push_back(std::move(row));
    }
  }
  return study;
}

}  // namespace radau_dae
