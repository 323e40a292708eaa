#include "radau_dae/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "radau_dae/errors.hpp"

namespace radau_dae::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", x);
  std::string s(buf.data());
  // %g respects LC_NUMERIC; force '.'
  for (char& ch : s)
    if (ch == ',') ch = '.';
  return s;
}

namespace {

void write_row(std::ostream& os, double t, std::span<const double> u, std::span<const double> v,
               const char* source) {
  os << format_double(t);
  for (double x : u) os << ',' << format_double(x);
  for (double x : v) os << ',' << format_double(x);
  os << ',' << source << '\n';
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const SolveReport& report, const Trajectory& local) {
  const std::size_t du = report.node_u.cols(), dv = report.node_v.cols();
  os << 't';
  for (std::size_t i = 1; i <= du; ++i) os << ",u_" << i;
  for (std::size_t i = 1; i <= dv; ++i) os << ",v_" << i;
  os << ",source\n";
  for (std::size_t n = 0; n < report.nodes_reached(); ++n)
    write_row(os, report.node_t[n], report.node_u.row(n), report.node_v.row(n), "node");
  for (std::size_t i = 0; i < local.t.size(); ++i)
    write_row(os, local.t[i], local.u.row(i), local.v.row(i), "local");
}

void write_errors_csv(std::ostream& os, const ErrorSeries& errors) {
  os << "t,eps_u,eps_v";
  for (const auto& l : errors.constraint_labels) os << ",eps_" << l;
  os << ",source\n";
  auto emit = [&](const std::vector<ErrorSample>& samples, const char* source) {
    for (const auto& s : samples) {
      os << format_double(s.t) << ',' << format_double(s.eps_u) << ',' << format_double(s.eps_v);
      for (double g : s.eps_g) os << ',' << format_double(g);
      os << ',' << source << '\n';
    }
  };
  emit(errors.nodes, "node");
  emit(errors.local, "local");
}

void write_newton_trace_csv(std::ostream& os, const SolveReport& report) {
  os << "cell,iteration,dx,neg_log10_dx\n";
  for (std::size_t c = 0; c < report.traces.size(); ++c) {
    const auto& tr = report.traces[c];
    for (std::size_t i = 0; i < tr.increments.size(); ++i) {
      const double dx = tr.increments[i];
      os << c << ',' << (i + 1) << ',' << format_double(dx) << ','
         << format_double(dx > 0.0 ? -std::log10(dx) : std::numeric_limits<double>::infinity()) << '\n';
    }
  }
}

void write_orders_csv(std::ostream& os, const ConvergenceStudy& study, bool header) {
  if (header) os << "N,target,norm,p,samples_used,discarded,residual\n";
  for (const auto& r : study.rows) {
    os << study.degree << ',' << to_string(r.target) << ',' << to_string(r.norm) << ',';
    if (r.fit) {
      os << format_double(r.fit->order) << ',' << r.fit->used << ',' << r.fit->discarded << ','
         << format_double(r.fit->residual) << '\n';
    } else {
      os << "nan,0," << r.samples.size() << ",nan\n";
    }
  }
}

void write_study_errors_csv(std::ostream& os, const ConvergenceStudy& study, bool header) {
  if (header) os << "N,cells,dt,target,norm,error\n";
  for (const auto& r : study.rows) {
    std::size_t k = 0;
    for (const auto& run : study.runs) {
      if (!run.ok) continue;
      const auto& [dt, e] = r.samples[k++];
      os << study.degree << ',' << run.cells << ',' << format_double(dt) << ',' << to_string(r.target) << ','
         << to_string(r.norm) << ',' << format_double(e) << '\n';
    }
  }
}

void write_stability_csv(std::ostream& os, const StabilityScan& scan) {
  os << "re,im,abs_r\n";
  for (std::size_t i = 0; i < scan.im.size(); ++i)
    for (std::size_t j = 0; j < scan.re.size(); ++j)
      os << format_double(scan.re[j]) << ',' << format_double(scan.im[i]) << ','
         << format_double(scan.abs_r(i, j)) << '\n';
}

void write_ray_csv(std::ostream& os, const RayProfile& ray, bool header) {
  if (header) os << "angle,radius,abs_r\n";
  os << format_double(ray.angle) << ",0," << format_double(std::abs(ray.r_at_zero)) << '\n';
  for (std::size_t i = 0; i < ray.radius.size(); ++i)
    os << format_double(ray.angle) << ',' << format_double(ray.radius[i]) << ','
       << format_double(ray.abs_r[i]) << '\n';
}

nlohmann::json to_json(const SolverCounters& c) {
  return {{"f_evals", c.f_evals},
          {"g_evals", c.g_evals},
          {"jf_u_evals", c.jf_u_evals},
          {"jf_v_evals", c.jf_v_evals},
          {"jg_u_evals", c.jg_u_evals},
          {"jg_v_evals", c.jg_v_evals},
          {"jac_evals", c.jac_evals()},
          {"lu_factorizations", c.lu_factorizations},
          {"block_factorizations", c.block_factorizations},
          {"newton_iterations", c.newton_iterations}};
}

namespace {

nlohmann::json matrix_json(const DenseMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

}  // namespace

nlohmann::json to_json(const BasisTables& t) {
  return {{"degree", t.degree},
          {"nodes", t.nodes},
          {"weights", t.weights},
          {"a_matrix", matrix_json(t.a_matrix)},
          {"k_inv", matrix_json(t.k_inv)},
          {"phi_at_zero", t.phi_at_zero},
          {"conditioning_guaranteed", t.conditioning_guaranteed}};
}

nlohmann::json to_json(const NewtonOptions& o) {
  nlohmann::json j = {{"max_iterations", o.max_iterations}, {"reduction", to_string(o.reduction)}};
  j["tolerance"] = o.tolerance ? nlohmann::json(*o.tolerance) : nlohmann::json("default");
  return j;
}

nlohmann::json to_json(const GridSpec& g) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : g.segments) segs.push_back({{"start", s.t_start}, {"end", s.t_end}, {"cells", s.cells}});
  return {{"spec", g.to_string()}, {"segments", segs}, {"cells", g.cell_count()}};
}

nlohmann::json report_summary(const SolveReport& r) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : r.failures) failures.push_back({{"cell", f.cell}, {"t_left", f.t_left}, {"message", f.message}});
  std::size_t max_iters = 0;
  for (const auto& t : r.traces) max_iters = std::max(max_iters, t.iterations);
  return {{"problem", r.problem},
          {"degree", r.degree},
          {"cells_solved", r.cells.size()},
          {"nodes", r.nodes_reached()},
          {"max_newton_iterations_per_cell", max_iters},
          {"counters", to_json(r.counters)},
          {"failures", failures},
          {"ok", r.ok()}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace radau_dae::io
