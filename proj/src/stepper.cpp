#include "radau_dae/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "radau_dae/errors.hpp"

namespace radau_dae {

GridSpec GridSpec::uniform(double t0, double tf, std::size_t cells) {
  GridSpec g;
  g.segments.push_back({t0, tf, cells});
  g.validate();
  return g;
}

GridSpec GridSpec::parse(const std::string& text) {
  GridSpec g;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    GridSegment seg;
    std::stringstream is(item);
    std::string a, b, c;
    if (!std::getline(is, a, ':') || !std::getline(is, b, ':') || !std::getline(is, c) ||
        c.find(':') != std::string::npos) {
      throw InvalidArgument("grid segment '" + item + "' is not start:end:cells");
    }
    try {
      std::size_t used = 0;
      seg.t_start = std::stod(a, &used);
      if (used != a.size()) throw std::invalid_argument(a);
      seg.t_end = std::stod(b, &used);
      if (used != b.size()) throw std::invalid_argument(b);
      const long long cells = std::stoll(c, &used);
      if (used != c.size() || cells < 1) throw std::invalid_argument(c);
      seg.cells = static_cast<std::size_t>(cells);
    } catch (const std::logic_error&) {
      throw InvalidArgument("grid segment '" + item + "' is not start:end:cells");
    }
    g.segments.push_back(seg);
  }
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (segments.empty()) throw InvalidArgument("grid has no segments");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.cells < 1) throw InvalidArgument("grid segment needs at least one cell");
    if (!(s.t_end > s.t_start)) throw InvalidArgument("grid segment end must exceed its start");
    if (i > 0) {
      const double prev = segments[i - 1].t_end;
      if (std::abs(prev - s.t_start) > 1e-12 * (1.0 + std::abs(prev))) {
        throw InvalidArgument("grid segments are not contiguous");
      }
    }
  }
}

std::size_t GridSpec::cell_count() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.cells;
  return n;
}

double GridSpec::t_start() const { return segments.front().t_start; }
double GridSpec::t_end() const { return segments.back().t_end; }

Vector GridSpec::nodes() const {
  Vector t;
  t.reserve(cell_count() + 1);
  t.push_back(t_start());
  for (const auto& s : segments) {
    const double dt = s.dt();
    for (std::size_t i = 1; i < s.cells; ++i) t.push_back(s.t_start + static_cast<double>(i) * dt);
    t.push_back(s.t_end);
  }
  return t;
}

Vector GridSpec::steps() const {
  Vector dt;
  dt.reserve(cell_count());
  for (const auto& s : segments) dt.insert(dt.end(), s.cells, s.dt());
  return dt;
}

std::string GridSpec::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i) os << ',';
    os << segments[i].t_start << ':' << segments[i].t_end << ':' << segments[i].cells;
  }
  return os.str();
}

State advance_cell(const BasisTables& tables, const CellSolution& cell,
                   std::span<const double> u_n) {
  State next;
  next.u.assign(u_n.begin(), u_n.end());
  for (std::size_t p = 0; p < tables.size(); ++p) {
    const double w = tables.weights[p] * cell.dt;
    for (std::size_t i = 0; i < next.u.size(); ++i) next.u[i] += w * cell.f_hat(p, i);
  }
  const auto last = cell.r_hat.row(tables.size() - 1);
  next.v.assign(last.begin(), last.end());
  return next;
}

SolveReport solve(const DaeProblem& problem, const GridSpec& grid, const BasisTables& tables,
                  const NewtonOptions& opts) {
  grid.validate();
  if (std::abs(grid.t_start() - problem.t0) > 1e-12 * (1.0 + std::abs(problem.t0))) {
    throw InvalidArgument("grid must start at the problem's initial time");
  }
  SolveReport rep;
  rep.problem = problem.name;
  rep.degree = tables.degree;
  const Vector t = grid.nodes();
  const Vector steps = grid.steps();
  const std::size_t cells = steps.size();
  rep.cells.reserve(cells);
  rep.traces.reserve(cells);

  std::vector<Vector> us{problem.u0}, vs{problem.v0};
  for (std::size_t n = 0; n < cells; ++n) {
    try {
      NewtonResult r =
          newton_solve(problem, tables, steps[n], t[n], us.back(), vs.back(), opts, rep.counters, n);
      State next = advance_cell(tables, r.cell, us.back());
      us.push_back(std::move(next.u));
      vs.push_back(std::move(next.v));
      rep.cells.push_back(std::move(r.cell));
      rep.traces.push_back(std::move(r.trace));
    } catch (const Error& e) {
      rep.failures.push_back({n, t[n], e.what()});
      break;
    }
  }

  const std::size_t reached = us.size();
  rep.node_t.assign(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(reached));
  rep.node_u = DenseMatrix(reached, problem.d_u);
  rep.node_v = DenseMatrix(reached, problem.d_v);
  for (std::size_t n = 0; n < reached; ++n) {
    std::copy(us[n].begin(), us[n].end(), rep.node_u.row(n).begin());
    std::copy(vs[n].begin(), vs[n].end(), rep.node_v.row(n).begin());
  }
  return rep;
}

std::size_t locate_cell(const SolveReport& report, double t) {
  if (report.cells.empty()) throw OutOfRange("report has no solved cells");
  const double lo = report.node_t.front();
  const double hi = report.node_t[report.cells.size()];
  if (!(t >= lo && t <= hi)) {
    std::ostringstream os;
    os.precision(17);
    os << "t = " << t << " outside the solved span [" << lo << ", " << hi << "]";
    throw OutOfRange(os.str());
  }
  // first node >= t; cells are closed on the right
  const auto end = report.node_t.begin() + static_cast<std::ptrdiff_t>(report.cells.size() + 1);
  const auto it = std::lower_bound(report.node_t.begin(), end, t);
  const std::size_t idx = static_cast<std::size_t>(it - report.node_t.begin());
  return idx == 0 ? 0 : idx - 1;
}

namespace {

void accumulate(const DenseMatrix& coeffs, std::span<const double> phi, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t p = 0; p < phi.size(); ++p)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += phi[p] * coeffs(p, i);
}

}  // namespace

State eval_local(const SolveReport& report, const BasisTables& tables, double t) {
  const std::size_t n = locate_cell(report, t);
  const CellSolution& c = report.cells[n];
  const double t_right = report.node_t[n + 1];
  const double tau = t == t_right ? 1.0 : std::clamp((t - c.t_left) / c.dt, 0.0, 1.0);
  const Vector phi = eval_basis(tables, tau);
  State s{Vector(c.q_hat.cols()), Vector(c.r_hat.cols())};
  accumulate(c.q_hat, phi, s.u);
  accumulate(c.r_hat, phi, s.v);
  return s;
}

Trajectory tabulate_local_at(const SolveReport& report, const BasisTables& tables,
                             std::span<const double> taus) {
  const std::size_t m = taus.size();
  const std::size_t total = report.cells.size() * m;
  const std::size_t du = report.node_u.cols(), dv = report.node_v.cols();
  Trajectory tr;
  tr.t.reserve(total);
  tr.weight.reserve(total);
  tr.u = DenseMatrix(total, du);
  tr.v = DenseMatrix(total, dv);
  const DenseMatrix phi = eval_basis_matrix(tables, taus);
  std::size_t row = 0;
  for (const auto& c : report.cells) {
    for (std::size_t j = 0; j < m; ++j, ++row) {
      tr.t.push_back(c.t_left + taus[j] * c.dt);
      tr.weight.push_back(c.dt / static_cast<double>(m));
      accumulate(c.q_hat, phi.row(j), tr.u.row(row));
      accumulate(c.r_hat, phi.row(j), tr.v.row(row));
    }
  }
  return tr;
}

Trajectory tabulate_local(const SolveReport& report, const BasisTables& tables, std::size_t m) {
  if (m < 1) throw InvalidArgument("tabulate_local needs at least one sub-node");
  Vector taus(m);
  for (std::size_t j = 0; j < m; ++j) taus[j] = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
  return tabulate_local_at(report, tables, taus);
}

}  // namespace radau_dae
