#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "radau_dae/analysis.hpp"
#include "radau_dae/basis.hpp"
#include "radau_dae/dae_model.hpp"
#include "radau_dae/errors.hpp"
#include "radau_dae/io.hpp"
#include "radau_dae/predictor.hpp"
#include "radau_dae/stepper.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace radau_dae;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolverFailure = 1;
constexpr int kExitUsage = 2;

/// A usage problem found after option parsing (bad grid, unknown problem, ...).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string problem;
  std::string degrees;
  std::string grid;
  std::string grids;
  std::vector<std::size_t> cells;
  std::size_t subnodes = 50;
  std::string norms = "l1,l2,linf,final";
  std::optional<double> newton_tol;
  std::size_t newton_max_iters = 50;
  std::string reduction = "auto";
  std::string out_dir = ".";

  std::string window = "-200:0:-200:200";
  std::size_t resolution = 400;
  std::string ray_angles = "1,1.5";  // multiples of pi
  double ray_min = 1e4;
  double ray_max = 1e6;
  std::size_t ray_points = 50;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used == s.size()) return x;
  } catch (const std::exception&) {
  }
  throw UsageError("invalid " + what + ": '" + s + "'");
}

std::size_t parse_count(const std::string& s, const std::string& what) {
  const double x = parse_number(s, what);
  if (x < 0 || x != std::floor(x)) throw UsageError(what + " must be a non-negative integer: '" + s + "'");
  return static_cast<std::size_t>(x);
}

/// "2,4,8" or ranges such as "1-8".
std::vector<std::size_t> parse_degrees(const std::string& text, std::vector<std::size_t> fallback) {
  if (text.empty()) return fallback;
  std::vector<std::size_t> out;
  for (const auto& item : split(text, ',')) {
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const std::size_t lo = parse_count(item.substr(0, dash), "degree");
      const std::size_t hi = parse_count(item.substr(dash + 1), "degree");
      if (hi < lo) throw UsageError("invalid degree range '" + item + "'");
      for (std::size_t n = lo; n <= hi; ++n) out.push_back(n);
    } else {
      out.push_back(parse_count(item, "degree"));
    }
  }
  if (out.empty()) throw UsageError("empty degree list");
  return out;
}

std::vector<Norm> parse_norms(const std::string& text) {
  std::vector<Norm> out;
  try {
    for (const auto& item : split(text, ',')) out.push_back(parse_norm(item));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (out.empty()) throw UsageError("empty norm list");
  return out;
}

DaeProblem load_problem(const std::string& spec) {
  if (spec.empty()) throw UsageError("--problem is required");
  try {
    return builtin_problems().make_from_spec(spec);
  } catch (const UnknownProblem& e) {
    std::ostringstream os;
    os << e.what() << "\navailable problems:";
    for (const auto& n : builtin_problems().names()) os << "\n  " << n;
    throw UsageError(os.str());
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

GridSpec parse_grid(const std::string& text) {
  try {
    GridSpec g = GridSpec::parse(text);
    g.validate();
    return g;
  } catch (const Error& e) {
    throw UsageError("invalid grid '" + text + "': " + e.what());
  }
}

GridSpec single_grid(const ExperimentConfig& cfg, const DaeProblem& p) {
  if (!cfg.grid.empty()) return parse_grid(cfg.grid);
  return GridSpec::uniform(p.t0, p.tf, 10);
}

std::vector<GridSpec> grid_list(const ExperimentConfig& cfg, const DaeProblem& p) {
  std::vector<GridSpec> grids;
  for (const auto& g : split(cfg.grids, ';')) grids.push_back(parse_grid(g));
  for (std::size_t c : cfg.cells) {
    if (c == 0) throw UsageError("--cells entries must be positive");
    grids.push_back(GridSpec::uniform(p.t0, p.tf, c));
  }
  if (grids.size() < 2) throw UsageError("a convergence study needs at least two grids (--grids or --cells)");
  return grids;
}

NewtonOptions newton_options(const ExperimentConfig& cfg) {
  NewtonOptions o;
  o.tolerance = cfg.newton_tol;
  o.max_iterations = cfg.newton_max_iters;
  if (o.max_iterations == 0) throw UsageError("--newton-max-iters must be positive");
  if (o.tolerance && !(*o.tolerance > 0.0)) throw UsageError("--newton-tol must be positive");
  try {
    o.reduction = parse_reduction(cfg.reduction);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return o;
}

fs::path output_dir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

json problem_json(const std::string& spec, const DaeProblem& p) {
  return {{"spec", spec}, {"name", p.name}, {"params", p.params}, {"t0", p.t0}, {"tf", p.tf},
          {"d_u", p.d_u}, {"d_v", p.d_v}, {"index", p.index}};
}

std::string stem(const DaeProblem& p, std::size_t degree) { return p.name + "_N" + std::to_string(degree); }

void write_text(const fs::path& path, const std::string& text) {
  io::write_file_atomic(path, text);
  std::cout << path.string() << '\n';
}

void report_failures(const SolveReport& r) {
  for (const auto& f : r.failures)
    std::cerr << "error: " << r.problem << " N=" << r.degree << " failed in cell " << f.cell << " (t_left "
              << io::format_double(f.t_left) << "): " << f.message << '\n';
}

int cmd_solve(const ExperimentConfig& cfg) {
  const DaeProblem p = load_problem(cfg.problem);
  const auto degrees = parse_degrees(cfg.degrees, {1});
  const GridSpec grid = single_grid(cfg, p);
  const NewtonOptions opts = newton_options(cfg);
  if (cfg.subnodes == 0) throw UsageError("--subnodes must be positive");
  const fs::path dir = output_dir(cfg);

  std::vector<SolveReport> reports(degrees.size());
  std::vector<std::vector<std::pair<fs::path, std::string>>> files(degrees.size());
  parallel_for(degrees.size(), worker_count(), [&](std::size_t i) {
    const auto tables = build_tables(degrees[i]);
    SolveReport& r = reports[i];
    r = solve(p, grid, tables, opts);
    const Trajectory local = tabulate_local(r, tables, cfg.subnodes);
    const std::string base = stem(p, degrees[i]);

    std::ostringstream traj;
    io::write_trajectory_csv(traj, r, local);
    files[i].emplace_back(dir / (base + "_trajectory.csv"), traj.str());

    json summary = io::report_summary(r);
    if (p.exact) {
      const ErrorSeries errs = pointwise_errors(p, r, tables, p.exact, cfg.subnodes);
      std::ostringstream es;
      io::write_errors_csv(es, errs);
      files[i].emplace_back(dir / (base + "_errors.csv"), es.str());
      json g;
      for (const auto& [name, series] : {std::pair{"node", &errs.nodes}, std::pair{"local", &errs.local}}) {
        const Vector w = extract_weights(*series);
        for (Quantity q : {Quantity::u, Quantity::v, Quantity::g}) {
          const char* qn = q == Quantity::u ? "u" : q == Quantity::v ? "v" : "g";
          const Vector e = extract(*series, q);
          if (e.empty()) continue;
          for (Norm n : parse_norms(cfg.norms))
            g[std::string(name) + "_" + qn][to_string(n)] = global_error(e, w, n);
        }
      }
      summary["global_errors"] = g;
    }
    json sidecar = {{"config",
                     {{"command", "solve"},
                      {"problem", problem_json(cfg.problem, p)},
                      {"degree", degrees[i]},
                      {"grid", io::to_json(grid)},
                      {"subnodes", cfg.subnodes},
                      {"norms", cfg.norms},
                      {"newton", io::to_json(opts)},
                      {"out_dir", cfg.out_dir}}},
                    {"result", summary}};
    files[i].emplace_back(dir / (base + "_run.json"), sidecar.dump(2) + "\n");
  });

  int code = kExitOk;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    for (const auto& [path, text] : files[i]) write_text(path, text);
    if (!reports[i].ok()) {
      report_failures(reports[i]);
      code = kExitSolverFailure;
    }
  }
  return code;
}

int cmd_convergence(const ExperimentConfig& cfg) {
  const DaeProblem p = load_problem(cfg.problem);
  const auto degrees = parse_degrees(cfg.degrees, {1});
  const auto grids = grid_list(cfg, p);
  StudyOptions so;
  so.subnodes = cfg.subnodes;
  so.newton = newton_options(cfg);
  so.norms = parse_norms(cfg.norms);
  const fs::path dir = output_dir(cfg);

  std::ostringstream orders, errors;
  json studies = json::array();
  int code = kExitOk;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    const ConvergenceStudy s = convergence_study(p, degrees[i], grids, so);
    io::write_orders_csv(orders, s, i == 0);
    io::write_study_errors_csv(errors, s, i == 0);
    json runs = json::array();
    for (const auto& r : s.runs) {
      runs.push_back({{"cells", r.cells}, {"dt", r.dt}, {"ok", r.ok}, {"failure", r.failure},
                      {"counters", io::to_json(r.counters)}});
      if (!r.ok) {
        std::cerr << "error: " << p.name << " N=" << degrees[i] << " with " << r.cells
                  << " cells failed: " << r.failure << '\n';
        code = kExitSolverFailure;
      }
    }
    json rows = json::array();
    for (const auto& row : s.rows) {
      json jr = {{"target", to_string(row.target)}, {"norm", to_string(row.norm)}, {"note", row.note}};
      jr["p"] = row.fit ? json(row.fit->order) : json(nullptr);
      rows.push_back(jr);
    }
    studies.push_back({{"degree", degrees[i]}, {"floor", s.floor}, {"runs", runs}, {"orders", rows}});
  }

  json grid_json = json::array();
  for (const auto& g : grids) grid_json.push_back(io::to_json(g));
  json sidecar = {{"config",
                   {{"command", "convergence"},
                    {"problem", problem_json(cfg.problem, p)},
                    {"degrees", degrees},
                    {"grids", grid_json},
                    {"subnodes", cfg.subnodes},
                    {"norms", cfg.norms},
                    {"newton", io::to_json(so.newton)},
                    {"threads", worker_count()},
                    {"out_dir", cfg.out_dir}}},
                  {"studies", studies}};
  write_text(dir / (p.name + "_orders.csv"), orders.str());
  write_text(dir / (p.name + "_study_errors.csv"), errors.str());
  write_text(dir / (p.name + "_convergence.json"), sidecar.dump(2) + "\n");
  return code;
}

int cmd_newton_trace(const ExperimentConfig& cfg) {
  const DaeProblem p = load_problem(cfg.problem);
  const auto degrees = parse_degrees(cfg.degrees, {4});
  const GridSpec grid = single_grid(cfg, p);
  const NewtonOptions opts = newton_options(cfg);
  const fs::path dir = output_dir(cfg);

  int code = kExitOk;
  for (std::size_t n : degrees) {
    const SolveReport r = solve(p, grid, build_tables(n), opts);
    std::ostringstream os;
    io::write_newton_trace_csv(os, r);
    write_text(dir / (stem(p, n) + "_newton_trace.csv"), os.str());
    json cells = json::array();
    for (std::size_t c = 0; c < r.traces.size(); ++c)
      cells.push_back({{"cell", c}, {"iterations", r.traces[c].iterations},
                       {"converged", r.traces[c].converged}, {"stagnated", r.traces[c].stagnated},
                       {"reduction", to_string(r.traces[c].used)}});
    json sidecar = {{"config",
                     {{"command", "newton-trace"},
                      {"problem", problem_json(cfg.problem, p)},
                      {"degree", n},
                      {"grid", io::to_json(grid)},
                      {"newton", io::to_json(opts)},
                      {"out_dir", cfg.out_dir}}},
                    {"result", io::report_summary(r)},
                    {"cells", cells}};
    write_text(dir / (stem(p, n) + "_newton_trace.json"), sidecar.dump(2) + "\n");
    if (!r.ok()) {
      report_failures(r);
      code = kExitSolverFailure;
    }
  }
  return code;
}

int cmd_stability(const ExperimentConfig& cfg) {
  const auto degrees = parse_degrees(cfg.degrees, {1, 2, 3, 4, 5, 6, 7, 8});
  const auto w = split(cfg.window, ':');
  if (w.size() != 4) throw UsageError("--window expects re_min:re_max:im_min:im_max");
  const double re_min = parse_number(w[0], "window"), re_max = parse_number(w[1], "window");
  const double im_min = parse_number(w[2], "window"), im_max = parse_number(w[3], "window");
  if (!(re_min < re_max) || !(im_min <= im_max)) throw UsageError("empty stability window");
  if (cfg.resolution < 2) throw UsageError("--resolution must be at least 2");
  std::vector<double> angles;
  for (const auto& a : split(cfg.ray_angles, ',')) angles.push_back(parse_number(a, "ray angle"));
  if (!(cfg.ray_min > 0.0 && cfg.ray_min < cfg.ray_max) || cfg.ray_points < 2)
    throw UsageError("invalid ray radius range");
  const fs::path dir = output_dir(cfg);

  std::vector<std::string> rasters(degrees.size()), rays(degrees.size());
  std::vector<json> summaries(degrees.size());
  parallel_for(degrees.size(), worker_count(), [&](std::size_t i) {
    const auto t = build_tables(degrees[i]);
    const StabilityScan scan =
        stability_scan(t, re_min, re_max, im_min, im_max, cfg.resolution, cfg.resolution);
    std::ostringstream rs, ys;
    io::write_stability_csv(rs, scan);
    json ray_json = json::array();
    for (std::size_t k = 0; k < angles.size(); ++k) {
      const RayProfile ray = stability_ray(t, angles[k] * std::numbers::pi, cfg.ray_min, cfg.ray_max, cfg.ray_points);
      io::write_ray_csv(ys, ray, k == 0);
      ray_json.push_back({{"angle", ray.angle}, {"slope", ray.slope},
                          {"r_at_zero", {ray.r_at_zero.real(), ray.r_at_zero.imag()}}});
    }
    rasters[i] = rs.str();
    rays[i] = ys.str();
    summaries[i] = {{"degree", degrees[i]}, {"max_abs_left", scan.max_abs_left},
                    {"stable_count", scan.stable_count}, {"rays", ray_json}};
  });

  for (std::size_t i = 0; i < degrees.size(); ++i) {
    write_text(dir / ("stability_N" + std::to_string(degrees[i]) + ".csv"), rasters[i]);
    write_text(dir / ("stability_rays_N" + std::to_string(degrees[i]) + ".csv"), rays[i]);
  }
  json sidecar = {{"config",
                   {{"command", "stability"},
                    {"degrees", degrees},
                    {"window", {re_min, re_max, im_min, im_max}},
                    {"resolution", cfg.resolution},
                    {"ray_angles_over_pi", angles},
                    {"ray_radius", {cfg.ray_min, cfg.ray_max}},
                    {"ray_points", cfg.ray_points},
                    {"out_dir", cfg.out_dir}}},
                  {"results", summaries}};
  write_text(dir / "stability.json", sidecar.dump(2) + "\n");
  return kExitOk;
}

int cmd_list_problems() {
  for (const auto& e : builtin_problems().entries()) {
    std::cout << e.name << "\n    " << e.description << '\n';
    if (!e.defaults.empty()) {
      std::cout << "    parameters:";
      for (const auto& [k, v] : e.defaults) std::cout << ' ' << k << '=' << io::format_double(v);
      std::cout << '\n';
    }
  }
  return kExitOk;
}

int cmd_tables(const ExperimentConfig& cfg) {
  const auto degrees = parse_degrees(cfg.degrees, {1});
  const fs::path dir = output_dir(cfg);
  for (std::size_t n : degrees)
    write_text(dir / ("tables_N" + std::to_string(n) + ".json"), io::to_json(build_tables(n)).dump(2) + "\n");
  return kExitOk;
}

void add_common(CLI::App* sub, ExperimentConfig& cfg, bool with_problem = true) {
  if (with_problem)
    sub->add_option("--problem", cfg.problem, "Problem name with optional overrides, e.g. flame,delta=1e-4")
        ->required();
  sub->add_option("--out-dir", cfg.out_dir, "Directory for output files")->capture_default_str();
}

void add_newton(CLI::App* sub, ExperimentConfig& cfg) {
  sub->add_option("--newton-tol", cfg.newton_tol, "Newton increment tolerance (default scales with the state)");
  sub->add_option("--newton-max-iters", cfg.newton_max_iters, "Newton iteration cap")->capture_default_str();
  sub->add_option("--reduction", cfg.reduction, "Linear solve: full, via-r, via-s or auto")
      ->check(CLI::IsMember({"full", "full_block", "via-r", "via_r", "via-s", "via_s", "auto"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ADER-DG integrator for differential-algebraic systems"};
  app.require_subcommand(1);
  ExperimentConfig cfg;

  auto* solve_cmd = app.add_subcommand("solve", "Single run: trajectory, errors and counters");
  add_common(solve_cmd, cfg);
  solve_cmd->add_option("--degree", cfg.degrees, "Degree list, e.g. 3 or 2,4,8 or 1-8");
  solve_cmd->add_option("--grid", cfg.grid, "start:end:cells[,start:end:cells...]");
  solve_cmd->add_option("--subnodes", cfg.subnodes, "Local-solution samples per cell")->capture_default_str();
  solve_cmd->add_option("--norms", cfg.norms, "Norms reported in the sidecar")->capture_default_str();
  add_newton(solve_cmd, cfg);

  auto* conv_cmd = app.add_subcommand("convergence", "Error and fitted order over a grid family");
  add_common(conv_cmd, cfg);
  conv_cmd->add_option("--degree", cfg.degrees, "Degree list");
  conv_cmd->add_option("--grids", cfg.grids, "Semicolon-separated grid specs");
  conv_cmd->add_option("--cells", cfg.cells, "Uniform cell counts over the problem interval")->delimiter(',');
  conv_cmd->add_option("--subnodes", cfg.subnodes, "Local-solution samples per cell")->capture_default_str();
  conv_cmd->add_option("--norms", cfg.norms, "Norms to fit")->capture_default_str();
  add_newton(conv_cmd, cfg);

  auto* trace_cmd = app.add_subcommand("newton-trace", "Per-cell Newton increment history");
  add_common(trace_cmd, cfg);
  trace_cmd->add_option("--degree", cfg.degrees, "Degree list");
  trace_cmd->add_option("--grid", cfg.grid, "start:end:cells[,start:end:cells...]");
  add_newton(trace_cmd, cfg);

  auto* stab_cmd = app.add_subcommand("stability", "|R(z)| rasters and ray profiles");
  add_common(stab_cmd, cfg, false);
  stab_cmd->add_option("--degree", cfg.degrees, "Degree list (default 1-8)");
  stab_cmd->add_option("--window", cfg.window, "re_min:re_max:im_min:im_max")->capture_default_str();
  stab_cmd->add_option("--resolution", cfg.resolution, "Samples per axis")->capture_default_str();
  stab_cmd->add_option("--ray-angles", cfg.ray_angles, "Ray arguments in multiples of pi")->capture_default_str();
  stab_cmd->add_option("--ray-min", cfg.ray_min, "Smallest ray radius")->capture_default_str();
  stab_cmd->add_option("--ray-max", cfg.ray_max, "Largest ray radius")->capture_default_str();
  stab_cmd->add_option("--ray-points", cfg.ray_points, "Log-spaced samples per ray")->capture_default_str();

  auto* list_cmd = app.add_subcommand("list-problems", "Print the built-in problems and their parameters");

  auto* tables_cmd = app.add_subcommand("tables", "Write basis tables as JSON");
  add_common(tables_cmd, cfg, false);
  tables_cmd->add_option("--degree", cfg.degrees, "Degree list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(cfg);
    if (*conv_cmd) return cmd_convergence(cfg);
    if (*trace_cmd) return cmd_newton_trace(cfg);
    if (*stab_cmd) return cmd_stability(cfg);
    if (*list_cmd) return cmd_list_problems();
    if (*tables_cmd) return cmd_tables(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
  return kExitUsage;
}
