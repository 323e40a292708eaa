#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "radau_dae/io.hpp"

using namespace radau_dae;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("round-trip number formatting") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(std::stod(io::format_double(x)) == x);
  }
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(INFINITY) == "inf");
}

TEST_CASE("trajectory and error CSV layout") {
  const DaeProblem p = builtin_problems().make("demo_index1");
  const auto t = build_tables(3);
  const SolveReport r = solve(p, GridSpec::uniform(0.0, 10.0, 4), t);
  const Trajectory local = tabulate_local(r, t, 2);
  std::ostringstream os;
  io::write_trajectory_csv(os, r, local);
  const auto l = lines(os.str());
  CHECK(l[0] == "t,u_1,u_2,v_1,source");
  CHECK(l.size() == 1 + 5 + 8);
  CHECK(l[1].rfind("0,1,0,1,node", 0) == 0);
  CHECK(l.back().substr(l.back().size() - 5) == "local");

  std::ostringstream es;
  io::write_errors_csv(es, pointwise_errors(p, r, t, p.exact, 2));
  CHECK(lines(es.str())[0] == "t,eps_u,eps_v,eps_g,source");
}

TEST_CASE("identical runs give identical CSV") {
  const DaeProblem p = builtin_problems().make("pendulum_index2");
  const auto t = build_tables(4);
  auto render = [&] {
    const SolveReport r = solve(p, GridSpec::uniform(0.0, 10.0, 12), t);
    std::ostringstream os;
    io::write_trajectory_csv(os, r, tabulate_local(r, t, 5));
    io::write_newton_trace_csv(os, r);
    return os.str();
  };
  CHECK(render() == render());
}

TEST_CASE("Newton trace CSV") {
  const DaeProblem p = builtin_problems().make("newton_demo");
  const SolveReport r = solve(p, GridSpec::uniform(0.0, 1.0, 2), build_tables(2));
  std::ostringstream os;
  io::write_newton_trace_csv(os, r);
  const auto l = lines(os.str());
  CHECK(l[0] == "cell,iteration,dx,neg_log10_dx");
  CHECK(l[1].rfind("0,1,", 0) == 0);
  CHECK(l.size() == 1 + r.traces[0].iterations + r.traces[1].iterations);
}

TEST_CASE("stability and ray CSV") {
  const auto t = build_tables(1);
  std::ostringstream os;
  io::write_stability_csv(os, stability_scan(t, -2.0, 0.0, -1.0, 1.0, 2, 2));
  const auto l = lines(os.str());
  CHECK(l[0] == "re,im,abs_r");
  CHECK(l.size() == 5);
  CHECK(l[1].rfind("-2,-1,", 0) == 0);

  std::ostringstream rs;
  io::write_ray_csv(rs, stability_ray(t, 3.0, 1.0, 10.0, 3));
  const auto rl = lines(rs.str());
  CHECK(rl[1] == "3,0,1");
  CHECK(rl.size() == 5);
}

TEST_CASE("order CSV") {
  const DaeProblem p = builtin_problems().make("simple_index1");
  std::vector<GridSpec> g{GridSpec::uniform(p.t0, p.tf, 9), GridSpec::uniform(p.t0, p.tf, 13)};
  const auto s = convergence_study(p, 2, g);
  std::ostringstream os;
  io::write_orders_csv(os, s);
  const auto l = lines(os.str());
  CHECK(l[0] == "N,target,norm,p,samples_used,discarded,residual");
  CHECK(l.size() == 1 + 6 * 4);
  CHECK(l[1].rfind("2,u-node,L1,", 0) == 0);
  std::ostringstream es;
  io::write_study_errors_csv(es, s);
  CHECK(lines(es.str()).size() == 1 + 6 * 4 * 2);
}

TEST_CASE("JSON summaries") {
  const DaeProblem p = builtin_problems().make("ode_harmonic");
  const auto t = build_tables(2);
  const SolveReport r = solve(p, GridSpec::uniform(0.0, 1.0, 3), t);
  const auto j = io::report_summary(r);
  CHECK(j["ok"] == true);
  CHECK(j["nodes"] == 4);
  CHECK(j["counters"]["f_evals"] == r.counters.f_evals);
  CHECK(io::to_json(t)["nodes"].size() == 3);
  CHECK(io::to_json(GridSpec::parse("0:1:2,1:3:4"))["cells"] == 6);
  CHECK(io::to_json(NewtonOptions{})["tolerance"] == "default");
}

TEST_CASE("atomic file writes") {
  const auto dir = std::filesystem::temp_directory_path() / "radau_dae_io_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "sub" / "out.txt";
  io::write_file_atomic(path, "hello\n");
  io::write_file_atomic(path, "world\n");
  std::ifstream in(path);
  std::string s;
  std::getline(in, s);
  CHECK(s == "world");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove_all(dir);
}
