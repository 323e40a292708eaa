#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include <json.hpp>

#include "radau_dae/analysis.hpp"
#include "radau_dae/basis.hpp"
#include "radau_dae/predictor.hpp"
#include "radau_dae/stepper.hpp"

namespace radau_dae::io {

/// Round-trip decimal form ("%.17g"), independent of the locale.
std::string format_double(double x);

/// Columns t, u_1..u_du, v_1..v_dv, source (node or local).
void write_trajectory_csv(std::ostream& os, const SolveReport& report, const Trajectory& local);
/// Columns t, eps_u, eps_v, eps_<label>..., source.
void write_errors_csv(std::ostream& os, const ErrorSeries& errors);
/// Columns cell, iteration, dx, neg_log10_dx.
void write_newton_trace_csv(std::ostream& os, const SolveReport& report);
/// Columns N, target, norm, p, samples_used, discarded, residual.
void write_orders_csv(std::ostream& os, const ConvergenceStudy& study, bool header = true);
/// Columns N, cells, dt, target, norm, error.
void write_study_errors_csv(std::ostream& os, const ConvergenceStudy& study, bool header = true);
/// Columns re, im, abs_r.
void write_stability_csv(std::ostream& os, const StabilityScan& scan);
/// Columns angle, radius, abs_r.
void write_ray_csv(std::ostream& os, const RayProfile& ray, bool header = true);

nlohmann::json to_json(const SolverCounters& c);
nlohmann::json to_json(const BasisTables& t);
nlohmann::json to_json(const NewtonOptions& o);
nlohmann::json to_json(const GridSpec& g);
/// Counters, failures and node count of a run.
nlohmann::json report_summary(const SolveReport& r);

/// Writes to a temporary sibling and renames, so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace radau_dae::io
