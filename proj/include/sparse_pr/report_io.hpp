#pragma once

#include <iosfwd>
#include <string>

#include "sparse_pr/harness.hpp"
#include "sparse_pr/trajectory.hpp"

namespace spr {

inline constexpr int kReportSchemaVersion = 1;

const char* software_version() noexcept;

/// Columns t,risk,dist,dist_phi,off_support_l1,coherence,holdout_risk. Absent
/// fields are left empty.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

/// Resolved parameters, seed and stopping summary of a single run.
void write_solve_json(std::ostream& out, const SolveOutcome& outcome);

/// One row per trial: axis_value,trial,seed,metric_oracle,metric_holdout,
/// t_warmup,t_stop,status. t_stop is the hold-out stop when the hold-out
/// metric was requested, the oracle stop otherwise.
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_sweep_json(std::ostream& out, const SweepResult& result, const std::string& figure = {});

/// Long format, one row per recorded iterate of every curve:
/// beta,sigma_over_norm_sq,t,risk,rel_dist,dist_phi,off_support_l1,coherence.
void write_curves_csv(std::ostream& out, const CurvesResult& result);
void write_curves_json(std::ostream& out, const CurvesResult& result);

/// Machine-readable failure report.
void write_error_json(std::ostream& out, const std::string& code, const std::string& message);

}  // namespace spr
