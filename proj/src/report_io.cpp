#include "sparse_pr/report_io.hpp"

#include <cmath>
#include <ostream>

#include <json.hpp>

#include "sparse_pr/error.hpp"
#include "sparse_pr/format.hpp"

namespace spr {

using Json = nlohmann::ordered_json;

const char* software_version() noexcept { return SPARSE_PR_VERSION; }

namespace {

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string field(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string{}; }

void header(Json& j, const char* kind) {
  j["schema_version"] = kReportSchemaVersion;
  j["software_version"] = software_version();
  j["kind"] = kind;
}

void dump(std::ostream& out, const Json& j) {
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "failed to write JSON report");
}

Json solver_json(const SolverConfig& c) {
  Json j;
  j["beta"] = c.beta;
  j["eta"] = opt(c.eta);
  j["max_iters"] = c.max_iters;
  j["record_every"] = c.record_every;
  return j;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "t,risk,dist,dist_phi,off_support_l1,coherence,holdout_risk\n";
  for (const auto& r : trajectory.records) {
    out << r.t << ',' << format_double(r.risk) << ',' << format_optional(r.dist) << ','
        << format_optional(r.dist_phi) << ',' << format_optional(r.off_support_l1) << ','
        << format_optional(r.coherence) << ',' << format_optional(r.holdout_risk) << '\n';
  }
  if (!out) throw Error(ErrorCode::io, "failed to write trajectory CSV");
}

void write_solve_json(std::ostream& out, const SolveOutcome& o) {
  Json j;
  header(j, "solve");
  const SolveSpec& s = o.spec;
  Json params;
  params["n"] = s.problem.n;
  params["m"] = s.problem.m;
  params["k"] = s.problem.k;
  params["sigma_over_norm_sq"] = s.problem.noise;
  params["sigma"] = o.problem.data.sigma();
  params["magnitude_range"] = {s.problem.range.lo, s.problem.range.hi};
  params["solver"] = solver_json(o.trajectory.config);
  params["holdout_fraction"] = opt(s.holdout_fraction);
  j["parameters"] = params;
  j["seed"] = s.seed;
  j["status"] = to_string(o.trajectory.status);
  j["terminated_at"] = opt(o.trajectory.terminated_at);
  j["message"] = o.message;
  j["initial_coordinate"] = o.trajectory.initial_coordinate;
  j["signal_norm"] = o.problem.signal.norm2();
  j["t_stop_oracle"] = o.oracle ? Json(o.oracle->t_star) : Json(nullptr);
  j["t_stop_holdout"] = o.holdout ? Json(o.holdout->t_stop) : Json(nullptr);
  j["t_warmup"] = opt(o.t_warmup);
  j["min_rel_error"] = o.oracle ? finite_or_null(o.oracle->min_rel_error) : Json(nullptr);
  j["holdout_rel_error"] = opt(o.holdout_rel_error);
  if (!o.trajectory.records.empty()) {
    const auto& last = o.trajectory.records.back();
    j["final_t"] = last.t;
    j["final_risk"] = finite_or_null(last.risk);
    j["final_rel_error"] = last.dist ? finite_or_null(*last.dist / o.problem.signal.norm2()) : Json(nullptr);
  }
  dump(out, j);
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "axis_value,trial,seed,metric_oracle,metric_holdout,t_warmup,t_stop,status\n";
  const bool holdout = result.spec.metrics.holdout;
  for (const auto& t : result.trials) {
    out << format_double(t.axis_value) << ',' << t.trial << ',' << t.seed << ',' << format_optional(t.oracle_error)
        << ',' << format_optional(t.holdout_error) << ',' << field(t.t_warmup) << ','
        << field(holdout ? t.t_stop_holdout : t.t_stop_oracle) << ',' << to_string(t.status) << '\n';
  }
  if (!out) throw Error(ErrorCode::io, "failed to write sweep CSV");
}

namespace {

Json moments_json(const std::optional<Moments>& m) {
  if (!m) return nullptr;
  return Json{{"mean", m->count ? finite_or_null(m->mean) : Json(nullptr)},
              {"stddev", m->count ? finite_or_null(m->stddev) : Json(nullptr)},
              {"count", m->count}};
}

Json fit_json(const std::optional<LinearFit>& f) {
  if (!f) return nullptr;
  return Json{{"slope", f->slope}, {"intercept", f->intercept}, {"r_squared", f->r_squared}};
}

}  // namespace

void write_sweep_json(std::ostream& out, const SweepResult& result, const std::string& figure) {
  const SweepSpec& s = result.spec;
  Json j;
  header(j, "sweep");
  if (!figure.empty()) j["figure"] = figure;
  Json spec;
  spec["n"] = s.n;
  spec["k"] = s.k;
  spec["m"] = s.m;
  spec["sigma_over_norm_sq"] = s.sigma_over_norm_sq;
  spec["beta"] = s.beta;
  spec["beta_relative_to_norm"] = s.beta_relative_to_norm;
  spec["eta"] = s.eta ? Json(*s.eta) : Json("auto");
  spec["t_max"] = s.t_max;
  spec["trials"] = s.trials;
  spec["master_seed"] = s.master_seed;
  spec["axis"] = to_string(s.axis);
  spec["values"] = s.values;
  spec["metrics"] = {{"oracle", s.metrics.oracle}, {"holdout", s.metrics.holdout}, {"warmup", s.metrics.warmup}};
  spec["holdout_fraction"] = s.holdout_fraction;
  j["parameters"] = spec;
  j["seed"] = s.master_seed;

  Json points = Json::array();
  for (const auto& p : result.points) {
    points.push_back(Json{{"axis_value", p.axis_value},
                          {"trials", p.trials},
                          {"successes", p.successes},
                          {"failures", p.failures},
                          {"oracle_error", moments_json(p.oracle)},
                          {"holdout_error", moments_json(p.holdout)},
                          {"t_warmup", moments_json(p.warmup)},
                          {"warmup_not_reached", p.warmup_not_reached},
                          {"used_in_fit", p.used_in_fit}});
  }
  j["points"] = points;
  j["fits"] = {{"oracle", fit_json(result.fits.oracle)},
               {"holdout", fit_json(result.fits.holdout)},
               {"warmup", fit_json(result.fits.warmup)},
               {"warmup_spearman", opt(result.fits.warmup_spearman)}};
  // Headline fit: the error fit when errors were measured, the T1 fit otherwise.
  const std::optional<LinearFit>& main =
      result.fits.oracle ? result.fits.oracle : (result.fits.holdout ? result.fits.holdout : result.fits.warmup);
  j["slope"] = main ? Json(main->slope) : Json(nullptr);
  j["intercept"] = main ? Json(main->intercept) : Json(nullptr);
  j["r_squared"] = main ? Json(main->r_squared) : Json(nullptr);
  j["warnings"] = result.warnings;
  dump(out, j);
}

void write_curves_csv(std::ostream& out, const CurvesResult& result) {
  out << "beta,sigma_over_norm_sq,t,risk,rel_dist,dist_phi,off_support_l1,coherence\n";
  for (const auto& c : result.curves) {
    const std::string prefix = format_double(c.beta) + ',' + format_double(c.sigma_over_norm_sq) + ',';
    for (const auto& r : c.trajectory.records) {
      std::optional<double> rel;
      if (r.dist && c.signal_norm > 0.0) rel = *r.dist / c.signal_norm;
      out << prefix << r.t << ',' << format_double(r.risk) << ',' << format_optional(rel) << ','
          << format_optional(r.dist_phi) << ',' << format_optional(r.off_support_l1) << ','
          << format_optional(r.coherence) << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::io, "failed to write curves CSV");
}

void write_curves_json(std::ostream& out, const CurvesResult& result) {
  const CurvesSpec& s = result.spec;
  Json j;
  header(j, "curves");
  j["figure"] = "3";
  j["parameters"] = {{"n", s.n},           {"m", s.m},
                     {"k", s.k},           {"betas", s.betas},
                     {"noise_levels", s.noise_levels}, {"t_max", s.t_max},
                     {"record_every", s.record_every}, {"eta", "auto"}};
  j["seed"] = s.seed;
  Json curves = Json::array();
  for (const auto& c : result.curves) {
    const auto& last = c.trajectory.records;
    Json cj{{"beta", c.beta},
            {"sigma_over_norm_sq", c.sigma_over_norm_sq},
            {"status", to_string(c.trajectory.status)},
            {"message", c.message},
            {"signal_norm", c.signal_norm},
            {"t_warmup", opt(c.t_warmup)},
            {"t_stop_oracle", c.oracle ? Json(c.oracle->t_star) : Json(nullptr)},
            {"min_rel_error", c.oracle ? Json(c.oracle->min_rel_error) : Json(nullptr)}};
    if (!last.empty() && last.back().dist && c.signal_norm > 0.0) {
      cj["final_rel_error"] = finite_or_null(*last.back().dist / c.signal_norm);
    } else {
      cj["final_rel_error"] = nullptr;
    }
    curves.push_back(cj);
  }
  j["curves"] = curves;
  dump(out, j);
}

void write_error_json(std::ostream& out, const std::string& code, const std::string& message) {
  Json j;
  header(j, "error");
  j["error"] = {{"code", code}, {"message", message}};
  dump(out, j);
}

}  // namespace spr
