#include "cls/driver.hpp"

#include <json.hpp>

#include <chrono>
#include <ostream>

#include "cls/io.hpp"

namespace cls {

namespace {

using json = nlohmann::ordered_json;

class Manifest {
 public:
  Manifest(std::string_view verb, const RunConfig& config) : config_(config), start_(Clock::now()) {
    doc_["tool"] = "cls-solver";
    doc_["verb"] = verb;
    json keys = json::object();
    for (std::string_view key : config_keys()) keys[std::string(key)] = config_value(config, key);
    doc_["config"] = std::move(keys);
    doc_["config_text"] = serialize_config(config);
    doc_["config_hash"] = config_hash(config);
    doc_["derived"] = derived(config.problem);
    doc_["outputs"] = json::object();
  }

  json& operator[](const char* key) { return doc_[key]; }

  void write_output(const std::string& name, const std::string& content) {
    write_file_atomic(config_.output_dir / name, content);
    doc_["outputs"][name] = sha256_hex(content);
  }

  int finish(int code, std::string_view status, std::ostream& log) {
    doc_["status"] = status;
    doc_["exit_code"] = code;
    doc_["wall_clock_seconds"] = std::chrono::duration<double>(Clock::now() - start_).count();
    write_file_atomic(config_.output_dir / "manifest.json", doc_.dump(2) + "\n");
    log << "status: " << status << " (exit " << code << "), artifacts in " << config_.output_dir.string()
        << "\n";
    return code;
  }

 private:
  using Clock = std::chrono::steady_clock;

  static json derived(const ProblemConfig& p) {
    json d;
    d["dx"] = p.grid().dx();
    d["dp"] = p.aux().dp();
    d["dt"] = p.time().dt();
    try {
      const CarlemanIndexMap map(p.n_x, p.order);
      d["carleman_dim"] = map.total_dim();
      d["wpt_dim"] = map.total_dim() * p.n_p;
    } catch (const std::exception&) {
      d["carleman_dim"] = nullptr;
    }
    return d;
  }

  const RunConfig& config_;
  Clock::time_point start_;
  json doc_;
};

json to_json(const StabilityReport& r) {
  return json{{"diffusion_number", r.diffusion_number},
              {"advection_number", r.advection_number},
              {"spectral_radius", r.spectral_radius},
              {"growth_allowance", r.growth_allowance},
              {"diffusion_ok", r.diffusion_ok},
              {"advection_ok", r.advection_ok},
              {"spectral_ok", r.spectral_ok},
              {"ok", r.ok()}};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int numerical_failure(Manifest& manifest, const std::exception& e, std::string_view status,
                      std::ostream& log) {
  log << "error: " << e.what() << "\n";
  manifest["error"] = e.what();
  return manifest.finish(kExitNumerical, status, log);
}

}  // namespace

int run_solve(const RunConfig& config, std::ostream& log) {
  config.validate();
  Manifest manifest("solve", config);
  ProblemConfig problem = config.problem;
  problem.keep_wpt_snapshots = config.write_wpt && config.scheme == Scheme::cls;

  if (config.scheme != Scheme::cls) {
    StabilityReport report;
    report.diffusion_number = diffusion_number(problem.params, problem.grid(), problem.time());
    report.diffusion_ok = report.diffusion_number < 1.0;
    manifest["stability"] = to_json(report);
    if (!report.ok() && !problem.allow_unstable) {
      log << "error: stability check failed: " << report.summary() << "\n";
      return manifest.finish(kExitNumerical, "unstable", log);
    }
  }

  Trajectory trajectory;
  try {
    log << "running " << to_string(config.scheme) << "\n";
    trajectory = run_scheme(problem, config.scheme);
  } catch (const StabilityError& e) {
    manifest["stability"] = to_json(e.report());
    return numerical_failure(manifest, e, "unstable", log);
  } catch (const DivergenceError& e) {
    return numerical_failure(manifest, e, "diverged", log);
  }

  if (config.scheme == Scheme::cls) {
    StabilityReport report;
    report.diffusion_number = trajectory.diagnostics["diffusion_number"];
    report.advection_number = trajectory.diagnostics["advection_number"];
    report.spectral_radius = trajectory.diagnostics["spectral_radius"];
    report.growth_allowance = trajectory.diagnostics["growth_allowance"];
    report.diffusion_ok = report.diffusion_number < 1.0;
    report.advection_ok = report.advection_number < 1.0;
    report.spectral_ok =
        report.spectral_radius <= 1.0 + problem.time().dt() * report.growth_allowance + 1e-12;
    manifest["stability"] = to_json(report);
    manifest["recovery"] = json{{"mode", config_value(config, "recovery")},
                                {"p", trajectory.diagnostics["recovery_p"]},
                                {"wrap_time", trajectory.diagnostics["wrap_time"]},
                                {"imaginary_norm", trajectory.diagnostics["imaginary_norm"]}};
  }
  json diagnostics = json::object();
  for (const auto& [k, v] : trajectory.diagnostics) diagnostics[k] = finite_or_null(v);
  for (const auto& [k, v] : trajectory.tags) diagnostics[k] = v;
  manifest["diagnostics"] = diagnostics;
  manifest["warnings"] = trajectory.warnings;
  for (const std::string& w : trajectory.warnings) log << "warning: " << w << "\n";

  manifest.write_output("trajectory.csv", trajectory_csv(trajectory));
  if (problem.keep_wpt_snapshots) manifest.write_output("wpt_field.csv", wpt_field_csv(trajectory));
  if (config.dump_operators && config.scheme != Scheme::fdm) {
    const CarlemanOperator op =
        assemble_carleman(build_polynomial_system(problem.params, problem.grid()), problem.order);
    manifest.write_output("carleman.mtx", matrix_market(op.matrix()));
    if (config.scheme == Scheme::cls) {
      const HermitianSplit<double> split = hermitian_split(op.matrix());
      manifest.write_output("h1.mtx", matrix_market(split.h1));
      manifest.write_output("h2.mtx", matrix_market(split.h2()));
      manifest.write_output("grad_p.mtx", matrix_market(build_upwind_gradient(problem.aux())));
    }
  }

  if (config.compare) {
    Trajectory reference;
    try {
      log << "running " << to_string(*config.compare) << " for comparison\n";
      reference = run_scheme(problem, *config.compare);
    } catch (const StabilityError& e) {
      return numerical_failure(manifest, e, "unstable", log);
    } catch (const DivergenceError& e) {
      return numerical_failure(manifest, e, "diverged", log);
    }
    const ErrorField field = error_fields(trajectory, reference, config.rel_floor);
    manifest.write_output("reference_trajectory.csv", trajectory_csv(reference));
    manifest.write_output("error_field.csv", error_field_csv(field));
    json errors = json::array();
    for (double t : field.times)
      errors.push_back(json{{"t", t},
                            {"l2_rel", scalar_error(field, Norm::l2, t)},
                            {"max_rel", scalar_error(field, Norm::max, t)},
                            {"l2_abs", scalar_error(field, Norm::l2, t, ErrorKind::absolute)}});
    manifest["comparison"] = json{{"reference", to_string(*config.compare)},
                                  {"rel_floor", config.rel_floor},
                                  {"errors", errors}};
  }
  return manifest.finish(kExitOk, "ok", log);
}

int run_sweep(const RunConfig& config, std::ostream& log) {
  config.validate();
  if (config.sweep_values.size() < 3) throw ConfigError("sweep_values: at least 3 values are required");
  Manifest manifest("sweep", config);
  const SweepSpec spec = config.sweep_spec();
  ConvergenceStudy study;
  try {
    study = run_sweep(config.problem, spec, default_probe(config.problem, spec));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const std::string hash = config_hash(config);
  manifest.write_output("convergence.csv", study_csv(study, hash));
  manifest.write_output("convergence_times.csv", study_times_csv(study, hash));

  json points = json::array();
  for (std::size_t i = 0; i < study.values.size(); ++i) {
    json errors = json::array();
    for (Index t = 0; t < study.errors.cols(); ++t)
      errors.push_back(finite_or_null(study.errors(static_cast<Index>(i), t)));
    points.push_back(json{{"value", study.values[i]},
                          {"abscissa", study.abscissa[i]},
                          {"errors", errors},
                          {"failure", study.failures[i]}});
    if (!study.failures[i].empty())
      log << "point " << format_number(study.values[i]) << " failed: " << study.failures[i] << "\n";
  }
  json fits = json::array();
  for (std::size_t f = 0; f < study.fits.size(); ++f)
    fits.push_back(json{{"t", study.fit_times[f]},
                        {"slope", finite_or_null(study.fits[f].slope)},
                        {"residual", finite_or_null(study.fits[f].residual)}});
  const auto [lo, hi] = config.slope_band();
  manifest["study"] = json{{"param", to_string(study.param)},
                           {"times", study.times},
                           {"points", points},
                           {"fits", fits},
                           {"error_time", study.error_time},
                           {"fitted_slope", finite_or_null(study.fitted_slope)},
                           {"fit_residual", finite_or_null(study.fit_residual)},
                           {"slope_band", json::array({lo, hi})}};

  log << "fitted slope at t = " << format_number(study.error_time) << ": "
      << format_number(study.fitted_slope) << " (band [" << lo << ", " << hi << "])\n";
  if (!std::isfinite(study.fitted_slope))
    return manifest.finish(study.all_succeeded() ? kExitBand : kExitNumerical, "no_fit", log);
  if (study.fitted_slope < lo || study.fitted_slope > hi)
    return manifest.finish(kExitBand, "slope_out_of_band", log);
  return manifest.finish(kExitOk, "ok", log);
}

int run_check(const RunConfig& config, std::ostream& log) {
  config.validate();
  Manifest manifest("check", config);
  const ProblemConfig& p = config.problem;
  const AuxGrid aux = p.aux();
  if (aux.size() < 3) throw ConfigError("n_p: the central-gradient check needs n_p >= 3");
  const SpatialGrid1D grid = p.grid();
  const CarlemanOperator op = assemble_carleman(build_polynomial_system(p.params, grid), p.order);
  const HermitianSplit<double> split = hermitian_split(op.matrix());
  const double residual = verify_skew_hermitian(split, build_central_gradient(aux));
  const StabilityReport report = stability_check(p.params, grid, p.time(), aux, split);
  manifest["skew_hermitian_residual"] = residual;
  manifest["stability"] = to_json(report);
  log << "skew-Hermitian residual (central gradient): " << format_number(residual) << "\n";
  log << "stability: " << report.summary() << "\n";
  const bool ok = residual <= 1e-12 && report.ok();
  return manifest.finish(ok ? kExitOk : kExitNumerical, ok ? "ok" : "check_failed", log);
}

RunConfig config_from_manifest(const std::filesystem::path& manifest) {
  json doc;
  try {
    doc = json::parse(read_text_file(manifest));
  } catch (const std::exception& e) {
    throw ConfigError("cannot read manifest " + manifest.string() + ": " + e.what());
  }
  if (!doc.contains("config_text") || !doc["config_text"].is_string())
    throw ConfigError("manifest " + manifest.string() + " has no config_text");
  return parse_config(doc["config_text"].get<std::string>());
}

}  // namespace cls
