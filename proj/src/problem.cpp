#include "cls/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace cls {

Scheme parse_scheme(std::string_view name) {
  if (name == "fdm") return Scheme::fdm;
  if (name == "cl") return Scheme::cl;
  if (name == "cls") return Scheme::cls;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (expected fdm, cl or cls)");
}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::fdm: return "fdm";
    case Scheme::cl: return "cl";
    case Scheme::cls: return "cls";
  }
  return "?";
}

InitialCondition parse_initial_condition(std::string_view name) {
  if (name == "cosine") return InitialCondition::cosine;
  if (name == "constant") return InitialCondition::constant;
  throw std::invalid_argument("unknown initial condition '" + std::string(name) +
                              "' (expected cosine or constant)");
}

std::string_view to_string(InitialCondition initial) {
  return initial == InitialCondition::cosine ? "cosine" : "constant";
}

namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw std::invalid_argument(std::string(field) + ": " + what);
}

}  // namespace

void ProblemConfig::validate() const {
  require(std::isfinite(params.diffusion) && params.diffusion >= 0.0, "D", "must be finite and >= 0");
  require(std::isfinite(params.linear_rate), "Q", "must be finite");
  require(std::isfinite(params.quadratic_rate), "R", "must be finite");
  require(std::isfinite(x_length) && x_length > 0.0, "x_length", "must be positive");
  require(n_x >= 1, "n_x", "must be at least 1");
  require(std::isfinite(p_left) && p_left < 0.0, "p_left", "must be negative");
  require(std::isfinite(p_right) && p_right > 0.0, "p_right", "must be positive");
  require(n_p >= 2, "n_p", "must be at least 2");
  require(std::isfinite(t_end) && t_end >= 0.0, "t_end", "must be finite and >= 0");
  require(n_t >= 1, "n_t", "must be at least 1");
  require(order >= 1, "K", "must be at least 1");
  require(std::isfinite(initial_value), "initial_value", "must be finite");
  require(check_every >= 1, "check_every", "must be at least 1");
  for (double t : sample_times)
    require(std::isfinite(t) && t >= 0.0, "sample_times", "entries must be finite and >= 0");
  if (recovery.mode == RecoverySpec::Mode::window) {
    require(recovery.p_min > 0.0, "recovery_p_min", "must be positive");
    require(recovery.p_max >= recovery.p_min, "recovery_p_max", "must be >= recovery_p_min");
  }
  if (recovery.index) require(*recovery.index >= 0 && *recovery.index < n_p, "recovery_index", "outside the p-grid");
}

FieldState ProblemConfig::initial_state() const {
  const SpatialGrid1D g = grid();
  if (initial == InitialCondition::cosine) return sample_initial(g);
  return FieldState{0.0, Eigen::VectorXd::Constant(g.size(), initial_value)};
}

EvolveOptions ProblemConfig::evolve_options() const {
  EvolveOptions options;
  options.sample_times = sample_times;
  options.allow_unstable = allow_unstable;
  options.check_every = check_every;
  options.symmetric_reduction_above = symmetric_reduction_above;
  options.keep_wpt_snapshots = keep_wpt_snapshots;
  options.grid = grid();
  return options;
}

Trajectory run_scheme(const ProblemConfig& config, Scheme scheme) {
  config.validate();
  const SpatialGrid1D grid = config.grid();
  const FieldState phi0 = config.initial_state();
  const EvolveOptions options = config.evolve_options();
  switch (scheme) {
    case Scheme::fdm:
      return evolve_fdm(config.params, grid, phi0, config.time(), options);
    case Scheme::cl: {
      const CarlemanOperator op =
          assemble_carleman(build_polynomial_system(config.params, grid), config.order);
      Trajectory out = evolve_cl(op, lift_state(phi0, config.order), config.time(), options);
      out.tags["order"] = std::to_string(config.order);
      return out;
    }
    case Scheme::cls:
      return evolve_cls(config.params, grid, phi0, config.aux(), config.time(), config.order,
                        config.recovery, options);
  }
  throw std::logic_error("unhandled scheme");
}

}  // namespace cls
