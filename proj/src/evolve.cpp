#include "cls/evolve.hpp"

#include <sstream>

#include "cls/symmetric_reduction.hpp"

namespace cls {

TimeGrid::TimeGrid(double t_end, Index n_t) : t_end_(t_end), n_t_(n_t) {
  if (!std::isfinite(t_end) || t_end < 0.0) throw std::invalid_argument("t_end must be finite and >= 0");
  if (n_t < 1) throw std::invalid_argument("n_t must be at least 1");
  dt_ = t_end / static_cast<double>(n_t);
}

std::vector<Index> TimeGrid::sample_steps(std::span<const double> times) const {
  std::vector<Index> steps{0};
  for (double t : times) {
    if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("sample times must be finite and >= 0");
    if (t > t_end_ * (1.0 + 1e-12)) continue;
    if (dt_ == 0.0) continue;
    const double exact = t / dt_;
    const Index step = static_cast<Index>(std::llround(exact));
    if (std::abs(exact - static_cast<double>(step)) > 1e-6)
      throw std::invalid_argument("sample time " + std::to_string(t) + " is not a multiple of dt");
    steps.push_back(std::min(step, n_t_));
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  return steps;
}

std::size_t Trajectory::sample_index(double time) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - time) <= 1e-9 * std::max(1.0, std::abs(time))) return i;
  throw std::out_of_range("trajectory has no sample at t = " + std::to_string(time));
}

std::string StabilityReport::summary() const {
  std::ostringstream out;
  out << "diffusion number " << diffusion_number << (diffusion_ok ? "" : " (>= 1)")
      << ", advection number " << advection_number << (advection_ok ? "" : " (>= 1)")
      << ", spectral radius " << spectral_radius << (spectral_ok ? "" : " (growing)");
  return out.str();
}

double diffusion_number(const ReactionDiffusionParams& params, const SpatialGrid1D& grid,
                        const TimeGrid& time) {
  return 2.0 * params.diffusion * time.dt() / (grid.dx() * grid.dx());
}

StabilityReport stability_check(const ReactionDiffusionParams& params, const SpatialGrid1D& grid,
                                const TimeGrid& time, const AuxGrid& aux,
                                const HermitianSplit<double>& split,
                                const StabilityOptions& options) {
  StabilityReport report = screen_warped_step(split, time, aux, options);
  report.diffusion_number = diffusion_number(params, grid, time);
  report.diffusion_ok = report.diffusion_number < 1.0;
  return report;
}

namespace {

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

void check_finite(const Eigen::VectorXd& v, Index step, const char* scheme) {
  if (!v.allFinite() || max_abs(v) > kDivergenceThreshold) throw DivergenceError(step, max_abs(v), scheme);
}

void label(Trajectory& out, const std::optional<SpatialGrid1D>& grid, Index n) {
  if (grid && grid->size() == n) {
    out.nodes = grid->nodes();
    out.dx = grid->dx();
    out.left_ghost = grid->left_ghost();
    out.right_ghost = grid->right_ghost();
  } else {
    out.nodes = Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
    out.dx = 1.0;
    out.left_ghost = -1.0;
    out.right_ghost = static_cast<double>(n);
  }
}

void record(Trajectory& out, double t, Eigen::VectorXd values) {
  out.times.push_back(t);
  out.states.push_back(std::move(values));
}

bool due(Index step, Index every) { return every > 0 && step % every == 0; }

Trajectory run_cls(const CarlemanOperator& op, const HermitianSplit<double>& split,
                   const CarlemanState& phi0, const AuxGrid& aux, const TimeGrid& time,
                   const RecoverySpec& recovery, const EvolveOptions& options,
                   const StabilityReport& report) {
  if (phi0.index_map != op.index_map())
    throw std::invalid_argument("initial lifted state does not match the Carleman operator");
  const std::vector<Index> recovery_nodes = recovery.nodes(aux);
  if (!report.ok() && !options.allow_unstable) throw StabilityError(report);

  const Index n = op.index_map().base_dim();
  Trajectory out;
  out.scheme = "cls";
  label(out, options.grid, n);
  out.p_nodes = aux.nodes();
  out.diagnostics["diffusion_number"] = report.diffusion_number;
  out.diagnostics["advection_number"] = report.advection_number;
  out.diagnostics["spectral_radius"] = report.spectral_radius;
  out.diagnostics["growth_allowance"] = report.growth_allowance;
  out.diagnostics["recovery_p"] = aux.nodes()(recovery_nodes.front());
  // Unit-speed transport toward smaller p brings the periodic seam to the recovery node
  // after p_right - p_j.
  out.diagnostics["wrap_time"] = aux.p_right() - aux.nodes()(recovery_nodes.back());
  out.tags["recovery"] = recovery.mode == RecoverySpec::Mode::point ? "point" : "window";
  if (!report.ok()) out.warnings.push_back("stability override: " + report.summary());

  const std::vector<Index> samples = time.sample_steps(options.sample_times);
  ClsPropagator<double> propagator(split, time.dt(), aux.dp());
  propagator.load(initialize_wpt_state(phi0, aux));
  double imaginary = 0.0;
  Index step = 0;
  for (Index target : samples) {
    for (; step < target; ++step) {
      propagator.step();
      if (due(step + 1, options.check_every) && !propagator.healthy())
        throw DivergenceError(step + 1, propagator.magnitude(), "CLS");
    }
    if (!propagator.healthy()) throw DivergenceError(step, propagator.magnitude(), "CLS");
    const double t = time.time_at(step);
    WptState<double> psi = propagator.state();
    psi.time = t;
    const Recovered rec = recover_state(psi, aux, recovery);
    imaginary = std::max(imaginary, rec.imaginary_norm);
    record(out, t, rec.values.head(n));
    if (options.keep_lifted) out.lifted.push_back(rec.values);
    if (options.keep_wpt_snapshots) out.wpt_snapshots.push_back(propagator.leading_blocks(n));
  }
  out.diagnostics["imaginary_norm"] = imaginary;
  return out;
}

}  // namespace

Trajectory evolve_fdm(const ReactionDiffusionParams& params, const SpatialGrid1D& grid,
                      const FieldState& phi0, const TimeGrid& time, const EvolveOptions& options) {
  params.validate();
  if (phi0.values.size() != grid.size()) throw std::invalid_argument("initial state does not match the grid");
  Trajectory out;
  out.scheme = "fdm";
  label(out, grid, grid.size());
  out.diagnostics["diffusion_number"] = diffusion_number(params, grid, time);
  if (params.diffusion > 0.0 && time.dt() > grid.dx() * grid.dx() / (2.0 * params.diffusion)) {
    std::ostringstream msg;
    msg << "dt = " << time.dt() << " exceeds the explicit diffusion limit dx^2/(2D) = "
        << grid.dx() * grid.dx() / (2.0 * params.diffusion);
    out.warnings.push_back(msg.str());
  }

  FieldState state = phi0;
  Index step = 0;
  for (Index target : time.sample_steps(options.sample_times)) {
    for (; step < target; ++step) {
      state.values += time.dt() * eval_nonlinear_rhs(state, params, grid);
      if (due(step + 1, options.check_every)) check_finite(state.values, step + 1, "FDM");
    }
    check_finite(state.values, step, "FDM");
    record(out, time.time_at(step), state.values);
  }
  return out;
}

Trajectory evolve_cl(const CarlemanOperator& op, const CarlemanState& phi0, const TimeGrid& time,
                     const EvolveOptions& options) {
  if (phi0.index_map != op.index_map())
    throw std::invalid_argument("initial lifted state does not match the Carleman operator");
  const CarlemanIndexMap& map = op.index_map();
  const Index n = map.base_dim();
  Trajectory out;
  out.scheme = "cl";
  label(out, options.grid, n);

  // The first n reduced coordinates coincide with the first-order block.
  std::optional<SymmetricReduction> reduction;
  RealSparse reduced_op;
  const RealSparse* a = &op.matrix();
  Eigen::VectorXd state = phi0.values;
  if (map.total_dim() > options.symmetric_reduction_above) {
    reduction.emplace(map);
    reduced_op = reduction->reduce(op.matrix());
    a = &reduced_op;
    state = reduction->compress(phi0.values);
    out.tags["carleman_path"] = "symmetric";
    out.diagnostics["reduced_dim"] = static_cast<double>(reduction->reduced_dim());
  } else {
    out.tags["carleman_path"] = "full";
  }

  Eigen::VectorXd rate(state.size());
  Index step = 0;
  for (Index target : time.sample_steps(options.sample_times)) {
    for (; step < target; ++step) {
      rate.noalias() = *a * state;
      state += time.dt() * rate;
      if (due(step + 1, options.check_every)) check_finite(state, step + 1, "CL");
    }
    check_finite(state, step, "CL");
    record(out, time.time_at(step), state.head(n));
    if (options.keep_lifted) out.lifted.push_back(reduction ? reduction->expand(state) : state);
  }
  return out;
}

Trajectory evolve_cls(const CarlemanOperator& op, const CarlemanState& phi0, const AuxGrid& aux,
                      const TimeGrid& time, const RecoverySpec& recovery,
                      const EvolveOptions& options) {
  const HermitianSplit<double> split = hermitian_split(op.matrix());
  const StabilityReport report = screen_warped_step(split, time, aux);
  return run_cls(op, split, phi0, aux, time, recovery, options, report);
}

Trajectory evolve_cls(const ReactionDiffusionParams& params, const SpatialGrid1D& grid,
                      const FieldState& phi0, const AuxGrid& aux, const TimeGrid& time, int order,
                      const RecoverySpec& recovery, const EvolveOptions& options) {
  params.validate();
  if (phi0.values.size() != grid.size()) throw std::invalid_argument("initial state does not match the grid");
  const PolynomialSystem system = build_polynomial_system(params, grid);
  const CarlemanOperator op = assemble_carleman(system, order);
  const HermitianSplit<double> split = hermitian_split(op.matrix());
  const StabilityReport report = stability_check(params, grid, time, aux, split);
  EvolveOptions labelled = options;
  labelled.grid = grid;
  Trajectory out = run_cls(op, split, lift_state(phi0, order), aux, time, recovery, labelled, report);
  out.tags["order"] = std::to_string(order);
  return out;
}

}  // namespace cls
