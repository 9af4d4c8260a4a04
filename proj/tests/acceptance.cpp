// Acceptance suite: one verdict line per criterion, preceded by indented measurements.
// CSV artifacts land in --output-dir (default acceptance_out) for plotting.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cls/analysis.hpp"
#include "cls/io.hpp"
#include "cls/run_config.hpp"

using namespace cls;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string summary;
};

fs::path g_out = "acceptance_out";

std::string num(double v, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

void note(const std::string& line) { std::cout << "  " << line << std::endl; }

void save(const std::string& name, const std::string& content) { write_file_atomic(g_out / name, content); }

ProblemConfig desk() {
  ProblemConfig c;
  c.n_x = 12;
  c.order = 3;
  c.p_left = -10.0;
  c.p_right = 10.0;
  c.n_p = 128;
  c.t_end = 0.4;
  c.n_t = 400000;
  return c;
}

/// One node with D = 0 and a constant initial value: the scalar ODE dphi/dt = Q phi + R phi^2.
ProblemConfig scalar(double q, double r, double phi0) {
  ProblemConfig c;
  c.params.diffusion = 0.0;
  c.params.linear_rate = q;
  c.params.quadratic_rate = r;
  c.n_x = 1;
  c.initial = InitialCondition::constant;
  c.initial_value = phi0;
  return c;
}

double l2_rel(const Trajectory& candidate, const Trajectory& reference, double t) {
  return scalar_error(error_fields(candidate, reference), Norm::l2, t);
}

std::string hash_of(const ProblemConfig& problem, SweepParam param, const std::vector<double>& values) {
  RunConfig rc;
  rc.problem = problem;
  rc.sweep_param = param;
  rc.sweep_values = values;
  return config_hash(rc);
}

bool slopes_in_band(const ConvergenceStudy& study, double lo, double hi) {
  bool ok = study.all_succeeded() && !study.fits.empty();
  for (std::size_t f = 0; f < study.fits.size(); ++f) {
    const double s = study.fits[f].slope;
    const bool in = std::isfinite(s) && s >= lo && s <= hi;
    note("t = " + num(study.fit_times[f]) + ": slope " + num(s) + (in ? "" : "  (outside band)"));
    ok = ok && in;
  }
  for (std::size_t i = 0; i < study.failures.size(); ++i)
    if (!study.failures[i].empty()) note("point " + num(study.values[i]) + " failed: " + study.failures[i]);
  return ok;
}

void print_errors(const ConvergenceStudy& study, const char* label) {
  const Eigen::VectorXd e = study.errors_at(study.error_time);
  for (std::size_t i = 0; i < study.values.size(); ++i)
    note(std::string(label) + " = " + num(study.values[i]) + " (abscissa " + num(study.abscissa[i]) +
         "): error at t = " + num(study.error_time) + " is " + num(e(static_cast<Index>(i))));
}

RealSparse random_sparse(Index rows, Index cols, double density, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0), v(-1.0, 1.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (Index i = 0; i < m.size(); ++i)
    if (u(rng) < density) m.data()[i] = v(rng);
  return m.sparseView();
}

// ---------------------------------------------------------------------------

Verdict truncation_order() {
  const ProblemConfig base = desk();
  SweepSpec spec;
  spec.param = SweepParam::K;
  spec.values = {2, 3, 4, 5};
  const ConvergenceStudy study = sweep_truncation(base, spec);
  print_errors(study, "K");
  const bool ok = slopes_in_band(study, 0.7, 1.3);
  const std::string hash = hash_of(base, spec.param, spec.values);
  save("criterion_1/convergence.csv", study_csv(study, hash));
  save("criterion_1/convergence_times.csv", study_times_csv(study, hash));
  return {ok, "CL vs FDM over K in {2,3,4,5}, slope vs 1/K at every t in [0.7, 1.3]; slope at t = 0.4 is " +
                  num(study.fitted_slope)};
}

Verdict spatial_order() {
  ProblemConfig base = desk();
  base.order = 2;
  SweepSpec spec;
  spec.param = SweepParam::dx;
  spec.values = {6, 12, 24, 48};
  const ConvergenceStudy study = sweep_dx(base, spec);
  print_errors(study, "n_x");
  const bool ok = slopes_in_band(study, 1.7, 2.3);
  const std::string hash = hash_of(base, spec.param, spec.values);
  save("criterion_2/convergence.csv", study_csv(study, hash));
  save("criterion_2/convergence_times.csv", study_times_csv(study, hash));

  // Diagnostic: the same sweep with CL in place of CLS isolates the spatial error.
  const SpatialGrid1D fine(base.x_length, 8 * (48 + 1) - 1, base.node_layout);
  ProblemConfig ref_config = base;
  ref_config.n_x = fine.size();
  const Trajectory reference = run_scheme(ref_config, Scheme::fdm);
  const PointProbe cl_probe = [&](const ProblemConfig& point) {
    const ErrorField field = error_fields(run_scheme(point, Scheme::cl), reference);
    std::vector<double> out;
    for (double t : field.times) out.push_back(scalar_error(field, Norm::l2, t));
    return out;
  };
  const ConvergenceStudy cl_study = run_sweep(base, spec, cl_probe);
  note("diagnostic, CL (K = 2) vs the same fine FDM reference: slope at t = 0.4 is " +
       num(cl_study.fitted_slope) + ", errors " + [&] {
         std::string s;
         const Eigen::VectorXd e = cl_study.errors_at(0.4);
         for (Index i = 0; i < e.size(); ++i) s += (i ? ", " : "") + num(e(i));
         return s;
       }());
  return {ok, "CLS vs fine FDM over n_x in {6,12,24,48}, slope vs dx in [1.7, 2.3]; slope at t = 0.4 is " +
                  num(study.fitted_slope)};
}

Verdict auxiliary_order() {
  ProblemConfig base = desk();
  base.n_x = 8;
  base.order = 2;
  SweepSpec spec;
  spec.param = SweepParam::dp;
  spec.values = {32, 64, 128, 256};
  const ConvergenceStudy study = sweep_dp(base, spec);
  print_errors(study, "n_p");
  const bool ok = slopes_in_band(study, 0.7, 1.3);
  const std::string hash = hash_of(base, spec.param, spec.values);
  save("criterion_3/convergence.csv", study_csv(study, hash));
  save("criterion_3/convergence_times.csv", study_times_csv(study, hash));
  return {ok, "CLS vs CL over n_p in {32,64,128,256}, slope vs dp in [0.7, 1.3]; slope at t = 0.4 is " +
                  num(study.fitted_slope)};
}

Verdict desk_agreement() {
  ProblemConfig base = desk();
  base.keep_wpt_snapshots = true;
  const Trajectory fdm = run_scheme(base, Scheme::fdm);
  const Trajectory cl = run_scheme(base, Scheme::cl);
  const Trajectory cls = run_scheme(base, Scheme::cls);
  save("criterion_4/fdm_trajectory.csv", trajectory_csv(fdm));
  save("criterion_4/cl_trajectory.csv", trajectory_csv(cl));
  save("criterion_4/cls_trajectory.csv", trajectory_csv(cls));
  save("criterion_4/cls_wpt_field.csv", wpt_field_csv(cls));
  save("criterion_4/error_field_cls_vs_cl.csv", error_field_csv(error_fields(cls, cl)));
  save("criterion_4/error_field_cl_vs_fdm.csv", error_field_csv(error_fields(cl, fdm)));

  for (double t : cls.times) {
    if (t == 0.0) continue;
    note("t = " + num(t) + ": CLS-CL " + num(l2_rel(cls, cl, t)) + ", CLS-FDM " + num(l2_rel(cls, fdm, t)) +
         ", CL-FDM " + num(l2_rel(cl, fdm, t)));
  }
  const double cls_cl = l2_rel(cls, cl, 0.4);
  const double cls_fdm = l2_rel(cls, fdm, 0.4);
  const double cl_fdm = l2_rel(cl, fdm, 0.4);

  // Diagnostic: one dp refinement shows whether the CLS-CL gap is set by dp.
  ProblemConfig refined = base;
  refined.n_p = 2 * base.n_p;
  refined.keep_wpt_snapshots = false;
  const double refined_gap = l2_rel(run_scheme(refined, Scheme::cls), cl, 0.4);
  note("dp refinement: CLS-CL at t = 0.4 is " + num(cls_cl) + " (dp = " + num(base.aux().dp()) + "), " +
       num(refined_gap) + " (dp = " + num(refined.aux().dp()) + "), ratio " + num(cls_cl / refined_gap));

  const bool ok = cls_cl <= 0.05 && cls_fdm <= 0.05 && cl_fdm <= 0.05;
  return {ok, "desk scale, pairwise l2 relative error at t = 0.4 <= 5%: CLS-CL " + num(cls_cl) + ", CLS-FDM " +
                  num(cls_fdm) + ", CL-FDM " + num(cl_fdm)};
}

template <typename Scalar>
std::pair<double, double> skew_and_norm_drift(Index n, Index n_p, std::mt19937& rng) {
  SparseMatrix<Scalar> a = random_sparse(n, n, 0.5, rng).template cast<Scalar>();
  if constexpr (Eigen::NumTraits<Scalar>::IsComplex)
    a += Scalar(0.0, 1.0) * random_sparse(n, n, 0.5, rng).template cast<Scalar>();
  const HermitianSplit<Scalar> split = hermitian_split(a);
  const RealSparse central = build_central_gradient(build_aux_grid(-4.0, 4.0, n_p));
  const double residual = verify_skew_hermitian(split, central);
  const WptOperator<Scalar> op(split, central);
  Vector<Scalar> psi = random_sparse(op.dim(), 1, 1.0, rng).toDense().template cast<Scalar>();
  psi /= psi.norm();
  const double drift = std::abs(exact_expm_evolve(op.materialize(), psi, 1.0).norm() - 1.0);
  return {residual, drift};
}

Verdict skew_hermitian() {
  std::mt19937 rng(20240501);
  double worst_residual = 0.0;
  double worst_drift = 0.0;
  int cases = 0;
  for (Index n : {1, 2, 5, 16, 33, 64}) {
    for (Index n_p : {3, 4, 8}) {
      for (int repeat = 0; repeat < 3; ++repeat) {
        const auto [r1, d1] = skew_and_norm_drift<double>(n, n_p, rng);
        const auto [r2, d2] = skew_and_norm_drift<Complex>(n, n_p, rng);
        worst_residual = std::max({worst_residual, r1, r2});
        worst_drift = std::max({worst_drift, d1, d2});
        cases += 2;
      }
    }
  }
  // The reaction-diffusion Carleman operator itself.
  const SpatialGrid1D grid(1.0, 4);
  const HermitianSplit<double> split =
      hermitian_split(assemble_carleman(build_polynomial_system(ReactionDiffusionParams{}, grid), 2).matrix());
  const double rd_residual = verify_skew_hermitian(split, build_central_gradient(build_aux_grid(-4.0, 4.0, 8)));
  worst_residual = std::max(worst_residual, rd_residual);
  note(std::to_string(cases) + " random real and complex splits, block dim up to 64, n_p up to 8");
  note("largest skew residual " + num(worst_residual) + ", largest | ||psi(1)|| - ||psi(0)|| | " + num(worst_drift));
  const bool ok = worst_residual <= 1e-12 && worst_drift <= 1e-10;
  return {ok, "central-gradient generator: skew residual " + num(worst_residual) + " <= 1e-12, norm drift over t = 1 " +
                  num(worst_drift) + " <= 1e-10"};
}

Verdict scalar_oracles() {
  // (a) logistic equation through CL with K = 8.
  ProblemConfig logistic = scalar(1.0, -1.0, 0.5);
  logistic.order = 8;
  logistic.t_end = 0.4;
  logistic.n_t = 40000;
  const Trajectory cl = run_scheme(logistic, Scheme::cl);
  double worst_a = 0.0;
  for (std::size_t i = 0; i < cl.times.size(); ++i) {
    const double t = cl.times[i];
    const double exact = 0.5 * std::exp(t) / (0.5 + 0.5 * std::exp(t));
    const double err = std::abs(cl.states[i](0) - exact);
    note("(a) t = " + num(t) + ": CL " + num(cl.states[i](0), 10) + ", exact " + num(exact, 10) + ", error " + num(err));
    if (t == 0.4) worst_a = err;
  }

  // (b) linear decay through CLS.
  ProblemConfig decay = scalar(-1.0, 0.0, 0.5);
  decay.order = 1;
  decay.p_left = -5.0;
  decay.p_right = 5.0;
  decay.n_p = 200;
  decay.t_end = 0.4;
  decay.n_t = 40000;
  const Trajectory cls = run_scheme(decay, Scheme::cls);
  double worst_b = 0.0;
  for (std::size_t i = 0; i < cls.times.size(); ++i) {
    const double exact = 0.5 * std::exp(-cls.times[i]);
    const double rel = std::abs(cls.states[i](0) - exact) / exact;
    note("(b) t = " + num(cls.times[i]) + ": CLS " + num(cls.states[i](0), 10) + ", exact " + num(exact, 10) +
         ", relative error " + num(rel));
    worst_b = std::max(worst_b, rel);
  }
  note("(b) dp = " + num(decay.aux().dp()) + ", dt = " + num(decay.time().dt()));
  const bool ok = worst_a <= 1e-3 && worst_b <= 0.01;
  return {ok, "(a) CL K = 8 logistic error at t = 0.4 " + num(worst_a) + " <= 1e-3; (b) CLS decay worst relative error " +
                  num(worst_b) + " <= 1%"};
}

Verdict scheme_equivalence() {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> step(1e-4, 1e-2);
  double worst = 0.0;
  int cases = 0;
  for (Index n : {1, 2, 3}) {
    for (int order : {1, 2}) {
      for (Index n_p = 2; n_p <= 8; ++n_p) {
        const PolynomialSystem system(random_sparse(n, n, 0.7, rng), random_sparse(n, n * n, 0.4, rng));
        const HermitianSplit<double> split = hermitian_split(assemble_carleman(system, order).matrix());
        const AuxGrid aux = build_aux_grid(-2.0, 2.0, n_p);
        const StepOperator<double> op = assemble_step(split, step(rng), aux.dp());
        const WptState<double> psi{0.0, random_sparse(split.dim(), n_p, 1.0, rng).toDense()};
        const Eigen::VectorXd via_b = op.materialize(n_p) * psi.flat();
        worst = std::max(worst, (via_b - step_cls(psi, op).flat()).cwiseAbs().maxCoeff());
        ++cases;
      }
    }
  }
  note(std::to_string(cases) + " random systems (n <= 3, K <= 2, n_p <= 8): max |step_cls - B psi| = " + num(worst));

  // evolve_cls against the exact flow of the same warped generator.
  ProblemConfig c;
  c.n_x = 3;
  c.order = 2;
  c.p_left = -5.0;
  c.p_right = 5.0;
  c.n_p = 16;
  c.t_end = 0.1;
  c.sample_times = {0.1};
  const SpatialGrid1D grid = c.grid();
  const AuxGrid aux = c.aux();
  const CarlemanOperator carleman = assemble_carleman(build_polynomial_system(c.params, grid), c.order);
  const HermitianSplit<double> split = hermitian_split(carleman.matrix());
  const WptState<double> psi0 = initialize_wpt_state(lift_state(c.initial_state(), c.order), aux);
  const WptOperator<double> htilde(split, build_upwind_gradient(aux));
  WptState<double> exact{c.t_end, Eigen::MatrixXd(psi0.blocks.rows(), psi0.blocks.cols())};
  exact.flat() = exact_expm_evolve(htilde.materialize(), Eigen::VectorXd(psi0.flat()), c.t_end);
  const Eigen::VectorXd target = recover_state(exact, aux, c.recovery).values.head(c.n_x);

  std::vector<double> dts, errors;
  for (Index n_t : {100, 200, 400, 800, 1600}) {
    c.n_t = n_t;
    const Trajectory cls = run_scheme(c, Scheme::cls);
    const double err = (cls.states.back() - target).norm() / target.norm();
    note("dt = " + num(c.time().dt()) + ": |evolve_cls - exp(Htilde t)| / |exp(Htilde t)| = " + num(err));
    dts.push_back(c.time().dt());
    errors.push_back(err);
  }
  const double order = fit_loglog_slope(dts, errors).slope;
  const bool ok = worst <= 1e-13 && order >= 0.9 && order <= 1.1;
  return {ok, "step_cls = B psi within " + num(worst) + " <= 1e-13; observed order in dt " + num(order) +
                  " (band [0.9, 1.1])"};
}

Verdict advection_pollution() {
  // Q = -1, D = R = 0, K = 1: H1 = -1, so psi moves toward smaller p at unit speed.
  ProblemConfig c = scalar(-1.0, 0.0, 0.5);
  c.order = 1;
  c.p_left = -2.0;
  c.p_right = 2.0;
  c.n_p = 80;
  c.t_end = 3.0;
  c.n_t = 3000;
  c.sample_times = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0};
  const Trajectory cls = run_scheme(c, Scheme::cls);
  const AuxGrid aux = c.aux();
  const double p_star = aux.nodes()(aux.first_positive());
  const double wrap = cls.diagnostics.at("wrap_time");
  note("dp = " + num(aux.dp()) + ", recovery node p = " + num(p_star) + ", seam arrival p_R - p_j = " + num(wrap) +
       " (p_j - p_L = " + num(p_star - c.p_left) + ")");
  std::string csv = "t,recovered,exact,rel_error\n";
  double before = 0.0, after = 0.0;
  for (std::size_t i = 0; i < cls.times.size(); ++i) {
    const double t = cls.times[i];
    const double exact = 0.5 * std::exp(-t);
    const double rel = std::abs(cls.states[i](0) - exact) / exact;
    csv += format_number(t) + ',' + format_number(cls.states[i](0)) + ',' + format_number(exact) + ',' +
           format_number(rel) + '\n';
    note("t = " + num(t) + ": relative error " + num(rel));
    if (t == 1.0) before = rel;
    if (t == 3.0) after = rel;
  }
  save("criterion_8/pollution.csv", csv);
  const bool ok = after >= 2.0 * before && 1.0 < wrap && wrap < 3.0;
  return {ok, "error at t = 3 (after wrap) " + num(after) + " >= 2 x error at t = 1 (before wrap) " + num(before) +
                  ", ratio " + num(after / before)};
}

struct Criterion {
  int id;
  std::function<Verdict()> run;
  double budget_seconds;  // 0: no runtime budget
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-8"};
  std::vector<int> selected;
  std::string out = g_out.string();
  app.add_option("--criterion", selected, "Run only these criteria (repeatable)")->check(CLI::Range(1, 8));
  app.add_option("--output-dir", out, "Directory for CSV artifacts");
  CLI11_PARSE(app, argc, argv);
  g_out = out;

  const std::vector<Criterion> criteria{
      {1, truncation_order, 300.0},   {2, spatial_order, 900.0},   {3, auxiliary_order, 900.0},
      {4, desk_agreement, 0.0},       {5, skew_hermitian, 0.0},    {6, scalar_oracles, 0.0},
      {7, scheme_equivalence, 0.0},   {8, advection_pollution, 0.0},
  };
  bool all = true;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    std::cout << "criterion " << c.id << ":" << std::endl;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = "runtime " + num(seconds, 3) + " s";
    if (c.budget_seconds > 0.0) {
      timing += " (budget " + num(c.budget_seconds, 3) + " s)";
      if (seconds > c.budget_seconds) v.pass = false;
    }
    note(timing);
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << v.summary << std::endl;
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
