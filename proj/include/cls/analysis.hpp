#pragma once

// Error fields between trajectories, scalar error norms, log-log slope fits and
// the three convergence sweeps (truncation order K, spatial step dx, auxiliary step dp).

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cls/evolve.hpp"
#include "cls/problem.hpp"

namespace cls {

inline constexpr double kDefaultRelativeFloor = 1e-12;

/// Rows are sample times, columns are reference nodes.
struct ErrorField {
  std::vector<double> times;
  Eigen::VectorXd nodes;
  double dx = 1.0;
  double rel_floor = kDefaultRelativeFloor;
  Eigen::MatrixXd abs_error;
  Eigen::MatrixXd rel_error;
};

/// Linear interpolation of `values` (at `nodes`, with zero anchors at the two
/// ghost positions) onto `targets`.
Eigen::VectorXd interpolate_with_ghosts(const Eigen::VectorXd& nodes, const Eigen::VectorXd& values,
                                       double left_ghost, double right_ghost,
                                       const Eigen::VectorXd& targets);

/// abs = |candidate - reference|, rel = abs / (|reference| + rel_floor). The candidate
/// is interpolated onto the reference nodes when the grids differ.
ErrorField error_fields(const Trajectory& candidate, const Trajectory& reference,
                        double rel_floor = kDefaultRelativeFloor);

enum class Norm { l2, max };
enum class ErrorKind { relative, absolute };

Norm parse_norm(std::string_view name);
std::string_view to_string(Norm norm);

/// l2: sqrt(sum_j e_j^2 dx); max: max_j e_j, with e the relative (default) or absolute field.
double scalar_error(const ErrorField& field, Norm norm, double at_time,
                    ErrorKind kind = ErrorKind::relative);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Largest |log(error) - fitted line| over the samples.
  double residual = 0.0;
};

/// Least-squares line through (log param, log error).
SlopeFit fit_loglog_slope(std::span<const double> params, std::span<const double> errors);

enum class SweepParam { K, dx, dp };

SweepParam parse_sweep_param(std::string_view name);
std::string_view to_string(SweepParam param);

/// Default acceptance band on the fitted slope: K and dp [0.7, 1.3], dx [1.7, 2.3].
std::pair<double, double> default_slope_band(SweepParam param);

struct SweepSpec {
  SweepParam param = SweepParam::K;
  /// K values, or the grid counts n_x (dx sweep) and n_p (dp sweep).
  std::vector<double> values;
  Norm norm = Norm::l2;
  /// Time whose fit is reported as the study's slope.
  double error_time = 0.4;
  double rel_floor = kDefaultRelativeFloor;
  /// Node count of the fine FDM reference in the dx sweep; 0 picks 8 (max n_x + 1) - 1.
  Index reference_n_x = 0;
  int jobs = 1;
};

struct ConvergenceStudy {
  SweepParam param = SweepParam::K;
  /// Values as given in the SweepSpec (K, n_x or n_p).
  std::vector<double> values;
  /// Fit abscissa: 1/K, dx or dp.
  std::vector<double> abscissa;
  std::vector<double> times;
  /// errors(i, t): scalar error of point i at times[t]; NaN when the point failed.
  Eigen::MatrixXd errors;
  /// One fit per sample time with t > 0.
  std::vector<SlopeFit> fits;
  std::vector<double> fit_times;
  /// Per-point failure messages (empty when the point succeeded).
  std::vector<std::string> failures;
  double error_time = 0.4;
  double fitted_slope = 0.0;
  double fit_residual = 0.0;

  bool all_succeeded() const;
  /// Row of `errors` for error_time.
  Eigen::VectorXd errors_at(double time) const;
};

/// Builds the study from per-point errors at `times` and fits every t > 0.
ConvergenceStudy make_study(SweepParam param, std::vector<double> values,
                            std::vector<double> abscissa, std::vector<double> times,
                            Eigen::MatrixXd errors, std::vector<std::string> failures,
                            double error_time);

/// Abscissa of one sweep value under `base`.
double sweep_abscissa(SweepParam param, double value, const ProblemConfig& base);

/// Config of sweep point `value`.
ProblemConfig sweep_point(const ProblemConfig& base, SweepParam param, double value);

/// Errors of one sweep point at the base sample times.
using PointProbe = std::function<std::vector<double>(const ProblemConfig& point)>;

/// Evaluates `probe` at every point (up to spec.jobs at a time) and fits the study.
/// A throwing probe marks its point as failed; the fit uses the remaining points.
ConvergenceStudy run_sweep(const ProblemConfig& base, const SweepSpec& spec, const PointProbe& probe);

/// The standard probe for spec.param: CL vs FDM (K), CLS vs fine FDM (dx), CLS vs CL (dp).
PointProbe default_probe(const ProblemConfig& base, const SweepSpec& spec);

ConvergenceStudy sweep_truncation(const ProblemConfig& base, SweepSpec spec);
ConvergenceStudy sweep_dx(const ProblemConfig& base, SweepSpec spec);
ConvergenceStudy sweep_dp(const ProblemConfig& base, SweepSpec spec);

}  // namespace cls
