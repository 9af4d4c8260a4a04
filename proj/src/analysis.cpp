#include "cls/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace cls {

Eigen::VectorXd interpolate_with_ghosts(const Eigen::VectorXd& nodes, const Eigen::VectorXd& values,
                                       double left_ghost, double right_ghost,
                                       const Eigen::VectorXd& targets) {
  if (nodes.size() != values.size()) throw std::invalid_argument("nodes and values differ in length");
  const Index n = nodes.size();
  std::vector<double> xs(static_cast<std::size_t>(n + 2));
  std::vector<double> ys(xs.size(), 0.0);
  xs.front() = left_ghost;
  xs.back() = right_ghost;
  for (Index j = 0; j < n; ++j) {
    xs[static_cast<std::size_t>(j + 1)] = nodes(j);
    ys[static_cast<std::size_t>(j + 1)] = values(j);
  }
  Eigen::VectorXd out(targets.size());
  for (Index i = 0; i < targets.size(); ++i) {
    const double x = targets(i);
    if (x <= xs.front() || x >= xs.back()) {
      out(i) = 0.0;
      continue;
    }
    const auto hi = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t k = static_cast<std::size_t>(hi - xs.begin());
    const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    out(i) = (1.0 - w) * ys[k - 1] + w * ys[k];
  }
  return out;
}

namespace {

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

bool same_nodes(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace

ErrorField error_fields(const Trajectory& candidate, const Trajectory& reference, double rel_floor) {
  if (!(rel_floor > 0.0)) throw std::invalid_argument("relative floor must be positive");
  if (candidate.times.size() != reference.times.size())
    throw std::invalid_argument("trajectories have different sample counts");
  for (std::size_t i = 0; i < reference.times.size(); ++i)
    if (!same_time(candidate.times[i], reference.times[i]))
      throw std::invalid_argument("trajectories are sampled at different times");

  ErrorField field;
  field.times = reference.times;
  field.nodes = reference.nodes;
  field.dx = reference.dx;
  field.rel_floor = rel_floor;
  const Index n = reference.nodes.size();
  const Index rows = static_cast<Index>(reference.times.size());
  field.abs_error.resize(rows, n);
  field.rel_error.resize(rows, n);
  const bool matched = same_nodes(candidate.nodes, reference.nodes);
  for (Index i = 0; i < rows; ++i) {
    const Eigen::VectorXd& ref = reference.states[static_cast<std::size_t>(i)];
    const Eigen::VectorXd& raw = candidate.states[static_cast<std::size_t>(i)];
    const Eigen::VectorXd cand =
        matched ? raw
                : interpolate_with_ghosts(candidate.nodes, raw, candidate.left_ghost,
                                          candidate.right_ghost, reference.nodes);
    field.abs_error.row(i) = (cand - ref).cwiseAbs().transpose();
    field.rel_error.row(i) =
        field.abs_error.row(i).array() / (ref.cwiseAbs().array().transpose() + rel_floor);
  }
  return field;
}

Norm parse_norm(std::string_view name) {
  if (name == "l2") return Norm::l2;
  if (name == "max") return Norm::max;
  throw std::invalid_argument("unknown norm '" + std::string(name) + "' (expected l2 or max)");
}

std::string_view to_string(Norm norm) { return norm == Norm::l2 ? "l2" : "max"; }

double scalar_error(const ErrorField& field, Norm norm, double at_time, ErrorKind kind) {
  const auto it = std::find_if(field.times.begin(), field.times.end(),
                               [&](double t) { return same_time(t, at_time); });
  if (it == field.times.end())
    throw std::out_of_range("error field has no sample at t = " + std::to_string(at_time));
  const Index row = static_cast<Index>(it - field.times.begin());
  const Eigen::VectorXd e =
      (kind == ErrorKind::relative ? field.rel_error : field.abs_error).row(row).transpose();
  if (e.size() == 0) return 0.0;
  return norm == Norm::l2 ? std::sqrt(e.squaredNorm() * field.dx) : e.maxCoeff();
}

SlopeFit fit_loglog_slope(std::span<const double> params, std::span<const double> errors) {
  if (params.size() != errors.size()) throw std::invalid_argument("parameter and error counts differ");
  if (params.size() < 3) throw std::invalid_argument("a slope fit needs at least 3 samples");
  const std::size_t n = params.size();
  Eigen::VectorXd x(static_cast<Index>(n));
  Eigen::VectorXd y(static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!(params[i] > 0.0) || !std::isfinite(params[i]))
      throw std::invalid_argument("slope fit parameters must be positive");
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i]))
      throw std::invalid_argument("slope fit errors must be positive and finite");
    x(static_cast<Index>(i)) = std::log(params[i]);
    y(static_cast<Index>(i)) = std::log(errors[i]);
  }
  const double mx = x.mean();
  const double my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  if (!(sxx > 0.0)) throw std::invalid_argument("slope fit parameters must not all coincide");
  SlopeFit fit;
  fit.slope = ((x.array() - mx) * (y.array() - my)).sum() / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.residual = (y.array() - (fit.intercept + fit.slope * x.array())).abs().maxCoeff();
  return fit;
}

SweepParam parse_sweep_param(std::string_view name) {
  if (name == "K") return SweepParam::K;
  if (name == "dx") return SweepParam::dx;
  if (name == "dp") return SweepParam::dp;
  throw std::invalid_argument("unknown sweep parameter '" + std::string(name) + "' (expected K, dx or dp)");
}

std::string_view to_string(SweepParam param) {
  switch (param) {
    case SweepParam::K: return "K";
    case SweepParam::dx: return "dx";
    case SweepParam::dp: return "dp";
  }
  return "?";
}

std::pair<double, double> default_slope_band(SweepParam param) {
  return param == SweepParam::dx ? std::pair{1.7, 2.3} : std::pair{0.7, 1.3};
}

bool ConvergenceStudy::all_succeeded() const {
  return std::all_of(failures.begin(), failures.end(), [](const std::string& f) { return f.empty(); });
}

Eigen::VectorXd ConvergenceStudy::errors_at(double time) const {
  for (std::size_t t = 0; t < times.size(); ++t)
    if (same_time(times[t], time)) return errors.col(static_cast<Index>(t));
  throw std::out_of_range("study has no errors at t = " + std::to_string(time));
}

namespace {

void fit_study(ConvergenceStudy& study) {
  study.fits.clear();
  study.fit_times.clear();
  for (std::size_t t = 0; t < study.times.size(); ++t) {
    if (study.times[t] <= 0.0) continue;
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < study.values.size(); ++i) {
      const double e = study.errors(static_cast<Index>(i), static_cast<Index>(t));
      if (study.failures[i].empty() && std::isfinite(e) && e > 0.0) {
        xs.push_back(study.abscissa[i]);
        ys.push_back(e);
      }
    }
    SlopeFit fit{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                 std::numeric_limits<double>::quiet_NaN()};
    if (xs.size() >= 3) fit = fit_loglog_slope(xs, ys);
    study.fits.push_back(fit);
    study.fit_times.push_back(study.times[t]);
    if (same_time(study.times[t], study.error_time)) {
      study.fitted_slope = fit.slope;
      study.fit_residual = fit.residual;
    }
  }
}

}  // namespace

ConvergenceStudy make_study(SweepParam param, std::vector<double> values,
                            std::vector<double> abscissa, std::vector<double> times,
                            Eigen::MatrixXd errors, std::vector<std::string> failures,
                            double error_time) {
  if (values.size() < 3) throw std::invalid_argument("a convergence study needs at least 3 values");
  if (abscissa.size() != values.size() || errors.rows() != static_cast<Index>(values.size()) ||
      errors.cols() != static_cast<Index>(times.size()))
    throw std::invalid_argument("study shapes are inconsistent");
  ConvergenceStudy study;
  study.param = param;
  study.values = std::move(values);
  study.abscissa = std::move(abscissa);
  study.times = std::move(times);
  study.errors = std::move(errors);
  study.failures = std::move(failures);
  study.error_time = error_time;
  study.fitted_slope = std::numeric_limits<double>::quiet_NaN();
  study.fit_residual = std::numeric_limits<double>::quiet_NaN();
  study.failures.resize(study.values.size());
  fit_study(study);
  return study;
}

double sweep_abscissa(SweepParam param, double value, const ProblemConfig& base) {
  switch (param) {
    case SweepParam::K: return 1.0 / value;
    case SweepParam::dx: return sweep_point(base, param, value).grid().dx();
    case SweepParam::dp: return sweep_point(base, param, value).aux().dp();
  }
  return 0.0;
}

ProblemConfig sweep_point(const ProblemConfig& base, SweepParam param, double value) {
  if (!(value >= 1.0) || value != std::floor(value))
    throw std::invalid_argument("sweep values must be positive integers");
  ProblemConfig point = base;
  switch (param) {
    case SweepParam::K: point.order = static_cast<int>(value); break;
    case SweepParam::dx: point.n_x = static_cast<Index>(value); break;
    case SweepParam::dp: point.n_p = static_cast<Index>(value); break;
  }
  return point;
}

ConvergenceStudy run_sweep(const ProblemConfig& base, const SweepSpec& spec, const PointProbe& probe) {
  if (spec.values.size() < 3) throw std::invalid_argument("a sweep needs at least 3 values");
  for (std::size_t i = 1; i < spec.values.size(); ++i)
    if (!(spec.values[i] > spec.values[i - 1]))
      throw std::invalid_argument("sweep values must be strictly increasing");
  std::vector<double> times;
  const TimeGrid time = base.time();
  for (Index step : time.sample_steps(base.sample_times))
    times.push_back(time.time_at(step));
  if (std::none_of(times.begin(), times.end(), [&](double t) { return same_time(t, spec.error_time); }))
    throw std::invalid_argument("error_time " + std::to_string(spec.error_time) + " is not a sample time");

  const std::size_t count = spec.values.size();
  Eigen::MatrixXd errors = Eigen::MatrixXd::Constant(static_cast<Index>(count),
                                                     static_cast<Index>(times.size()),
                                                     std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> failures(count);
  std::vector<double> abscissa(count);
  for (std::size_t i = 0; i < count; ++i) abscissa[i] = sweep_abscissa(spec.param, spec.values[i], base);

  auto evaluate = [&](std::size_t i) {
    try {
      const std::vector<double> e = probe(sweep_point(base, spec.param, spec.values[i]));
      if (e.size() != times.size()) throw std::logic_error("probe returned the wrong number of errors");
      for (std::size_t t = 0; t < e.size(); ++t)
        errors(static_cast<Index>(i), static_cast<Index>(t)) = e[t];
    } catch (const std::exception& ex) {
      failures[i] = ex.what();
    }
  };
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, spec.jobs));
  for (std::size_t start = 0; start < count; start += jobs) {
    std::vector<std::future<void>> running;
    for (std::size_t i = start; i < std::min(count, start + jobs); ++i)
      running.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async, evaluate, i));
    for (auto& f : running) f.get();
  }

  return make_study(spec.param, spec.values, std::move(abscissa), std::move(times),
                    std::move(errors), std::move(failures), spec.error_time);
}

namespace {

std::vector<double> errors_over_time(const Trajectory& candidate, const Trajectory& reference,
                                     const SweepSpec& spec) {
  const ErrorField field = error_fields(candidate, reference, spec.rel_floor);
  std::vector<double> out;
  for (double t : field.times) out.push_back(scalar_error(field, spec.norm, t));
  return out;
}

}  // namespace

PointProbe default_probe(const ProblemConfig& base, const SweepSpec& spec) {
  switch (spec.param) {
    case SweepParam::K:
      return [spec](const ProblemConfig& point) {
        return errors_over_time(run_scheme(point, Scheme::cl), run_scheme(point, Scheme::fdm), spec);
      };
    case SweepParam::dx: {
      Index n_ref = spec.reference_n_x;
      if (n_ref == 0) {
        const double largest = *std::max_element(spec.values.begin(), spec.values.end());
        n_ref = 8 * (static_cast<Index>(largest) + 1) - 1;
      }
      struct FineReference {
        ProblemConfig config;
        std::once_flag once;
        Trajectory trajectory;
      };
      auto reference = std::make_shared<FineReference>();
      reference->config = base;
      reference->config.n_x = n_ref;
      return [spec, reference](const ProblemConfig& point) {
        std::call_once(reference->once,
                       [&] { reference->trajectory = run_scheme(reference->config, Scheme::fdm); });
        return errors_over_time(run_scheme(point, Scheme::cls), reference->trajectory, spec);
      };
    }
    case SweepParam::dp:
      return [spec](const ProblemConfig& point) {
        return errors_over_time(run_scheme(point, Scheme::cls), run_scheme(point, Scheme::cl), spec);
      };
  }
  throw std::logic_error("unhandled sweep parameter");
}

ConvergenceStudy sweep_truncation(const ProblemConfig& base, SweepSpec spec) {
  spec.param = SweepParam::K;
  return run_sweep(base, spec, default_probe(base, spec));
}

ConvergenceStudy sweep_dx(const ProblemConfig& base, SweepSpec spec) {
  spec.param = SweepParam::dx;
  return run_sweep(base, spec, default_probe(base, spec));
}

ConvergenceStudy sweep_dp(const ProblemConfig& base, SweepSpec spec) {
  spec.param = SweepParam::dp;
  return run_sweep(base, spec, default_probe(base, spec));
}

}  // namespace cls
