#pragma once

// Explicit time integration for the three solvers compared throughout:
//   FDM : forward Euler on the nonlinear semi-discrete system,
//   CL  : forward Euler on the truncated Carleman system,
//   CLS : forward Euler on the warped system psi(n+1) = B psi(n),
// plus an exponential-action oracle and explicit-scheme stability screening.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cls/carleman.hpp"
#include "cls/ode_model.hpp"
#include "cls/schrodingerize.hpp"
#include "cls/types.hpp"

namespace cls {

/// Uniform time stepping: n_t steps of dt = t_end / n_t. t_end = 0 is allowed and
/// yields dt = 0 (no evolution).
class TimeGrid {
 public:
  TimeGrid(double t_end, Index n_t);

  double t_end() const { return t_end_; }
  Index steps() const { return n_t_; }
  double dt() const { return dt_; }
  /// t_end * step / n_t, exact at step = n_t and at the usual decimal sample times.
  double time_at(Index step) const {
    return t_end_ * static_cast<double>(step) / static_cast<double>(n_t_);
  }

  /// Step index of each requested time, plus step 0. Times beyond t_end are dropped;
  /// times that are not a whole number of steps are rejected.
  std::vector<Index> sample_steps(std::span<const double> times) const;

 private:
  double t_end_;
  Index n_t_;
  double dt_;
};

inline const std::vector<double> kDefaultSampleTimes{0.1, 0.2, 0.3, 0.4};

struct Trajectory {
  std::string scheme;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  Eigen::VectorXd nodes;
  double dx = 1.0;
  /// Ghost positions carrying the Dirichlet zeros, used for interpolation.
  double left_ghost = 0.0;
  double right_ghost = 0.0;
  std::map<std::string, std::string> tags;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;
  /// Optional full lifted states (CL) at the sample times.
  std::vector<Eigen::VectorXd> lifted;
  /// Optional CLS snapshots: real part of the first-order block of psi, n_p x n_x.
  std::vector<Eigen::MatrixXd> wpt_snapshots;
  Eigen::VectorXd p_nodes;

  /// Index of the sample at `time` (within 1e-9), or throws.
  std::size_t sample_index(double time) const;
};

struct EvolveOptions {
  std::vector<double> sample_times = kDefaultSampleTimes;
  /// Steps between divergence checks; the final state is always checked.
  Index check_every = 256;
  bool allow_unstable = false;
  bool keep_lifted = false;
  bool keep_wpt_snapshots = false;
  /// CL runs on the symmetric-tensor subspace when the lifted dimension exceeds this.
  Index symmetric_reduction_above = 20000;
  /// Grid used to label trajectories whose operator carries none.
  std::optional<SpatialGrid1D> grid;
};

// ---------------------------------------------------------------------------
// Warped-system step

/// B1 = -H1 dt/dp, B2 = I + H1 dt/dp + iH2 dt; psi_j <- B1 psi_{j+1} + B2 psi_j.
template <typename Scalar>
struct StepOperator {
  SparseMatrix<Scalar> b1;
  SparseMatrix<Scalar> b2;
  double dt = 0.0;
  double dp = 1.0;

  /// Block-circulant B: b2 on the diagonal, b1 on the superdiagonal and in the
  /// bottom-left corner (periodic closure psi_{n_p} = psi_0).
  SparseMatrix<Scalar> materialize(Index n_p) const {
    const Index d = b2.rows();
    std::vector<Eigen::Triplet<Scalar, Index>> entries;
    entries.reserve(static_cast<std::size_t>(n_p * (b1.nonZeros() + b2.nonZeros())));
    auto place = [&](const SparseMatrix<Scalar>& m, Index bi, Index bj) {
      for (Index r = 0; r < m.outerSize(); ++r)
        for (typename SparseMatrix<Scalar>::InnerIterator it(m, r); it; ++it)
          entries.emplace_back(bi * d + it.row(), bj * d + it.col(), it.value());
    };
    for (Index j = 0; j < n_p; ++j) {
      place(b2, j, j);
      place(b1, j, (j + 1) % n_p);
    }
    SparseMatrix<Scalar> out(n_p * d, n_p * d);
    out.setFromTriplets(entries.begin(), entries.end());
    return out;
  }
};

template <typename Scalar>
StepOperator<Scalar> assemble_step(const HermitianSplit<Scalar>& split, double dt, double dp) {
  if (!(dt >= 0.0) || !(dp > 0.0)) throw std::invalid_argument("assemble_step needs dt >= 0, dp > 0");
  const double ratio = dt / dp;
  StepOperator<Scalar> op;
  op.dt = dt;
  op.dp = dp;
  op.b1 = Scalar(-ratio) * split.h1;
  op.b2 = Scalar(ratio) * split.h1 + Scalar(dt) * split.skew;
  op.b2 += sparse_identity<Scalar>(split.dim());
  op.b1.prune(Scalar(0));
  op.b2.prune(Scalar(0));
  return op;
}

template <typename Scalar>
StepOperator<Scalar> assemble_step(const HermitianSplit<Scalar>& split, const TimeGrid& time,
                                   const AuxGrid& aux) {
  return assemble_step(split, time.dt(), aux.dp());
}

template <typename Scalar>
double max_magnitude(const Matrix<Scalar>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// One blockwise step psi_j <- B2 psi_j + B1 psi_{(j+1) mod n_p}.
template <typename Scalar>
WptState<Scalar> step_cls(const WptState<Scalar>& psi, const StepOperator<Scalar>& op) {
  const Index n_p = psi.n_p();
  if (psi.block_dim() != op.b2.rows()) throw std::invalid_argument("step operator dimension mismatch");
  WptState<Scalar> next{psi.time + op.dt, Matrix<Scalar>(psi.block_dim(), n_p)};
  for (Index j = 0; j < n_p; ++j) {
    next.blocks.col(j).noalias() = op.b2 * psi.blocks.col(j);
    next.blocks.col(j).noalias() += op.b1 * psi.blocks.col((j + 1) % n_p);
  }
  if (!next.blocks.allFinite() || max_magnitude(next.blocks) > kDivergenceThreshold)
    throw DivergenceError(1, max_magnitude(next.blocks), "CLS step");
  return next;
}

/// Repeated application of B with the warped state held p-major (n_p x dim), so that
/// every sparse entry of H1 or iH2 updates a contiguous column of n_p values.
/// Mathematically identical to step_cls:
///   psi_j <- psi_j + (H1 dt/dp)(psi_j - psi_{j+1}) + (iH2 dt) psi_j.
template <typename Scalar>
class ClsPropagator {
 public:
  ClsPropagator(const HermitianSplit<Scalar>& split, double dt, double dp)
      : advect_((dt / dp) * split.h1), phase_(dt * split.skew), dt_(dt) {
    advect_.makeCompressed();
    phase_.makeCompressed();
  }

  void load(const WptState<Scalar>& psi) {
    if (psi.block_dim() != advect_.rows()) throw std::invalid_argument("propagator dimension mismatch");
    time_ = psi.time;
    x_ = psi.blocks.transpose();
    diff_.resize(x_.rows(), x_.cols());
    y_.resize(x_.rows(), x_.cols());
  }

  WptState<Scalar> state() const { return WptState<Scalar>{time_, x_.transpose()}; }

  /// Real part of the first `rows` entries of every block, n_p x rows.
  Eigen::MatrixXd leading_blocks(Index rows) const { return x_.leftCols(rows).real(); }

  void step() {
    const Index n_p = x_.rows();
    diff_.topRows(n_p - 1) = x_.topRows(n_p - 1) - x_.bottomRows(n_p - 1);
    diff_.row(n_p - 1) = x_.row(n_p - 1) - x_.row(0);
    for (Index i = 0; i < advect_.outerSize(); ++i) {
      auto out = y_.col(i);
      out = x_.col(i);
      for (typename SparseMatrix<Scalar>::InnerIterator it(advect_, i); it; ++it)
        out += it.value() * diff_.col(it.col());
      for (typename SparseMatrix<Scalar>::InnerIterator it(phase_, i); it; ++it)
        out += it.value() * x_.col(it.col());
    }
    x_.swap(y_);
    time_ += dt_;
  }

  bool healthy() const {
    return x_.allFinite() && max_magnitude<Scalar>(x_) <= kDivergenceThreshold;
  }
  double magnitude() const { return max_magnitude<Scalar>(x_); }

 private:
  SparseMatrix<Scalar> advect_;
  SparseMatrix<Scalar> phase_;
  double dt_;
  double time_ = 0.0;
  Matrix<Scalar> x_;
  Matrix<Scalar> diff_;
  Matrix<Scalar> y_;
};

// ---------------------------------------------------------------------------
// Exponential-action oracle

struct ExpmOptions {
  Index max_dim = 4096;
};

namespace detail {

template <typename Scalar>
double one_norm(const SparseMatrix<Scalar>& g) {
  Eigen::VectorXd col_sums = Eigen::VectorXd::Zero(g.cols());
  for (Index r = 0; r < g.outerSize(); ++r)
    for (typename SparseMatrix<Scalar>::InnerIterator it(g, r); it; ++it)
      col_sums(it.col()) += std::abs(it.value());
  return col_sums.size() ? col_sums.maxCoeff() : 0.0;
}

template <typename Derived>
double one_norm(const Eigen::MatrixBase<Derived>& g) {
  return g.size() ? g.cwiseAbs().colwise().sum().maxCoeff() : 0.0;
}

}  // namespace detail

/// exp(G t) v by a truncated Taylor series on s sub-intervals, s chosen so that
/// ||G t / s||_1 <= 1; each series runs until the next term no longer changes the sum.
template <typename Generator, typename Scalar>
Vector<Scalar> exact_expm_evolve(const Generator& g, const Vector<Scalar>& v, double t,
                                 const ExpmOptions& options = {}) {
  if (g.rows() != g.cols() || g.cols() != v.size())
    throw std::invalid_argument("generator and state dimensions differ");
  if (g.rows() > options.max_dim)
    throw CapacityError("generator dimension " + std::to_string(g.rows()) +
                        " exceeds the exponential-oracle cap of " + std::to_string(options.max_dim));
  const double norm = detail::one_norm(g) * std::abs(t);
  const Index substeps = std::max<Index>(1, static_cast<Index>(std::ceil(norm)));
  const double h = t / static_cast<double>(substeps);

  Vector<Scalar> out = v;
  Vector<Scalar> term(v.size());
  for (Index s = 0; s < substeps; ++s) {
    term = out;
    Vector<Scalar> sum = out;
    for (int k = 1; k <= 64; ++k) {
      term = (h / k) * (g * term);
      sum += term;
      if (term.template lpNorm<Eigen::Infinity>() <=
          1e-18 * sum.template lpNorm<Eigen::Infinity>())
        break;
    }
    out.swap(sum);
  }
  return out;
}

/// Relative residual || d/dt exp(Gt)v - G exp(Gt)v || / ||G exp(Gt)v|| with a central
/// difference of width h.
template <typename Generator, typename Scalar>
double expm_residual(const Generator& g, const Vector<Scalar>& v, double t, double h = 1e-5,
                     const ExpmOptions& options = {}) {
  const Vector<Scalar> at = exact_expm_evolve(g, v, t, options);
  const Vector<Scalar> derivative =
      (exact_expm_evolve(g, v, t + h, options) - exact_expm_evolve(g, v, t - h, options)) / (2.0 * h);
  const Vector<Scalar> action = g * at;
  const double scale = std::max(action.norm(), 1e-300);
  return (derivative - action).norm() / scale;
}

// ---------------------------------------------------------------------------
// Stability screening

struct StabilityReport {
  /// 2 D dt / dx^2 (0 when no diffusion operator is involved).
  double diffusion_number = 0.0;
  /// ||H1||_inf dt / dp.
  double advection_number = 0.0;
  /// Power-iteration estimate of the spectral radius of B.
  double spectral_radius = 1.0;
  /// rho(B) is accepted up to 1 + dt * growth_allowance, where the allowance is the
  /// Gershgorin bound on the largest eigenvalue of H1 (floored at 0) plus ||iH2||_inf.
  double growth_allowance = 0.0;
  bool diffusion_ok = true;
  bool advection_ok = true;
  bool spectral_ok = true;

  bool ok() const { return diffusion_ok && advection_ok && spectral_ok; }
  std::string summary() const;
};

struct StabilityOptions {
  int power_iterations = 64;
  unsigned seed = 12345;
};

/// Raised when a run fails stability screening and overrides are off.
class StabilityError : public std::runtime_error {
 public:
  StabilityError(const StabilityReport& report)
      : std::runtime_error("stability check failed: " + report.summary()), report_(report) {}
  const StabilityReport& report() const { return report_; }

 private:
  StabilityReport report_;
};

template <typename Scalar>
StabilityReport screen_warped_step(const HermitianSplit<Scalar>& split, const TimeGrid& time,
                                   const AuxGrid& aux, const StabilityOptions& options = {}) {
  StabilityReport report;
  const double dt = time.dt();
  double h1_inf = 0.0;
  double gershgorin_upper = -std::numeric_limits<double>::infinity();
  for (Index r = 0; r < split.h1.outerSize(); ++r) {
    double row_abs = 0.0;
    double diag = 0.0;
    double off = 0.0;
    for (typename SparseMatrix<Scalar>::InnerIterator it(split.h1, r); it; ++it) {
      row_abs += std::abs(it.value());
      if (it.col() == r)
        diag = std::real(it.value());
      else
        off += std::abs(it.value());
    }
    h1_inf = std::max(h1_inf, row_abs);
    gershgorin_upper = std::max(gershgorin_upper, diag + off);
  }
  double skew_inf = 0.0;
  for (Index r = 0; r < split.skew.outerSize(); ++r) {
    double row_abs = 0.0;
    for (typename SparseMatrix<Scalar>::InnerIterator it(split.skew, r); it; ++it)
      row_abs += std::abs(it.value());
    skew_inf = std::max(skew_inf, row_abs);
  }
  report.advection_number = h1_inf * dt / aux.dp();
  report.advection_ok = report.advection_number < 1.0;
  report.growth_allowance = std::max(0.0, gershgorin_upper) + skew_inf;

  if (dt > 0.0 && options.power_iterations > 0) {
    std::mt19937 rng(options.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    WptState<Scalar> psi{0.0, Matrix<Scalar>(split.dim(), aux.size())};
    for (Index i = 0; i < psi.blocks.size(); ++i) psi.blocks.data()[i] = Scalar(dist(rng));
    const double start = psi.blocks.norm();
    ClsPropagator<Scalar> propagator(split, dt, aux.dp());
    propagator.load(psi);
    for (int k = 0; k < options.power_iterations; ++k) propagator.step();
    const double end = propagator.state().blocks.norm();
    report.spectral_radius =
        std::isfinite(end) ? std::pow(end / start, 1.0 / options.power_iterations)
                           : std::numeric_limits<double>::infinity();
  }
  report.spectral_ok = report.spectral_radius <= 1.0 + dt * report.growth_allowance + 1e-12;
  return report;
}

StabilityReport stability_check(const ReactionDiffusionParams& params, const SpatialGrid1D& grid,
                                const TimeGrid& time, const AuxGrid& aux,
                                const HermitianSplit<double>& split,
                                const StabilityOptions& options = {});

/// 2 D dt / dx^2.
double diffusion_number(const ReactionDiffusionParams& params, const SpatialGrid1D& grid,
                        const TimeGrid& time);

// ---------------------------------------------------------------------------
// Solvers

Trajectory evolve_fdm(const ReactionDiffusionParams& params, const SpatialGrid1D& grid,
                      const FieldState& phi0, const TimeGrid& time,
                      const EvolveOptions& options = {});

Trajectory evolve_cl(const CarlemanOperator& op, const CarlemanState& phi0, const TimeGrid& time,
                     const EvolveOptions& options = {});

/// Warped-system pipeline for an assembled Carleman operator: split, warp, iterate
/// B, recover at the sample times. Only the warped-step checks are enforced here.
Trajectory evolve_cls(const CarlemanOperator& op, const CarlemanState& phi0, const AuxGrid& aux,
                      const TimeGrid& time, const RecoverySpec& recovery,
                      const EvolveOptions& options = {});

/// Full pipeline from the model: build, lift, split, warp, iterate, recover.
Trajectory evolve_cls(const ReactionDiffusionParams& params, const SpatialGrid1D& grid,
                      const FieldState& phi0, const AuxGrid& aux, const TimeGrid& time, int order,
                      const RecoverySpec& recovery, const EvolveOptions& options = {});

}  // namespace cls
