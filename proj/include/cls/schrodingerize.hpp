#pragma once

// Warped phase transformation of a linear system dPhi/dt = A Phi.
//
// A = H1 + iH2 with H1, H2 Hermitian. Substituting psi(t, p) = e^{-p} Phi(t) turns
// the Hermitian part into transport along an auxiliary coordinate p:
//   dpsi/dt = -H1 dpsi/dp + iH2 psi.
// After discretising p on a periodic grid the enlarged generator is
//   Htilde = -grad_p (x) H1 + I (x) iH2,
// acting on psi = [psi_0; psi_1; ...; psi_{n_p-1}].

#include <cmath>
#include <optional>
#include <vector>

#include "cls/carleman.hpp"
#include "cls/types.hpp"

namespace cls {

/// A = h1 + skew with h1 = (A + A^dagger)/2 Hermitian and skew = iH2 = (A - A^dagger)/2.
/// For real A both parts stay real, which keeps the warped state real.
template <typename Scalar>
struct HermitianSplit {
  SparseMatrix<Scalar> h1;
  SparseMatrix<Scalar> skew;

  Index dim() const { return h1.rows(); }

  /// H2 = -i * skew.
  ComplexSparse h2() const { return Complex(0.0, -1.0) * skew.template cast<Complex>(); }

  SparseMatrix<Scalar> reconstruct() const { return h1 + skew; }
};

template <typename Scalar>
HermitianSplit<Scalar> hermitian_split(const SparseMatrix<Scalar>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("hermitian_split needs a square matrix");
  const SparseMatrix<Scalar> adjoint = a.adjoint();
  HermitianSplit<Scalar> split{SparseMatrix<Scalar>(0.5 * (a + adjoint)),
                               SparseMatrix<Scalar>(0.5 * (a - adjoint))};
  split.h1.prune(Scalar(0));
  split.skew.prune(Scalar(0));
  return split;
}

/// Uniform periodic grid p_j = p_left + j*dp on [p_left, p_right), dp = (p_right - p_left)/n_p.
class AuxGrid {
 public:
  AuxGrid(double p_left, double p_right, Index n_p);

  double p_left() const { return p_left_; }
  double p_right() const { return p_right_; }
  Index size() const { return nodes_.size(); }
  double dp() const { return dp_; }
  const Eigen::VectorXd& nodes() const { return nodes_; }

  /// Smallest node with p_j > dp/2: the first node past p = 0 when 0 is a grid node.
  /// Throws when the grid has none.
  Index first_positive() const;

 private:
  double p_left_;
  double p_right_;
  double dp_;
  Eigen::VectorXd nodes_;
};

AuxGrid build_aux_grid(double p_left, double p_right, Index n_p);

/// (1/dp)(-I + S), S the periodic forward shift.
RealSparse build_upwind_gradient(const AuxGrid& grid);

/// (1/(2 dp))(S - S^T), exactly antisymmetric.
RealSparse build_central_gradient(const AuxGrid& grid);

/// Htilde in factored form. State blocks are the columns of a dim x n_p matrix,
/// whose column-major storage is exactly the stacked vector [psi_0; ...; psi_{n_p-1}].
template <typename Scalar>
class WptOperator {
 public:
  WptOperator(HermitianSplit<Scalar> split, RealSparse grad_p)
      : split_(std::move(split)), grad_p_(std::move(grad_p)) {
    if (split_.h1.rows() != split_.h1.cols() || split_.skew.rows() != split_.h1.rows() ||
        split_.skew.cols() != split_.h1.cols())
      throw std::invalid_argument("Hermitian split blocks have inconsistent shapes");
    if (grad_p_.rows() != grad_p_.cols())
      throw std::invalid_argument("p-gradient must be square");
    grad_t_ = grad_p_.transpose().template cast<Scalar>();
  }

  Index block_dim() const { return split_.dim(); }
  Index n_p() const { return grad_p_.rows(); }
  Index dim() const { return block_dim() * n_p(); }
  const HermitianSplit<Scalar>& split() const { return split_; }
  const RealSparse& grad_p() const { return grad_p_; }

  Matrix<Scalar> apply_blocks(const Matrix<Scalar>& blocks) const {
    if (blocks.rows() != block_dim() || blocks.cols() != n_p())
      throw std::invalid_argument("warped state has the wrong shape");
    const Matrix<Scalar> h1_blocks = split_.h1 * blocks;
    Matrix<Scalar> out = split_.skew * blocks;
    out.noalias() -= h1_blocks * grad_t_;
    return out;
  }

  Vector<Scalar> apply(const Vector<Scalar>& flat) const {
    if (flat.size() != dim()) throw std::invalid_argument("warped state has the wrong length");
    const Matrix<Scalar> out =
        apply_blocks(Eigen::Map<const Matrix<Scalar>>(flat.data(), block_dim(), n_p()));
    return Eigen::Map<const Vector<Scalar>>(out.data(), out.size());
  }

  SparseMatrix<Scalar> materialize() const {
    const SparseMatrix<Scalar> grad = grad_p_.template cast<Scalar>();
    SparseMatrix<Scalar> out = kron(sparse_identity<Scalar>(n_p()), split_.skew);
    out -= kron(grad, split_.h1);
    out.makeCompressed();
    return out;
  }

 private:
  HermitianSplit<Scalar> split_;
  RealSparse grad_p_;
  SparseMatrix<Scalar> grad_t_;
};

template <typename Scalar>
WptOperator<Scalar> assemble_wpt_operator(HermitianSplit<Scalar> split, RealSparse grad_p) {
  return WptOperator<Scalar>(std::move(split), std::move(grad_p));
}

template <typename Scalar>
struct WptState {
  double time = 0.0;
  /// Column j is psi_j.
  Matrix<Scalar> blocks;

  Index block_dim() const { return blocks.rows(); }
  Index n_p() const { return blocks.cols(); }
  auto flat() { return Eigen::Map<Vector<Scalar>>(blocks.data(), blocks.size()); }
  auto flat() const { return Eigen::Map<const Vector<Scalar>>(blocks.data(), blocks.size()); }
};

/// psi(0) = P (x) Phi(0), P_j = exp(-|p_j|).
template <typename Scalar>
WptState<Scalar> initialize_wpt_state(const Vector<Scalar>& phi0, const AuxGrid& grid,
                                      double time = 0.0) {
  WptState<Scalar> psi{time, Matrix<Scalar>(phi0.size(), grid.size())};
  for (Index j = 0; j < grid.size(); ++j)
    psi.blocks.col(j) = std::exp(-std::abs(grid.nodes()(j))) * phi0;
  return psi;
}

inline WptState<double> initialize_wpt_state(const CarlemanState& phi0, const AuxGrid& grid) {
  return initialize_wpt_state<double>(phi0.values, grid, phi0.time);
}

struct RecoverySpec {
  enum class Mode { point, window };
  Mode mode = Mode::point;
  /// Node used in point mode; defaults to AuxGrid::first_positive().
  std::optional<Index> index;
  /// Closed p-window averaged in window mode.
  double p_min = 0.0;
  double p_max = 1.0;

  /// Nodes read by this rule on `grid`; throws if any has p_j <= 0.
  std::vector<Index> nodes(const AuxGrid& grid) const;
};

struct Recovered {
  double time = 0.0;
  Eigen::VectorXd values;
  /// Norm of the discarded imaginary part of the recovered blocks.
  double imaginary_norm = 0.0;
};

/// Phi ~ e^{p_j} psi_j at one node, or averaged over a window of positive nodes.
template <typename Scalar>
Recovered recover_state(const WptState<Scalar>& psi, const AuxGrid& grid,
                        const RecoverySpec& recovery) {
  if (psi.n_p() != grid.size()) throw std::invalid_argument("warped state does not match p-grid");
  const std::vector<Index> nodes = recovery.nodes(grid);
  Vector<Scalar> sum = Vector<Scalar>::Zero(psi.block_dim());
  for (Index j : nodes) sum += std::exp(grid.nodes()(j)) * psi.blocks.col(j);
  sum /= static_cast<double>(nodes.size());
  Recovered out;
  out.time = psi.time;
  if constexpr (Eigen::NumTraits<Scalar>::IsComplex) {
    out.values = sum.real();
    out.imaginary_norm = sum.imag().norm();
  } else {
    out.values = sum;
  }
  return out;
}

inline CarlemanState to_carleman_state(const Recovered& recovered, const CarlemanIndexMap& map) {
  if (recovered.values.size() != map.total_dim())
    throw std::invalid_argument("recovered state does not match the Carleman index map");
  return CarlemanState{recovered.time, recovered.values, map};
}

struct SkewCheckOptions {
  /// Above this many rows Htilde is checked block by block instead of materialised.
  Index materialize_limit = 1 << 16;
};

/// max-norm of Htilde + Htilde^dagger for Htilde = -grad (x) H1 + I (x) iH2.
/// Vanishes when grad is antisymmetric and H1, H2 are Hermitian.
template <typename Scalar>
double verify_skew_hermitian(const HermitianSplit<Scalar>& split, const RealSparse& grad,
                             const SkewCheckOptions& options = {}) {
  const WptOperator<Scalar> op(split, grad);
  if (op.dim() <= options.materialize_limit) {
    const SparseMatrix<Scalar> h = op.materialize();
    const SparseMatrix<Scalar> sym = h + SparseMatrix<Scalar>(h.adjoint());
    double worst = 0.0;
    for (Index r = 0; r < sym.outerSize(); ++r)
      for (typename SparseMatrix<Scalar>::InnerIterator it(sym, r); it; ++it)
        worst = std::max(worst, std::abs(it.value()));
    return worst;
  }

  // Block (a, b) of the residual is -g_ab H1 - g_ba H1^dagger + delta_ab (skew + skew^dagger).
  const SparseMatrix<Scalar> h1_adj = split.h1.adjoint();
  const SparseMatrix<Scalar> skew_sym = split.skew + SparseMatrix<Scalar>(split.skew.adjoint());
  const RealSparse grad_t = grad.transpose();
  const RealSparse pattern = grad + grad_t + sparse_identity<double>(grad.rows());
  double worst = 0.0;
  for (Index a = 0; a < pattern.outerSize(); ++a) {
    for (RealSparse::InnerIterator it(pattern, a); it; ++it) {
      const Index b = it.col();
      const double g_ab = grad.coeff(a, b);
      const double g_ba = grad.coeff(b, a);
      SparseMatrix<Scalar> block = Scalar(-g_ab) * split.h1 - Scalar(g_ba) * h1_adj;
      if (a == b) block += skew_sym;
      for (Index r = 0; r < block.outerSize(); ++r)
        for (typename SparseMatrix<Scalar>::InnerIterator e(block, r); e; ++e)
          worst = std::max(worst, std::abs(e.value()));
    }
  }
  return worst;
}

}  // namespace cls
