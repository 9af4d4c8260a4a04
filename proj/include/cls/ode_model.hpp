#pragma once

// Continuous reaction-diffusion model d(phi)/dt = D phi_xx + Q phi + R phi^2 on (0, x_R)
// with homogeneous Dirichlet ends, and its second-order finite-difference
// semi-discretisation d(phi)/dt = F1 phi + F2 (phi (x) phi).

#include <optional>
#include <string_view>

#include "cls/types.hpp"

namespace cls {

/// Where the n_x unknowns sit relative to the Dirichlet ends.
///   interior      : x_j = (j+1) dx,   dx = x_R/(n_x+1); ghosts sit exactly on 0 and x_R.
///   cell_centered : x_j = (j+1/2) dx, dx = x_R/n_x;     ghosts half a cell outside.
///   left_offset   : x_j = (j+1) dx,   dx = x_R/n_x;     right ghost at x_R + dx.
enum class NodeLayout { interior, cell_centered, left_offset };

NodeLayout parse_node_layout(std::string_view name);
std::string_view to_string(NodeLayout layout);

class SpatialGrid1D {
 public:
  SpatialGrid1D(double x_length, Index n_x, NodeLayout layout = NodeLayout::interior);

  double x_length() const { return x_length_; }
  Index size() const { return nodes_.size(); }
  double dx() const { return dx_; }
  NodeLayout layout() const { return layout_; }
  const Eigen::VectorXd& nodes() const { return nodes_; }

  /// Positions of the zero-valued ghost nodes phi_{-1} and phi_{n_x}.
  double left_ghost() const { return nodes_(0) - dx_; }
  double right_ghost() const { return nodes_(size() - 1) + dx_; }

 private:
  double x_length_;
  double dx_;
  NodeLayout layout_;
  Eigen::VectorXd nodes_;
};

struct ReactionDiffusionParams {
  double diffusion = 1.0;       // D
  double linear_rate = 1.0;     // Q
  double quadratic_rate = -1.0; // R

  void validate() const;
};

struct FieldState {
  double time = 0.0;
  Eigen::VectorXd values;
};

/// Quadratic vector field F1 x + F2 (x (x) x). F2 columns follow the row-major
/// Kronecker ordering: component (a, b) of x (x) x lives at a*n + b.
class PolynomialSystem {
 public:
  PolynomialSystem(RealSparse f1, RealSparse f2, std::optional<SpatialGrid1D> grid = std::nullopt);

  Index dim() const { return f1_.rows(); }
  const RealSparse& f1() const { return f1_; }
  const RealSparse& f2() const { return f2_; }
  const std::optional<SpatialGrid1D>& grid() const { return grid_; }

  /// Evaluates F1 x + F2 (x (x) x) through the explicit Kronecker vector.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;

 private:
  RealSparse f1_;
  RealSparse f2_;
  std::optional<SpatialGrid1D> grid_;
};

/// (1/dx^2) tridiag(1, -2, 1) with phi_{-1} = phi_{n_x} = 0.
RealSparse build_laplacian(const SpatialGrid1D& grid);

PolynomialSystem build_polynomial_system(const ReactionDiffusionParams& params,
                                         const SpatialGrid1D& grid);

/// phi(0, x) = 0.5 - 0.5 cos(2 pi x) sampled on the grid nodes.
FieldState sample_initial(const SpatialGrid1D& grid);

/// D (Laplacian phi) + Q phi + R phi^2 evaluated with the three-point stencil.
Eigen::VectorXd eval_nonlinear_rhs(const FieldState& state, const ReactionDiffusionParams& params,
                                   const SpatialGrid1D& grid);

}  // namespace cls
