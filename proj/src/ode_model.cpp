#include "cls/ode_model.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "cls/carleman.hpp"

namespace cls {

NodeLayout parse_node_layout(std::string_view name) {
  if (name == "interior") return NodeLayout::interior;
  if (name == "cell_centered") return NodeLayout::cell_centered;
  if (name == "left_offset") return NodeLayout::left_offset;
  throw std::invalid_argument("unknown node layout '" + std::string(name) + "'");
}

std::string_view to_string(NodeLayout layout) {
  switch (layout) {
    case NodeLayout::interior: return "interior";
    case NodeLayout::cell_centered: return "cell_centered";
    case NodeLayout::left_offset: return "left_offset";
  }
  return "interior";
}

SpatialGrid1D::SpatialGrid1D(double x_length, Index n_x, NodeLayout layout)
    : x_length_(x_length), layout_(layout) {
  if (n_x < 1) throw std::invalid_argument("n_x must be at least 1");
  if (!(x_length > 0.0) || !std::isfinite(x_length))
    throw std::invalid_argument("x_length must be positive and finite");

  const double n = static_cast<double>(n_x);
  dx_ = layout == NodeLayout::interior ? x_length / (n + 1.0) : x_length / n;
  const double shift = layout == NodeLayout::cell_centered ? 0.5 : 1.0;
  nodes_.resize(n_x);
  for (Index j = 0; j < n_x; ++j) nodes_(j) = (static_cast<double>(j) + shift) * dx_;
}

void ReactionDiffusionParams::validate() const {
  if (!(diffusion >= 0.0) || !std::isfinite(diffusion))
    throw std::invalid_argument("D must be non-negative and finite");
  if (!std::isfinite(linear_rate)) throw std::invalid_argument("Q must be finite");
  if (!std::isfinite(quadratic_rate)) throw std::invalid_argument("R must be finite");
}

PolynomialSystem::PolynomialSystem(RealSparse f1, RealSparse f2, std::optional<SpatialGrid1D> grid)
    : f1_(std::move(f1)), f2_(std::move(f2)), grid_(std::move(grid)) {
  const Index n = f1_.rows();
  if (n < 1 || f1_.cols() != n) throw std::invalid_argument("F1 must be square and non-empty");
  if (f2_.rows() != n || f2_.cols() != n * n)
    throw std::invalid_argument("F2 must have shape n x n^2");
  if (grid_ && grid_->size() != n) throw std::invalid_argument("grid size does not match F1");
  f1_.makeCompressed();
  f2_.makeCompressed();
}

Eigen::VectorXd PolynomialSystem::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("state dimension mismatch");
  return f1_ * x + f2_ * kron(x, x);
}

RealSparse build_laplacian(const SpatialGrid1D& grid) {
  const Index n = grid.size();
  const double scale = 1.0 / (grid.dx() * grid.dx());
  std::vector<Eigen::Triplet<double, Index>> entries;
  entries.reserve(static_cast<std::size_t>(3 * n));
  for (Index j = 0; j < n; ++j) {
    if (j > 0) entries.emplace_back(j, j - 1, scale);
    entries.emplace_back(j, j, -2.0 * scale);
    if (j + 1 < n) entries.emplace_back(j, j + 1, scale);
  }
  RealSparse lap(n, n);
  lap.setFromTriplets(entries.begin(), entries.end());
  return lap;
}

PolynomialSystem build_polynomial_system(const ReactionDiffusionParams& params,
                                         const SpatialGrid1D& grid) {
  params.validate();
  const Index n = grid.size();

  RealSparse identity(n, n);
  identity.setIdentity();
  RealSparse f1 = params.diffusion * build_laplacian(grid) + params.linear_rate * identity;

  RealSparse f2(n, n * n);
  if (params.quadratic_rate != 0.0) {
    std::vector<Eigen::Triplet<double, Index>> entries;
    entries.reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) entries.emplace_back(j, j * n + j, params.quadratic_rate);
    f2.setFromTriplets(entries.begin(), entries.end());
  }
  return PolynomialSystem(std::move(f1), std::move(f2), grid);
}

FieldState sample_initial(const SpatialGrid1D& grid) {
  FieldState state;
  state.values = grid.nodes().unaryExpr(
      [](double x) { return 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * x); });
  return state;
}

Eigen::VectorXd eval_nonlinear_rhs(const FieldState& state, const ReactionDiffusionParams& params,
                                   const SpatialGrid1D& grid) {
  const Index n = grid.size();
  const auto& phi = state.values;
  if (phi.size() != n) throw std::invalid_argument("field does not match grid size");

  // Coefficients are formed exactly as in build_polynomial_system so that the
  // R = 0 case reproduces F1 * phi bit for bit.
  const double scale = 1.0 / (grid.dx() * grid.dx());
  const double off = params.diffusion * scale;
  const double diag = params.diffusion * (-2.0 * scale) + params.linear_rate;
  Eigen::VectorXd rhs(n);
  for (Index j = 0; j < n; ++j) {
    double acc = 0.0;
    if (j > 0) acc += off * phi(j - 1);
    acc += diag * phi(j);
    if (j + 1 < n) acc += off * phi(j + 1);
    rhs(j) = acc + params.quadratic_rate * (phi(j) * phi(j));
  }
  return rhs;
}

}  // namespace cls
