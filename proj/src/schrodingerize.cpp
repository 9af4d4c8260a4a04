#include "cls/schrodingerize.hpp"

#include <string>

namespace cls {

AuxGrid::AuxGrid(double p_left, double p_right, Index n_p) : p_left_(p_left), p_right_(p_right) {
  if (!std::isfinite(p_left) || !std::isfinite(p_right))
    throw std::invalid_argument("p-grid bounds must be finite");
  if (!(p_left < 0.0)) throw std::invalid_argument("p_left must be negative");
  if (!(p_right > 0.0)) throw std::invalid_argument("p_right must be positive");
  if (n_p < 2) throw std::invalid_argument("n_p must be at least 2");
  dp_ = (p_right - p_left) / static_cast<double>(n_p);
  nodes_.resize(n_p);
  for (Index j = 0; j < n_p; ++j) nodes_(j) = p_left + static_cast<double>(j) * dp_;
}

Index AuxGrid::first_positive() const {
  // Half a cell of slack absorbs the rounding in p_left + j*dp near zero.
  for (Index j = 0; j < size(); ++j)
    if (nodes_(j) > 0.5 * dp_) return j;
  throw std::invalid_argument("p-grid has no node with p > dp/2 to recover from");
}

AuxGrid build_aux_grid(double p_left, double p_right, Index n_p) {
  return AuxGrid(p_left, p_right, n_p);
}

RealSparse build_upwind_gradient(const AuxGrid& grid) {
  const Index n = grid.size();
  const double inv = 1.0 / grid.dp();
  std::vector<Eigen::Triplet<double, Index>> entries;
  entries.reserve(static_cast<std::size_t>(2 * n));
  for (Index j = 0; j < n; ++j) {
    entries.emplace_back(j, j, -inv);
    entries.emplace_back(j, (j + 1) % n, inv);
  }
  RealSparse grad(n, n);
  grad.setFromTriplets(entries.begin(), entries.end());
  return grad;
}

RealSparse build_central_gradient(const AuxGrid& grid) {
  const Index n = grid.size();
  if (n < 3) throw std::invalid_argument("central gradient needs n_p >= 3");
  const double half = 0.5 / grid.dp();
  std::vector<Eigen::Triplet<double, Index>> entries;
  entries.reserve(static_cast<std::size_t>(2 * n));
  for (Index j = 0; j < n; ++j) {
    entries.emplace_back(j, (j + 1) % n, half);
    entries.emplace_back(j, (j + n - 1) % n, -half);
  }
  RealSparse grad(n, n);
  grad.setFromTriplets(entries.begin(), entries.end());
  return grad;
}

std::vector<Index> RecoverySpec::nodes(const AuxGrid& grid) const {
  std::vector<Index> out;
  if (mode == Mode::point) {
    const Index j = index.value_or(grid.first_positive());
    if (j < 0 || j >= grid.size()) throw std::invalid_argument("recovery index outside the p-grid");
    out.push_back(j);
  } else {
    if (!(p_min > 0.0)) throw std::invalid_argument("recovery window must lie in p > 0");
    if (!(p_max >= p_min)) throw std::invalid_argument("recovery window is empty");
    for (Index j = 0; j < grid.size(); ++j)
      if (grid.nodes()(j) >= p_min && grid.nodes()(j) <= p_max) out.push_back(j);
    if (out.empty()) throw std::invalid_argument("recovery window contains no grid node");
  }
  for (Index j : out)
    if (!(grid.nodes()(j) > 0.0))
      throw std::invalid_argument("recovery at p_" + std::to_string(j) + " <= 0 is not allowed");
  return out;
}

}  // namespace cls
