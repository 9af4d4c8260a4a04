#include "cls/carleman.hpp"

#include <limits>
#include <string>

namespace cls {

namespace {

Index checked_power(Index base, int exponent) {
  Index out = 1;
  for (int i = 0; i < exponent; ++i) {
    if (out > std::numeric_limits<Index>::max() / base)
      throw CapacityError("Carleman block dimension overflows the index type");
    out *= base;
  }
  return out;
}

void append_block(std::vector<Eigen::Triplet<double, Index>>& entries, const RealSparse& block,
                  Index row_offset, Index col_offset) {
  for (Index r = 0; r < block.outerSize(); ++r)
    for (RealSparse::InnerIterator it(block, r); it; ++it)
      entries.emplace_back(row_offset + it.row(), col_offset + it.col(), it.value());
}

}  // namespace

CarlemanIndexMap::CarlemanIndexMap(Index base_dim, int order) : base_dim_(base_dim), order_(order) {
  if (base_dim < 1) throw std::invalid_argument("Carleman base dimension must be at least 1");
  if (order < 1) throw std::invalid_argument("Carleman truncation order must be at least 1");
  Index offset = 0;
  for (int k = 1; k <= order; ++k) {
    const Index size = checked_power(base_dim, k);
    offsets_.push_back(offset);
    sizes_.push_back(size);
    offset += size;
  }
  total_dim_ = offset;
}

Index CarlemanIndexMap::offset(int k) const {
  if (k < 1 || k > order_) throw std::out_of_range("Carleman block index out of range");
  return offsets_[static_cast<std::size_t>(k - 1)];
}

Index CarlemanIndexMap::block_size(int k) const {
  if (k < 1 || k > order_) throw std::out_of_range("Carleman block index out of range");
  return sizes_[static_cast<std::size_t>(k - 1)];
}

CarlemanOperator::CarlemanOperator(CarlemanIndexMap index_map, RealSparse matrix)
    : index_map_(std::move(index_map)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != index_map_.total_dim() || matrix_.cols() != index_map_.total_dim())
    throw std::invalid_argument("Carleman matrix does not match its index map");
}

BlockPosition CarlemanOperator::diagonal_block(int k) const {
  const Index off = index_map_.offset(k);
  const Index size = index_map_.block_size(k);
  return {off, off, size, size};
}

BlockPosition CarlemanOperator::super_block(int k) const {
  if (k >= order()) throw std::out_of_range("no super-diagonal block at the truncation order");
  return {index_map_.offset(k), index_map_.offset(k + 1), index_map_.block_size(k),
          index_map_.block_size(k + 1)};
}

RealSparse transfer_block(const PolynomialSystem& system, int k, int l) {
  if (k < 1) throw std::invalid_argument("transfer_block needs k >= 1");
  const int m = l - k + 1;
  if (m != 1 && m != 2)
    throw std::invalid_argument("transfer_block only supports l = k (F1) and l = k+1 (F2)");

  const Index n = system.dim();
  const RealSparse& f = m == 1 ? system.f1() : system.f2();
  RealSparse sum(checked_power(n, k), checked_power(n, l));
  for (int v = 0; v < k; ++v) {
    const RealSparse left = sparse_identity<double>(checked_power(n, v));
    const RealSparse right = sparse_identity<double>(checked_power(n, k - 1 - v));
    sum += kron(kron(left, f), right);
  }
  sum.makeCompressed();
  return sum;
}

Index estimate_carleman_nonzeros(const PolynomialSystem& system, int order) {
  const Index n = system.dim();
  Index total = 0;
  for (int k = 1; k <= order; ++k) {
    const Index pad = static_cast<Index>(k) * checked_power(n, k - 1);
    total += pad * system.f1().nonZeros();
    if (k < order) total += pad * system.f2().nonZeros();
  }
  return total;
}

CarlemanOperator assemble_carleman(const PolynomialSystem& system, int order,
                                   const CarlemanOptions& options) {
  CarlemanIndexMap map(system.dim(), order);
  const Index estimate = estimate_carleman_nonzeros(system, order);
  if (estimate > options.max_nonzeros)
    throw CapacityError("Carleman matrix needs ~" + std::to_string(estimate) +
                        " nonzeros, above the cap of " + std::to_string(options.max_nonzeros));

  std::vector<Eigen::Triplet<double, Index>> entries;
  entries.reserve(static_cast<std::size_t>(estimate));
  for (int k = 1; k <= order; ++k) {
    append_block(entries, transfer_block(system, k, k), map.offset(k), map.offset(k));
    if (k < order)
      append_block(entries, transfer_block(system, k, k + 1), map.offset(k), map.offset(k + 1));
  }
  RealSparse a(map.total_dim(), map.total_dim());
  a.setFromTriplets(entries.begin(), entries.end());
  a.prune(0.0);
  return CarlemanOperator(std::move(map), std::move(a));
}

CarlemanState lift_state(const FieldState& phi, int order) {
  CarlemanIndexMap map(phi.values.size(), order);
  CarlemanState state{phi.time, Eigen::VectorXd(map.total_dim()), map};
  Eigen::VectorXd power = phi.values;
  state.block(1) = power;
  for (int k = 2; k <= order; ++k) {
    power = kron<double>(power, phi.values);
    state.block(k) = power;
  }
  return state;
}

FieldState project_state(const CarlemanState& state) {
  return FieldState{state.time, state.block(1)};
}

}  // namespace cls
