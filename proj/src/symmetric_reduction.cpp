#include "cls/symmetric_reduction.hpp"

#include <algorithm>
#include <vector>

namespace cls {

SymmetricReduction::SymmetricReduction(const CarlemanIndexMap& map) : map_(map) {
  const Index n = map.base_dim();
  std::vector<Eigen::Triplet<double, Index>> expand_entries;
  std::vector<Eigen::Triplet<double, Index>> select_entries;
  expand_entries.reserve(static_cast<std::size_t>(map.total_dim()));

  Index reduced = 0;
  std::vector<Index> digits;
  for (int k = 1; k <= map.order(); ++k) {
    const Index size = map.block_size(k);
    const Index offset = map.offset(k);
    std::vector<Index> reduced_of(static_cast<std::size_t>(size), -1);
    digits.assign(static_cast<std::size_t>(k), 0);
    for (Index flat = 0; flat < size; ++flat) {
      Index rest = flat;
      for (int v = k - 1; v >= 0; --v) {
        digits[static_cast<std::size_t>(v)] = rest % n;
        rest /= n;
      }
      std::sort(digits.begin(), digits.end());
      Index canonical = 0;
      for (Index d : digits) canonical = canonical * n + d;
      // Sorting the digits gives the smallest permutation, so the canonical
      // entry has already been visited unless it is this one.
      if (canonical == flat) {
        reduced_of[static_cast<std::size_t>(flat)] = reduced;
        select_entries.emplace_back(reduced, offset + flat, 1.0);
        ++reduced;
      }
      expand_entries.emplace_back(offset + flat, reduced_of[static_cast<std::size_t>(canonical)],
                                  1.0);
    }
  }
  expansion_.resize(map.total_dim(), reduced);
  expansion_.setFromTriplets(expand_entries.begin(), expand_entries.end());
  selection_.resize(reduced, map.total_dim());
  selection_.setFromTriplets(select_entries.begin(), select_entries.end());
}

RealSparse SymmetricReduction::reduce(const RealSparse& op) const {
  if (op.rows() != map_.total_dim() || op.cols() != map_.total_dim())
    throw std::invalid_argument("operator does not match the Carleman index map");
  RealSparse selected = selection_ * op;
  RealSparse out = selected * expansion_;
  out.makeCompressed();
  return out;
}

}  // namespace cls
