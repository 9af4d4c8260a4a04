#pragma once

#include "cls/carleman.hpp"

namespace cls {

/// Coordinates of the symmetric-tensor subspace of a Carleman state.
///
/// Block k of a lifted state phi^(x)k is invariant under permutations of its k
/// tensor slots, so it is determined by its entries at non-decreasing multi-indices.
/// `expansion()` (E) copies each stored entry back to every permuted slot and
/// `selection()` (P) picks the canonical entries, so P E = I. A Carleman matrix maps
/// symmetric blocks to symmetric blocks, hence A E = E (P A E) on that subspace and
/// the reduced operator P A E drives exactly the same trajectory.
class SymmetricReduction {
 public:
  explicit SymmetricReduction(const CarlemanIndexMap& map);

  const CarlemanIndexMap& index_map() const { return map_; }
  Index reduced_dim() const { return selection_.rows(); }
  const RealSparse& expansion() const { return expansion_; }
  const RealSparse& selection() const { return selection_; }

  RealSparse reduce(const RealSparse& op) const;
  Eigen::VectorXd compress(const Eigen::VectorXd& full) const { return selection_ * full; }
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const { return expansion_ * reduced; }

 private:
  CarlemanIndexMap map_;
  RealSparse expansion_;
  RealSparse selection_;
};

}  // namespace cls
