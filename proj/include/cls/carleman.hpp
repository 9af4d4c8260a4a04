#pragma once

// Truncated Carleman lifting of a quadratic system: the state phi is embedded as
// Phi = [phi, phi^(x)2, ..., phi^(x)K] and evolves under the block upper-bidiagonal
// matrix A with blocks A_{k,k} (from F1) and A_{k,k+1} (from F2).

#include <vector>

#include "cls/ode_model.hpp"
#include "cls/types.hpp"

namespace cls {

/// Kronecker product of two sparse matrices, (ra*rb) x (ca*cb).
template <typename Scalar>
SparseMatrix<Scalar> kron(const SparseMatrix<Scalar>& a, const SparseMatrix<Scalar>& b) {
  SparseMatrix<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  Eigen::Matrix<Index, Eigen::Dynamic, 1> row_nnz(out.rows());
  for (Index ra = 0; ra < a.rows(); ++ra) {
    const Index a_row = a.outerIndexPtr()[ra + 1] - a.outerIndexPtr()[ra];
    for (Index rb = 0; rb < b.rows(); ++rb)
      row_nnz(ra * b.rows() + rb) = a_row * (b.outerIndexPtr()[rb + 1] - b.outerIndexPtr()[rb]);
  }
  out.reserve(row_nnz);
  for (Index ra = 0; ra < a.rows(); ++ra) {
    for (Index rb = 0; rb < b.rows(); ++rb) {
      const Index row = ra * b.rows() + rb;
      for (typename SparseMatrix<Scalar>::InnerIterator ia(a, ra); ia; ++ia)
        for (typename SparseMatrix<Scalar>::InnerIterator ib(b, rb); ib; ++ib)
          out.insert(row, ia.col() * b.cols() + ib.col()) = ia.value() * ib.value();
    }
  }
  out.makeCompressed();
  return out;
}

/// Kronecker product of two column vectors.
template <typename Scalar>
Vector<Scalar> kron(const Vector<Scalar>& a, const Vector<Scalar>& b) {
  Vector<Scalar> out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

template <typename Scalar>
SparseMatrix<Scalar> sparse_identity(Index n) {
  SparseMatrix<Scalar> id(n, n);
  id.setIdentity();
  return id;
}

/// Block layout of the lifted state: block k (1-based) holds phi^(x)k and starts at offset(k).
class CarlemanIndexMap {
 public:
  CarlemanIndexMap(Index base_dim, int order);

  Index base_dim() const { return base_dim_; }
  int order() const { return order_; }
  Index total_dim() const { return total_dim_; }
  Index offset(int k) const;
  Index block_size(int k) const;
  const std::vector<Index>& offsets() const { return offsets_; }

  friend bool operator==(const CarlemanIndexMap&, const CarlemanIndexMap&) = default;

 private:
  Index base_dim_;
  int order_;
  std::vector<Index> offsets_;
  std::vector<Index> sizes_;
  Index total_dim_;
};

/// Position of one block inside the Carleman matrix.
struct BlockPosition {
  Index row;
  Index col;
  Index rows;
  Index cols;
};

struct CarlemanOptions {
  /// Assembly is refused when the estimated number of stored nonzeros exceeds this.
  Index max_nonzeros = 200'000'000;
};

class CarlemanOperator {
 public:
  CarlemanOperator(CarlemanIndexMap index_map, RealSparse matrix);

  const CarlemanIndexMap& index_map() const { return index_map_; }
  const RealSparse& matrix() const { return matrix_; }
  int order() const { return index_map_.order(); }

  /// Footprint of A_{k,k}.
  BlockPosition diagonal_block(int k) const;
  /// Footprint of A_{k,k+1}, for k < K.
  BlockPosition super_block(int k) const;

 private:
  CarlemanIndexMap index_map_;
  RealSparse matrix_;
};

struct CarlemanState {
  double time = 0.0;
  Eigen::VectorXd values;
  CarlemanIndexMap index_map;

  auto block(int k) { return values.segment(index_map.offset(k), index_map.block_size(k)); }
  auto block(int k) const { return values.segment(index_map.offset(k), index_map.block_size(k)); }
};

/// sum_{v=0}^{k-1} I^(x)v (x) F_{l-k+1} (x) I^(x)(k-1-v); only l = k (F1) and l = k+1 (F2).
RealSparse transfer_block(const PolynomialSystem& system, int k, int l);

/// Estimated stored nonzeros of the order-K Carleman matrix.
Index estimate_carleman_nonzeros(const PolynomialSystem& system, int order);

CarlemanOperator assemble_carleman(const PolynomialSystem& system, int order,
                                   const CarlemanOptions& options = {});

CarlemanState lift_state(const FieldState& phi, int order);

FieldState project_state(const CarlemanState& state);

}  // namespace cls
