#pragma once

#include "bmsdp/types.hpp"

#include <stdexcept>
#include <vector>

namespace bmsdp {

/// Sparse symmetric matrix stored as a lower-triangle coordinate list.
/// Each unordered index pair (i, j) appears at most once, with i >= j.
/// Symmetry is structural: the (j, i) entry is implied, never stored.
class SymMatrix {
public:
  struct Triplet {
    int row;
    int col;
    Scalar value;
  };

  SymMatrix() : n_(0) {}
  explicit SymMatrix(int n) : n_(n) {
    if (n < 0)
      throw std::invalid_argument("SymMatrix: negative dimension");
  }
  SymMatrix(int n, std::vector<Triplet> triplets);

  /// Builds from a dense symmetric matrix, dropping exact zeros.
  static SymMatrix fromDense(const Matrix &M, Scalar drop_tol = 0.0);
  static SymMatrix identity(int n);
  static SymMatrix zero(int n) { return SymMatrix(n); }

  int dim() const { return n_; }
  int nnz() const { return static_cast<int>(triplets_.size()); }
  const std::vector<Triplet> &triplets() const { return triplets_; }

  Matrix dense() const;

  /// A * Y for a dense right factor, exploiting sparsity.
  Matrix applyTo(const Matrix &Y) const;

  /// Frobenius inner product <A, X> with a dense symmetric X.
  Scalar inner(const Matrix &X) const;

  /// <A, Y Z^T + Z Y^T>/... specifically <A, Y Z^T> + <A, Z Y^T> is not
  /// needed; this computes <A, Y Y^T> without forming Y Y^T.
  Scalar innerGram(const Matrix &Y) const;

  Scalar frobeniusNorm() const;

  /// Row indices touched by at least one nonzero.
  std::vector<int> rowSupport() const;

  SymMatrix &operator*=(Scalar a);
  SymMatrix &addScaled(const SymMatrix &other, Scalar a);

private:
  int n_;
  std::vector<Triplet> triplets_;
};

} // namespace bmsdp
