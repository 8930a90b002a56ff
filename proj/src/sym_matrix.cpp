#include "bmsdp/sym_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace bmsdp {

int pataki_bound(int m_prime) {
  if (m_prime < 1)
    throw std::invalid_argument("pataki_bound: m_prime must be >= 1");
  int p = static_cast<int>(std::floor((std::sqrt(8.0 * m_prime + 1.0) - 1.0) / 2.0));
  // Guard against floating-point edge cases near triangular numbers.
  while (static_cast<long long>(p + 1) * (p + 2) / 2 <= m_prime)
    ++p;
  while (static_cast<long long>(p) * (p + 1) / 2 > m_prime)
    --p;
  return p;
}

SymMatrix::SymMatrix(int n, std::vector<Triplet> triplets) : n_(n), triplets_(std::move(triplets)) {
  std::map<std::pair<int, int>, bool> seen;
  for (auto &t : triplets_) {
    if (t.row < t.col)
      std::swap(t.row, t.col);
    if (t.row >= n_ || t.col < 0)
      throw std::invalid_argument("SymMatrix: triplet index out of range");
    if (!seen.emplace(std::make_pair(t.row, t.col), true).second)
      throw std::invalid_argument("SymMatrix: duplicate coordinate");
  }
  std::sort(triplets_.begin(), triplets_.end(), [](const Triplet &a, const Triplet &b) {
    return std::make_pair(a.row, a.col) < std::make_pair(b.row, b.col);
  });
}

SymMatrix SymMatrix::fromDense(const Matrix &M, Scalar drop_tol) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n)
    throw std::invalid_argument("SymMatrix::fromDense: matrix not square");
  std::vector<Triplet> ts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const Scalar v = 0.5 * (M(i, j) + M(j, i));
      if (std::abs(v) > drop_tol)
        ts.push_back({i, j, v});
    }
  return SymMatrix(n, std::move(ts));
}

SymMatrix SymMatrix::identity(int n) {
  std::vector<Triplet> ts;
  ts.reserve(n);
  for (int i = 0; i < n; ++i)
    ts.push_back({i, i, 1.0});
  return SymMatrix(n, std::move(ts));
}

Matrix SymMatrix::dense() const {
  Matrix M = Matrix::Zero(n_, n_);
  for (const auto &t : triplets_) {
    M(t.row, t.col) = t.value;
    M(t.col, t.row) = t.value;
  }
  return M;
}

Matrix SymMatrix::applyTo(const Matrix &Y) const {
  if (Y.rows() != n_)
    throw std::invalid_argument("SymMatrix::applyTo: dimension mismatch");
  Matrix Z = Matrix::Zero(n_, Y.cols());
  for (const auto &t : triplets_) {
    Z.row(t.row) += t.value * Y.row(t.col);
    if (t.row != t.col)
      Z.row(t.col) += t.value * Y.row(t.row);
  }
  return Z;
}

Scalar SymMatrix::inner(const Matrix &X) const {
  if (X.rows() != n_ || X.cols() != n_)
    throw std::invalid_argument("SymMatrix::inner: dimension mismatch");
  Scalar s = 0.0;
  for (const auto &t : triplets_)
    s += t.value * (t.row == t.col ? X(t.row, t.col) : X(t.row, t.col) + X(t.col, t.row));
  return s;
}

Scalar SymMatrix::innerGram(const Matrix &Y) const {
  if (Y.rows() != n_)
    throw std::invalid_argument("SymMatrix::innerGram: dimension mismatch");
  Scalar s = 0.0;
  for (const auto &t : triplets_) {
    const Scalar d = Y.row(t.row).dot(Y.row(t.col));
    s += t.value * (t.row == t.col ? d : 2.0 * d);
  }
  return s;
}

Scalar SymMatrix::frobeniusNorm() const {
  Scalar s = 0.0;
  for (const auto &t : triplets_)
    s += (t.row == t.col ? 1.0 : 2.0) * t.value * t.value;
  return std::sqrt(s);
}

std::vector<int> SymMatrix::rowSupport() const {
  std::vector<bool> hit(n_, false);
  for (const auto &t : triplets_) {
    hit[t.row] = true;
    hit[t.col] = true;
  }
  std::vector<int> rows;
  for (int i = 0; i < n_; ++i)
    if (hit[i])
      rows.push_back(i);
  return rows;
}

SymMatrix &SymMatrix::operator*=(Scalar a) {
  for (auto &t : triplets_)
    t.value *= a;
  return *this;
}

SymMatrix &SymMatrix::addScaled(const SymMatrix &other, Scalar a) {
  if (other.n_ != n_)
    throw std::invalid_argument("SymMatrix::addScaled: dimension mismatch");
  std::map<std::pair<int, int>, Scalar> acc;
  for (const auto &t : triplets_)
    acc[{t.row, t.col}] += t.value;
  for (const auto &t : other.triplets_)
    acc[{t.row, t.col}] += a * t.value;
  triplets_.clear();
  for (const auto &[ij, v] : acc)
    triplets_.push_back({ij.first, ij.second, v});
  return *this;
}

} // namespace bmsdp
