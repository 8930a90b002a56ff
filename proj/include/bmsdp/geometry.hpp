#pragma once

#include "bmsdp/problem.hpp"

namespace bmsdp {

Scalar feasibility_tolerance(const SdpProblem &problem);

/// ||A(Y Y^T) - b||_inf.
Scalar feasibility_residual(const SdpProblem &problem, const Matrix &Y);

/// Cost g(Y) = <C Y, Y>.
Scalar cost(const SdpProblem &problem, const Matrix &Y);

/// Gram system at a base point Y: G_ij = <A_i Y, A_j Y>, its pseudo-inverse
/// (kept as per-group eigendecompositions), and the cached products A_i Y.
/// G is block diagonal over the problem's support groups.
class GramSystem {
public:
  GramSystem(const SdpProblem &problem, const Matrix &Y);

  const Matrix &baseY() const { return Y_; }
  const std::vector<Matrix> &AY() const { return AY_; }
  Matrix denseG() const;
  int mPrime() const { return m_prime_; }

  /// G^dagger v with eigenvalues below the shared rank cutoff zeroed.
  Vector applyPinv(const Vector &v) const;

private:
  Matrix Y_;
  std::vector<Matrix> AY_;
  int m_prime_ = 0;
  struct Block {
    std::vector<int> idx;
    Matrix eigvecs;
    Vector inv_eigvals; // zeroed below cutoff
    Vector eigvals;
  };
  std::vector<Block> blocks_;
};

/// Orthogonal projection of Z onto the tangent space at the Gram system's
/// base point: Z - A*(G^dagger A(Z Y^T)) Y.
Matrix project_tangent(const SdpProblem &problem, const GramSystem &gram, const Matrix &Z);

/// max_i |<A_i Y, V>|, the tangency defect of V at Y.
Scalar tangency_residual(const GramSystem &gram, const Matrix &V);

struct SMatrix {
  Matrix S;  // dense C - A*(mu)
  Vector mu; // minimum-norm solution of G mu = A(C Y Y^T)
};

SMatrix s_matrix(const SdpProblem &problem, const GramSystem &gram);

/// grad g(Y) = 2 S Y; tangent by construction.
Matrix riemannian_gradient(const SMatrix &S, const Matrix &Y);

/// Hess g(Y)[V] = 2 Proj_Y(S V). Re-projects V first when its tangency
/// defect is marginal (within 10x tolerance); errors beyond that.
Matrix hessian_vec(const SdpProblem &problem, const GramSystem &gram, const SMatrix &S,
                   const Matrix &V);

struct RetractionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// First-order retraction. Family fast paths renormalize rows/blocks or take
/// polar factors; the generic path runs Newton on the multipliers and throws
/// RetractionFailure if it does not converge (callers shrink the step).
Matrix retract(const SdpProblem &problem, const Matrix &Y, const Matrix &V);

} // namespace bmsdp
