#include "bmsdp/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace bmsdp {

namespace {
constexpr Scalar kEps = std::numeric_limits<Scalar>::epsilon();
}

Scalar feasibility_tolerance(const SdpProblem &problem) {
  return 1e-9 * (1.0 + problem.b.lpNorm<Eigen::Infinity>());
}

Scalar feasibility_residual(const SdpProblem &problem, const Matrix &Y) {
  return (apply_A_gram(problem, Y) - problem.b).lpNorm<Eigen::Infinity>();
}

Scalar cost(const SdpProblem &problem, const Matrix &Y) {
  return problem.C.innerGram(Y);
}

GramSystem::GramSystem(const SdpProblem &problem, const Matrix &Y) : Y_(Y) {
  const int m = problem.m;
  if (problem.structure.kind == StructureKind::kGeneric && m > 20000)
    throw std::runtime_error("GramSystem: refusing dense Gram with m > 20000");
  AY_.reserve(m);
  for (int i = 0; i < m; ++i)
    AY_.push_back(problem.A[i].applyTo(Y));

  // Rank cutoff matches the singular-value convention on the stacked A_i Y:
  // eigenvalues of G are squared singular values of that stack.
  const int np = static_cast<int>(Y.size());
  const Scalar sv_scale = static_cast<Scalar>(std::max(np, m)) * kEps;

  Scalar lambda_max = 0.0;
  std::vector<Block> blocks;
  for (const auto &group : problem.support_groups) {
    Block blk;
    blk.idx = group;
    const int k = static_cast<int>(group.size());
    Matrix G(k, k);
    for (int a = 0; a < k; ++a)
      for (int c = 0; c <= a; ++c)
        G(a, c) = G(c, a) = (AY_[group[a]].array() * AY_[group[c]].array()).sum();
    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    blk.eigvecs = es.eigenvectors();
    blk.eigvals = es.eigenvalues();
    lambda_max = std::max(lambda_max, blk.eigvals.size() ? blk.eigvals.maxCoeff() : 0.0);
    blocks.push_back(std::move(blk));
  }
  const Scalar cutoff = sv_scale * sv_scale * lambda_max;
  for (auto &blk : blocks) {
    blk.inv_eigvals = Vector::Zero(blk.eigvals.size());
    for (int i = 0; i < blk.eigvals.size(); ++i)
      if (blk.eigvals[i] > cutoff) {
        blk.inv_eigvals[i] = 1.0 / blk.eigvals[i];
        ++m_prime_;
      }
  }
  blocks_ = std::move(blocks);
}

Matrix GramSystem::denseG() const {
  int m = 0;
  for (const auto &blk : blocks_)
    m += static_cast<int>(blk.idx.size());
  Matrix G = Matrix::Zero(m, m);
  for (const auto &blk : blocks_) {
    Matrix Gb = blk.eigvecs * blk.eigvals.asDiagonal() * blk.eigvecs.transpose();
    for (size_t a = 0; a < blk.idx.size(); ++a)
      for (size_t c = 0; c < blk.idx.size(); ++c)
        G(blk.idx[a], blk.idx[c]) = Gb(a, c);
  }
  return G;
}

Vector GramSystem::applyPinv(const Vector &v) const {
  Vector out = Vector::Zero(v.size());
  for (const auto &blk : blocks_) {
    Vector vb(blk.idx.size());
    for (size_t a = 0; a < blk.idx.size(); ++a)
      vb[a] = v[blk.idx[a]];
    Vector rb = blk.eigvecs * (blk.inv_eigvals.asDiagonal() * (blk.eigvecs.transpose() * vb));
    for (size_t a = 0; a < blk.idx.size(); ++a)
      out[blk.idx[a]] = rb[a];
  }
  return out;
}

Matrix project_tangent(const SdpProblem &problem, const GramSystem &gram, const Matrix &Z) {
  const auto &AY = gram.AY();
  Vector w(problem.m);
  for (int i = 0; i < problem.m; ++i)
    w[i] = (AY[i].array() * Z.array()).sum(); // <A_i, Z Y^T> = <A_i Y, Z>
  Vector mu = gram.applyPinv(w);
  Matrix V = Z;
  for (int i = 0; i < problem.m; ++i)
    if (mu[i] != 0.0)
      V -= mu[i] * AY[i];
  return V;
}

Scalar tangency_residual(const GramSystem &gram, const Matrix &V) {
  Scalar r = 0.0;
  for (const auto &AiY : gram.AY())
    r = std::max(r, std::abs((AiY.array() * V.array()).sum()));
  return r;
}

SMatrix s_matrix(const SdpProblem &problem, const GramSystem &gram) {
  const Matrix CY = problem.C.applyTo(gram.baseY());
  Vector w(problem.m);
  for (int i = 0; i < problem.m; ++i)
    w[i] = (gram.AY()[i].array() * CY.array()).sum(); // A(C Y Y^T)_i
  SMatrix out;
  out.mu = gram.applyPinv(w);
  out.S = problem.C.dense() - apply_A_adjoint(problem, out.mu).dense();
  return out;
}

Matrix riemannian_gradient(const SMatrix &S, const Matrix &Y) { return 2.0 * S.S * Y; }

Matrix hessian_vec(const SdpProblem &problem, const GramSystem &gram, const SMatrix &S,
                   const Matrix &V) {
  Scalar scale = V.norm();
  for (const auto &AiY : gram.AY())
    scale = std::max(scale, V.norm() * AiY.norm());
  const Scalar tol = 1e-10 * std::max(scale, kEps);
  const Scalar defect = tangency_residual(gram, V);
  Matrix Vt = V;
  if (defect > tol) {
    if (defect > 10.0 * tol)
      throw std::invalid_argument("hessian_vec: input is not tangent");
    Vt = project_tangent(problem, gram, V); // tCG drift; re-project
  }
  return 2.0 * project_tangent(problem, gram, S.S * Vt);
}

namespace {

Matrix retractGeneric(const SdpProblem &problem, const Matrix &W) {
  const int m = problem.m;
  Vector lambda = Vector::Zero(m);
  const Scalar tol = feasibility_tolerance(problem);
  for (int iter = 0; iter < 20; ++iter) {
    Matrix Z = W;
    for (int i = 0; i < m; ++i)
      if (lambda[i] != 0.0)
        Z += lambda[i] * problem.A[i].applyTo(W);
    Vector F = apply_A_gram(problem, Z) - problem.b;
    if (F.lpNorm<Eigen::Infinity>() <= tol)
      return Z;
    std::vector<Matrix> AZ(m), AW(m);
    for (int i = 0; i < m; ++i) {
      AZ[i] = problem.A[i].applyTo(Z);
      AW[i] = problem.A[i].applyTo(W);
    }
    Matrix J(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        J(i, j) = 2.0 * (AZ[i].array() * AW[j].array()).sum();
    Vector delta = J.fullPivLu().solve(-F);
    if (!delta.allFinite())
      break;
    lambda += delta;
  }
  throw RetractionFailure("generic retraction: Newton did not converge; shrink the step");
}

} // namespace

Matrix retract(const SdpProblem &problem, const Matrix &Y, const Matrix &V) {
  Matrix W = Y + V;
  const auto &st = problem.structure;
  switch (st.kind) {
  case StructureKind::kBlockNorm: {
    for (const auto &blk : st.norm_blocks) {
      auto rows = W.middleRows(blk.first, blk.count);
      const Scalar nrm = rows.norm();
      if (nrm <= 0.0)
        throw RetractionFailure("retract: block collapsed to zero");
      rows *= blk.target / nrm;
    }
    return W;
  }
  case StructureKind::kStiefelSlices: {
    const int d = st.slice_dim;
    for (int k = 0; k * d < problem.n; ++k) {
      // Polar factor of each d x p slice: closest matrix with orthonormal rows.
      Matrix slice = W.middleRows(k * d, d);
      Eigen::JacobiSVD<Matrix> svd(slice, Eigen::ComputeThinU | Eigen::ComputeThinV);
      W.middleRows(k * d, d) = svd.matrixU() * svd.matrixV().transpose();
    }
    return W;
  }
  case StructureKind::kScaleByB: {
    const Scalar nrm = (st.chol_B * W).norm();
    if (nrm <= 0.0)
      throw RetractionFailure("retract: B-norm collapsed to zero");
    return W / nrm;
  }
  case StructureKind::kGeneric:
    return retractGeneric(problem, W);
  }
  throw std::logic_error("retract: unknown structure kind");
}

} // namespace bmsdp
