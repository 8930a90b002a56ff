#include "bmsdp/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace bmsdp {

OracleResult oracle_geneig(const Matrix &C, const Matrix &B) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(C, B);
  if (es.info() != Eigen::Success)
    throw std::invalid_argument("oracle_geneig: B is not positive definite");
  OracleResult out;
  out.f_star = es.eigenvalues()(0);
  Vector x = es.eigenvectors().col(0); // normalized so x^T B x = 1
  out.X_star = x * x.transpose();
  out.method = "dense generalized eigensolver";
  return out;
}

Vector oracle_trs_minimizer(const Matrix &A, const Vector &b, Scalar c) {
  (void)c;
  const int n = static_cast<int>(A.rows());
  if (n < 2 || b.size() != n)
    throw std::invalid_argument("oracle_trs: bad dimensions");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()));
  const Vector lam = es.eigenvalues();
  const Matrix Q = es.eigenvectors();
  const Vector bt = Q.transpose() * b;
  const Scalar lam1 = lam(0);
  const Scalar eig_tol = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  const Scalar b_tol = 1e-11 * std::max(1.0, b.norm());

  // x(nu) = -sum_i bt_i / (lam_i + nu) q_i over the non-degenerate part.
  auto regular_part = [&](Scalar nu, bool skip_bottom) {
    Vector xt = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (skip_bottom && lam(i) <= lam1 + eig_tol)
        continue;
      xt[i] = -bt[i] / (lam(i) + nu);
    }
    return xt;
  };

  bool bottom_coupled = false;
  for (int i = 0; i < n; ++i)
    if (lam(i) <= lam1 + eig_tol && std::abs(bt[i]) > b_tol)
      bottom_coupled = true;

  if (!bottom_coupled) {
    const Vector xt = regular_part(-lam1, true);
    const Scalar s2 = xt.squaredNorm();
    if (s2 <= 1.0) {
      // Hard case: nu = -lam1, pad with a bottom eigenvector.
      Vector x = Q * xt + std::sqrt(std::max(0.0, 1.0 - s2)) * Q.col(0);
      return x;
    }
  }

  // Secular equation: ||x(nu)|| = 1 on (-lam1, infinity); bisection on the
  // monotone map nu -> 1/||x(nu)|| - 1.
  Scalar lo = -lam1;
  Scalar hi = -lam1 + b.norm() + 1.0;
  for (int it = 0; it < 200; ++it) {
    const Scalar mid = 0.5 * (lo + hi);
    const Scalar nrm = regular_part(mid, false).norm();
    if (nrm > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return Q * regular_part(0.5 * (lo + hi), false);
}

OracleResult oracle_trs(const Matrix &A, const Vector &b, Scalar c) {
  const Vector x = oracle_trs_minimizer(A, b, c);
  OracleResult out;
  out.f_star = x.dot(A * x) + 2.0 * b.dot(x) + c;
  const int n = static_cast<int>(A.rows());
  Matrix X = Matrix::Zero(n + 1, n + 1);
  X.topLeftCorner(n, n) = x * x.transpose();
  X.topRightCorner(n, 1) = x;
  X.bottomLeftCorner(1, n) = x.transpose();
  X(n, n) = 1.0;
  out.X_star = X;
  out.method = "TRS secular equation with hard-case handling";
  return out;
}

OracleResult oracle_sdp_via_escalation(const SdpProblem &problem, std::uint64_t seed) {
  if (problem.n > 64)
    throw std::invalid_argument("oracle_sdp_via_escalation: capped at n <= 64");
  if (!problem.trace_bound)
    throw std::invalid_argument("oracle_sdp_via_escalation: needs a known trace bound R");
  SolverOptions opts;
  opts.seed = seed;
  opts.eps_g = 1e-10 * (1.0 + problem.costNorm());
  opts.eps_H = 1e-8 * (1.0 + problem.costNorm());
  opts.p_schedule = {problem.n + 1};
  auto [Y, rep] = staircase(problem, opts);
  if (!rep.certificate)
    throw std::runtime_error("oracle_sdp_via_escalation: solver returned no certificate");
  OracleResult out;
  out.f_star = rep.final_cost;
  // The gap bound controls 2 (g - f*).
  out.error_bar = rep.certificate->gap_bound.value_or(0.0);
  out.X_star = Y * Y.transpose();
  out.method = "RTR at p = n + 1 with tight tolerances";
  return out;
}

} // namespace bmsdp
