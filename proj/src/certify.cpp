#include "bmsdp/certify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace bmsdp {

namespace {
constexpr Scalar kEps = std::numeric_limits<Scalar>::epsilon();
}

std::string to_string(Verdict v) {
  switch (v) {
  case Verdict::CertifiedOptimal:
    return "CertifiedOptimal";
  case Verdict::GapBounded:
    return "GapBounded";
  case Verdict::Inconclusive:
    return "Inconclusive";
  }
  return "?";
}

EigenPair smallest_eigenvalue(const Matrix &S, std::uint64_t seed) {
  const int n = static_cast<int>(S.rows());
  if (n <= 2000) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    EigenPair out;
    out.value = es.eigenvalues()(0);
    out.lower = out.value - static_cast<Scalar>(n) * kEps * S.norm();
    out.vector = es.eigenvectors().col(0);
    return out;
  }
  // Lanczos with full reorthogonalization; the Ritz value minus its
  // residual norm is a certified lower bound.
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> dist(0.0, 1.0);
  const int iters = std::min(n, 100);
  Matrix V(n, iters);
  Vector alpha(iters), beta(iters);
  Vector v(n);
  for (int i = 0; i < n; ++i)
    v[i] = dist(rng);
  v.normalize();
  int k = 0;
  Vector w;
  for (; k < iters; ++k) {
    V.col(k) = v;
    w = S * v;
    alpha[k] = v.dot(w);
    w -= alpha[k] * v;
    if (k > 0)
      w -= beta[k - 1] * V.col(k - 1);
    w -= V.leftCols(k + 1) * (V.leftCols(k + 1).transpose() * w);
    beta[k] = w.norm();
    if (beta[k] < 1e-14)
      break;
    v = w / beta[k];
  }
  const int kk = std::min(k + 1, iters);
  Matrix T = Matrix::Zero(kk, kk);
  for (int i = 0; i < kk; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < kk)
      T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(T);
  EigenPair out;
  out.value = es.eigenvalues()(0);
  out.vector = V.leftCols(kk) * es.eigenvectors().col(0);
  out.vector.normalize();
  out.lower = out.value - (S * out.vector - out.value * out.vector).norm();
  return out;
}

DualCertificate certify(const SdpProblem &problem, const Matrix &Y, Scalar tol_g, Scalar tol_H) {
  GramSystem gram(problem, Y);
  SMatrix sm = s_matrix(problem, gram);
  DualCertificate cert;
  cert.mu = sm.mu;
  cert.S = sm.S;
  cert.tol_g = tol_g;
  cert.tol_H = tol_H;
  cert.sy_norm = (sm.S * Y).norm();
  EigenPair ep = smallest_eigenvalue(sm.S);
  cert.lambda_min_S = ep.lower;
  cert.lambda_min_vec = ep.vector;

  if (problem.trace_bound) {
    const Scalar R = *problem.trace_bound;
    const Scalar eps_g = 2.0 * cert.sy_norm;
    const Scalar eps_H = 2.0 * std::max(0.0, -cert.lambda_min_S);
    const bool id_in_range = problem.identity_in_range.value_or(false);
    // twice the gap is at most eps_H * R + eps_g * sqrt(R); the sqrt term
    // drops when the identity lies in the range of the adjoint
    cert.gap_bound = 0.5 * (eps_H * R + (id_in_range ? 0.0 : eps_g * std::sqrt(R)));
  }

  if (cert.sy_norm <= tol_g && cert.lambda_min_S >= -tol_H)
    cert.verdict = Verdict::CertifiedOptimal;
  else if (cert.gap_bound)
    cert.verdict = Verdict::GapBounded;
  else
    cert.verdict = Verdict::Inconclusive;
  return cert;
}

namespace {

// Trim Y to full column rank without changing Y Y^T.
Matrix trim_factor(const Matrix &Y) {
  Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeThinU);
  const auto &sv = svd.singularValues();
  const Scalar cutoff =
      static_cast<Scalar>(std::max(Y.rows(), Y.cols())) * kEps * (sv.size() ? sv(0) : 0.0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff)
      ++r;
  if (r == 0)
    throw std::invalid_argument("face_dimension: zero factor");
  return svd.matrixU().leftCols(r) * sv.head(r).asDiagonal();
}

} // namespace

FaceReport face_dimension(const SdpProblem &problem, const Matrix &Y, bool allow_trim) {
  const int p_in = static_cast<int>(Y.cols());
  Matrix Yt = trim_factor(Y);
  const int p = static_cast<int>(Yt.cols());
  if (p < p_in && !allow_trim)
    throw std::invalid_argument("face_dimension: factor is rank deficient and trimming is off");

  // Rows of L: vech(Y^T A_i Y) with off-diagonal entries weighted by sqrt(2)
  // so the symmetric-space geometry matches the Frobenius inner product.
  const int dim_sym = p * (p + 1) / 2;
  Matrix L(problem.m, dim_sym);
  for (int i = 0; i < problem.m; ++i) {
    Matrix Mi = Yt.transpose() * problem.A[i].applyTo(Yt);
    Mi = 0.5 * (Mi + Mi.transpose());
    int col = 0;
    for (int a = 0; a < p; ++a)
      for (int c = 0; c <= a; ++c)
        L(i, col++) = (a == c) ? Mi(a, a) : std::sqrt(2.0) * Mi(a, c);
  }
  const int rank_L = numerical_rank(L);

  GramSystem gram(problem, Yt);
  const int m_prime = gram.mPrime();

  FaceReport rep;
  rep.p = p;
  rep.dim_face = dim_sym - rank_L;
  rep.delta = dim_sym - m_prime;
  if (rep.dim_face < std::max(0, rep.delta))
    throw std::logic_error("face_dimension: lower bound violated (numerical rank trouble)");
  if (p == p_in)
    rep.neg_eig_cap = (rep.dim_face - rep.delta) / p;
  rep.deterministic_optimal = rep.dim_face < rep.delta + p;
  return rep;
}

bool check_nondegeneracy(const SdpProblem &problem, const Matrix &Y) {
  // Precondition: the A_i are linearly independent as matrices.
  const int m = problem.m;
  Matrix G(m, m);
  for (int i = 0; i < m; ++i) {
    Matrix Ai = problem.A[i].dense();
    for (int j = 0; j <= i; ++j)
      G(i, j) = G(j, i) = problem.A[j].inner(Ai);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  const Scalar cutoff = m * kEps * es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues()(0) <= cutoff) {
    std::ostringstream msg;
    msg << "check_nondegeneracy: constraint matrices are dependent; combination:";
    Vector null = es.eigenvectors().col(0);
    for (int i = 0; i < m; ++i)
      if (std::abs(null[i]) > 1e-8)
        msg << " " << null[i] << "*A_" << i;
    throw std::invalid_argument(msg.str());
  }
  GramSystem gram(problem, Y);
  return gram.mPrime() == m;
}

Vector extract_trs(const SdpProblem &problem, const Matrix &Y) {
  const int N = static_cast<int>(Y.rows());
  const int p = static_cast<int>(Y.cols());
  if (N < 2 || p < 1 || p > 2)
    throw std::invalid_argument("extract_trs: expected an (n+1) x p factor with p <= 2");
  if (problem.n != N)
    throw std::invalid_argument("extract_trs: factor does not match problem dimension");
  const int n = N - 1;
  const Matrix Y1 = Y.topRows(n);
  const Vector y2 = Y.row(n).transpose();
  const Scalar y2n2 = y2.squaredNorm();
  if (y2n2 <= 0.0)
    throw std::invalid_argument("extract_trs: last row of Y vanishes");

  std::vector<Vector> candidates;
  const Vector z0 = y2 / y2n2; // y_2^T z0 = 1
  if (p == 1) {
    candidates.push_back(Y1 * z0);
  } else {
    // Solve ||Y_1 z||^2 = 1 on the line y_2^T z = 1: z = z0 + s u.
    Vector u(2);
    u << -y2[1], y2[0];
    u.normalize();
    const Vector a = Y1 * z0, d = Y1 * u;
    const Scalar qa = d.squaredNorm();
    const Scalar qb = 2.0 * a.dot(d);
    const Scalar qc = a.squaredNorm() - 1.0;
    if (qa <= 1e-12 * std::max(1.0, Y1.squaredNorm())) {
      // Y_1 u vanishes: Y has numerical rank 1 and a is the solution.
      candidates.push_back(a);
    } else {
      Scalar disc = qb * qb - 4.0 * qa * qc;
      const Scalar scale = qb * qb + 4.0 * std::abs(qa * qc);
      if (disc < 0.0 && disc >= -1e-9 * std::max(1.0, scale))
        disc = 0.0;
      if (disc < 0.0)
        throw std::runtime_error(
            "extract_trs: no real intersection; factor not feasible/optimal to tolerance");
      const Scalar rt = std::sqrt(disc);
      for (Scalar s : {(-qb + rt) / (2.0 * qa), (-qb - rt) / (2.0 * qa)})
        candidates.push_back(a + s * d);
    }
  }
  const Matrix Cd = problem.C.dense();
  auto lifted_cost = [&](const Vector &x) {
    Vector w(N);
    w.head(n) = x;
    w[n] = 1.0;
    return w.dot(Cd * w);
  };
  Vector best = candidates.front();
  Scalar best_cost = lifted_cost(best);
  for (size_t i = 1; i < candidates.size(); ++i) {
    const Scalar ci = lifted_cost(candidates[i]);
    if (ci < best_cost - 1e-12 * (1.0 + std::abs(best_cost))) {
      best = candidates[i];
      best_cost = ci;
    } else if (std::abs(ci - best_cost) <= 1e-12 * (1.0 + std::abs(best_cost))) {
      // Tie: lexicographic sign convention.
      for (int j = 0; j < best.size(); ++j) {
        if (candidates[i][j] == best[j])
          continue;
        if (candidates[i][j] > best[j]) {
          best = candidates[i];
          best_cost = ci;
        }
        break;
      }
    }
  }
  return best;
}

RankOneExtraction extract_rank_one(const Matrix &Y) {
  Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeThinU);
  const auto &sv = svd.singularValues();
  RankOneExtraction out;
  out.x = sv(0) * svd.matrixU().col(0);
  Scalar num = 0.0, den = 0.0;
  for (int i = 0; i < sv.size(); ++i) {
    const Scalar s4 = sv(i) * sv(i) * sv(i) * sv(i);
    den += s4;
    if (i > 0)
      num += s4;
  }
  out.residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
  return out;
}

} // namespace bmsdp
