#include "bmsdp/problem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bmsdp {

namespace {

constexpr Scalar kEps = std::numeric_limits<Scalar>::epsilon();

Matrix gaussian(int rows, int cols, std::mt19937_64 &rng) {
  std::normal_distribution<Scalar> dist(0.0, 1.0);
  Matrix M(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i)
      M(i, j) = dist(rng);
  return M;
}

} // namespace

void SdpProblem::validate() const {
  if (n < 1 || m < 1)
    throw std::invalid_argument("SdpProblem: need n >= 1 and m >= 1");
  if (C.dim() != n)
    throw std::invalid_argument("SdpProblem: cost dimension mismatch");
  if (static_cast<int>(A.size()) != m)
    throw std::invalid_argument("SdpProblem: constraint count mismatch");
  for (const auto &Ai : A)
    if (Ai.dim() != n)
      throw std::invalid_argument("SdpProblem: constraint dimension mismatch");
  if (b.size() != m)
    throw std::invalid_argument("SdpProblem: b has wrong length");
}

void SdpProblem::finalize() {
  validate();
  // Group constraints whose row supports overlap; G is block diagonal
  // over the resulting groups.
  std::vector<int> owner(n, -1);
  std::vector<int> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i)
      i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < m; ++i)
    for (int r : A[i].rowSupport()) {
      if (owner[r] == -1)
        owner[r] = i;
      else
        parent[find(i)] = find(owner[r]);
    }
  support_groups.assign(m, {});
  for (int i = 0; i < m; ++i)
    support_groups[find(i)].push_back(i);
  std::erase_if(support_groups, [](const auto &g) { return g.empty(); });
}

Vector apply_A(const SdpProblem &problem, const Matrix &X) {
  if (X.rows() != problem.n || X.cols() != problem.n)
    throw std::invalid_argument("apply_A: dimension mismatch");
  Vector v(problem.m);
  for (int i = 0; i < problem.m; ++i)
    v[i] = problem.A[i].inner(X);
  return v;
}

Vector apply_A_gram(const SdpProblem &problem, const Matrix &Y) {
  if (Y.rows() != problem.n)
    throw std::invalid_argument("apply_A_gram: dimension mismatch");
  Vector v(problem.m);
  for (int i = 0; i < problem.m; ++i)
    v[i] = problem.A[i].innerGram(Y);
  return v;
}

SymMatrix apply_A_adjoint(const SdpProblem &problem, const Vector &nu) {
  if (nu.size() != problem.m)
    throw std::invalid_argument("apply_A_adjoint: length mismatch");
  SymMatrix S(problem.n);
  for (int i = 0; i < problem.m; ++i)
    if (nu[i] != 0.0)
      S.addScaled(problem.A[i], nu[i]);
  return S;
}

namespace {

SdpProblem buildGenEig(const GenEigFamily &fam) {
  const int n = fam.C.dim();
  if (fam.B.dim() != n)
    throw std::invalid_argument("GenEig: C and B dimensions differ");
  Matrix Bd = fam.B.dense();
  Eigen::LLT<Matrix> llt(Bd);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("GenEig: B is not positive definite");

  SdpProblem P;
  P.n = n;
  P.m = 1;
  P.C = fam.C;
  P.A = {fam.B};
  P.b = Vector::Ones(1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(Bd);
  P.trace_bound = 1.0 / es.eigenvalues()(0);
  const bool b_is_scaled_identity =
      (Bd - Bd(0, 0) * Matrix::Identity(n, n)).norm() <= 1e-14 * Bd.norm();
  P.constant_trace = b_is_scaled_identity;
  P.identity_in_range = b_is_scaled_identity;
  P.structure.kind = StructureKind::kScaleByB;
  P.structure.chol_B = llt.matrixU();
  P.finalize();
  return P;
}

SdpProblem buildTrs(const TrsFamily &fam) {
  const int n = fam.A.dim();
  if (n < 2)
    throw std::invalid_argument("Trs: need n >= 2");
  if (fam.b.size() != n)
    throw std::invalid_argument("Trs: b has wrong length");
  const int N = n + 1;
  Matrix Cd = Matrix::Zero(N, N);
  Cd.topLeftCorner(n, n) = fam.A.dense();
  Cd.topRightCorner(n, 1) = fam.b;
  Cd.bottomLeftCorner(1, n) = fam.b.transpose();
  Cd(n, n) = fam.c;

  SdpProblem P;
  P.n = N;
  P.m = 2;
  P.C = SymMatrix::fromDense(Cd);
  std::vector<SymMatrix::Triplet> t1;
  for (int i = 0; i < n; ++i)
    t1.push_back({i, i, 1.0});
  P.A = {SymMatrix(N, std::move(t1)), SymMatrix(N, {{n, n, 1.0}})};
  P.b = Vector::Ones(2);
  P.trace_bound = 2.0;
  P.constant_trace = true;
  P.identity_in_range = true;
  P.structure.kind = StructureKind::kBlockNorm;
  P.structure.norm_blocks = {{0, n, 1.0}, {n, 1, 1.0}};
  P.finalize();
  return P;
}

SdpProblem buildSpheres(const SpheresFamily &fam) {
  if (fam.sizes.empty())
    throw std::invalid_argument("Spheres: need at least one sphere");
  for (int s : fam.sizes)
    if (s < 1)
      throw std::invalid_argument("Spheres: sizes must be positive");
  const int k = static_cast<int>(fam.sizes.size());
  const int total = std::accumulate(fam.sizes.begin(), fam.sizes.end(), 0);
  const int N = fam.homogeneous ? total : total + 1;
  if (fam.C.dim() != N)
    throw std::invalid_argument("Spheres: cost dimension mismatch with sizes");

  SdpProblem P;
  P.n = N;
  P.m = fam.homogeneous ? k : k + 1;
  P.C = fam.C;
  P.structure.kind = StructureKind::kBlockNorm;
  int row = 0;
  for (int s : fam.sizes) {
    std::vector<SymMatrix::Triplet> ts;
    for (int i = 0; i < s; ++i)
      ts.push_back({row + i, row + i, 1.0});
    P.A.emplace_back(N, std::move(ts));
    P.structure.norm_blocks.push_back({row, s, 1.0});
    row += s;
  }
  if (!fam.homogeneous) {
    P.A.emplace_back(N, std::vector<SymMatrix::Triplet>{{total, total, 1.0}});
    P.structure.norm_blocks.push_back({total, 1, 1.0});
  }
  P.b = Vector::Ones(P.m);
  P.trace_bound = static_cast<Scalar>(P.m);
  P.constant_trace = true;
  P.identity_in_range = true;
  P.finalize();
  return P;
}

SdpProblem buildOrthoCut(const OrthoCutFamily &fam) {
  const int n = fam.C.dim();
  if (fam.d < 1)
    throw std::invalid_argument("OrthoCut: d must be >= 1");
  if (n % fam.d != 0)
    throw std::invalid_argument("OrthoCut: n is not divisible by d");
  const int d = fam.d;
  const int q = n / d;

  SdpProblem P;
  P.n = n;
  P.m = q * d * (d + 1) / 2;
  P.C = fam.C;
  P.b = Vector(P.m);
  int idx = 0;
  for (int k = 0; k < q; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) {
        const int r = k * d + i, c = k * d + j;
        P.A.emplace_back(n, std::vector<SymMatrix::Triplet>{{r, c, 1.0}});
        P.b[idx++] = (i == j) ? 1.0 : 0.0;
      }
  P.trace_bound = static_cast<Scalar>(n);
  P.constant_trace = true;
  P.identity_in_range = true;
  if (d == 1) {
    P.structure.kind = StructureKind::kBlockNorm;
    for (int i = 0; i < n; ++i)
      P.structure.norm_blocks.push_back({i, 1, 1.0});
  } else {
    P.structure.kind = StructureKind::kStiefelSlices;
    P.structure.slice_dim = d;
  }
  P.finalize();
  return P;
}

} // namespace

SdpProblem build_family(const ProblemFamily &family) {
  return std::visit(
      [](const auto &fam) -> SdpProblem {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, GenEigFamily>)
          return buildGenEig(fam);
        else if constexpr (std::is_same_v<T, TrsFamily>)
          return buildTrs(fam);
        else if constexpr (std::is_same_v<T, SpheresFamily>)
          return buildSpheres(fam);
        else
          return buildOrthoCut(fam);
      },
      family);
}

bool has_feasible_construction(const SdpProblem &problem) {
  return problem.structure.kind != StructureKind::kGeneric;
}

Matrix feasible_point(const SdpProblem &problem, int p, std::mt19937_64 &rng) {
  if (p < 1)
    throw std::invalid_argument("feasible_point: p must be >= 1");
  const auto &st = problem.structure;
  switch (st.kind) {
  case StructureKind::kBlockNorm: {
    Matrix Y = gaussian(problem.n, p, rng);
    for (const auto &blk : st.norm_blocks) {
      auto rows = Y.middleRows(blk.first, blk.count);
      const Scalar nrm = rows.norm();
      if (nrm == 0.0)
        throw std::runtime_error("feasible_point: degenerate random block");
      rows *= blk.target / nrm;
    }
    return Y;
  }
  case StructureKind::kStiefelSlices: {
    const int d = st.slice_dim;
    if (p < d)
      throw std::invalid_argument("feasible_point: OrthoCut requires p >= d");
    Matrix Y(problem.n, p);
    for (int k = 0; k * d < problem.n; ++k) {
      Matrix W = gaussian(p, d, rng);
      Eigen::HouseholderQR<Matrix> qr(W);
      Matrix Q = qr.householderQ() * Matrix::Identity(p, d);
      Y.middleRows(k * d, d) = Q.transpose();
    }
    return Y;
  }
  case StructureKind::kScaleByB: {
    Matrix W = gaussian(problem.n, p, rng);
    const Scalar nrm = (st.chol_B * W).norm();
    return W / nrm;
  }
  case StructureKind::kGeneric:
    break;
  }
  throw std::runtime_error("feasible_point: no closed-form construction for generic problems");
}

int numerical_rank(const Matrix &M, Scalar cutoff_scale) {
  if (M.size() == 0)
    return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto &sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0)
    return 0;
  const Scalar scale =
      cutoff_scale > 0.0 ? cutoff_scale : std::max(M.rows(), M.cols()) * kEps;
  const Scalar cutoff = scale * sv(0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff)
      ++r;
  return r;
}

SmoothnessReport check_smoothness(const SdpProblem &problem, int p, int samples,
                                  std::uint64_t seed, const std::vector<Matrix> &supplied) {
  if (samples < 1)
    throw std::invalid_argument("check_smoothness: samples must be >= 1");
  if (supplied.empty() && !has_feasible_construction(problem))
    throw std::runtime_error("check_smoothness: no feasible point available; supply one");
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> dist(0.0, 1.0);
  SmoothnessReport rep;
  auto rank_at = [&](const Matrix &Y) {
    Matrix stacked(problem.m, problem.n * p);
    for (int i = 0; i < problem.m; ++i) {
      Matrix AiY = problem.A[i].applyTo(Y);
      stacked.row(i) = Eigen::Map<Vector>(AiY.data(), AiY.size()).transpose();
    }
    return numerical_rank(stacked);
  };
  for (int s = 0; s < samples; ++s) {
    Matrix Y = supplied.empty() ? feasible_point(problem, p, rng)
                                : supplied[s % supplied.size()];
    rep.observed_ranks.push_back(rank_at(Y));
    // Perturbation within a small ball probes (but cannot certify) the
    // constant-rank condition near the manifold.
    Matrix D(Y.rows(), Y.cols());
    for (int j = 0; j < D.cols(); ++j)
      for (int i = 0; i < D.rows(); ++i)
        D(i, j) = dist(rng);
    rep.observed_ranks.push_back(rank_at(Y + 1e-6 * D / std::max(1.0, D.norm())));
  }
  rep.m_prime = rep.observed_ranks.front();
  rep.constant_rank = std::all_of(rep.observed_ranks.begin(), rep.observed_ranks.end(),
                                  [&](int r) { return r == rep.m_prime; });
  return rep;
}

bool detect_identity_in_range(const SdpProblem &problem) {
  Matrix G(problem.m, problem.m);
  Vector rhs(problem.m);
  for (int i = 0; i < problem.m; ++i) {
    Matrix Ai = problem.A[i].dense();
    rhs[i] = Ai.trace();
    for (int j = 0; j <= i; ++j) {
      G(i, j) = G(j, i) = problem.A[i].inner(problem.A[j].dense());
    }
  }
  Vector nu = G.completeOrthogonalDecomposition().solve(rhs);
  Matrix R = apply_A_adjoint(problem, nu).dense() - Matrix::Identity(problem.n, problem.n);
  return R.norm() <= 1e-10 * std::sqrt(static_cast<Scalar>(problem.n));
}

} // namespace bmsdp
