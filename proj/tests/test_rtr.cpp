#include "bmsdp/oracle.hpp"
#include "bmsdp/rtr.hpp"

#include <doctest.h>

#include <random>

using namespace bmsdp;

namespace {

Matrix random_sym(int n, std::mt19937_64 &rng) {
  std::normal_distribution<Scalar> dist(0.0, 1.0);
  Matrix M(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      M(i, j) = dist(rng);
  return 0.5 * (M + M.transpose());
}

Matrix cycle_laplacian(int n) {
  Matrix W = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    W(i, (i + 1) % n) = W((i + 1) % n, i) = 1.0;
  return Matrix(W.rowwise().sum().asDiagonal()) - W;
}

} // namespace

TEST_CASE("RTR at rank 1 solves the smallest-eigenvalue problem") {
  Matrix C = Vector::LinSpaced(3, 1.0, 3.0).asDiagonal();
  SdpProblem P = build_family(GenEigFamily{SymMatrix::fromDense(C),
                                           SymMatrix::identity(3)});
  std::mt19937_64 rng(51);
  SolverOptions opts;
  auto [Y, rep] = rtr(P, feasible_point(P, 1, rng), opts);
  CHECK(rep.success);
  CHECK(rep.final_cost == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(rep.grad_norm <= opts.epsG(P));
  CHECK(rep.hess_min_eig_estimate >= -opts.epsH(P));
  CHECK(feasibility_residual(P, Y) <= feasibility_tolerance(P));
}

TEST_CASE("RTR accepts an already-critical start for pure-constraint costs") {
  std::mt19937_64 rng(52);
  std::normal_distribution<Scalar> dist(0.0, 1.0);
  SdpProblem P = build_family(OrthoCutFamily{SymMatrix::fromDense(random_sym(5, rng)), 1});
  Vector nu(5);
  for (int i = 0; i < 5; ++i)
    nu[i] = dist(rng);
  P.C = apply_A_adjoint(P, nu);
  Matrix Y0 = feasible_point(P, 2, rng);
  SolverOptions opts;
  auto [Y, rep] = rtr(P, Y0, opts);
  CHECK(rep.success);
  CHECK(rep.outer_iters <= 1);
  CHECK((Y - Y0).norm() == 0.0);
  CHECK(rep.final_cost == doctest::Approx(nu.dot(P.b)).epsilon(1e-12));
}

TEST_CASE("RTR on a cut problem matches the escalation reference at moderate rank") {
  Matrix L = cycle_laplacian(8);
  SdpProblem P = build_family(OrthoCutFamily{SymMatrix::fromDense(Matrix(-0.25 * L)), 1});
  OracleResult ref = oracle_sdp_via_escalation(P, 3);
  std::mt19937_64 rng(53);
  SolverOptions opts;
  auto [Y, rep] = rtr(P, feasible_point(P, 3, rng), opts);
  CHECK(rep.success);
  CHECK(std::abs(rep.final_cost - ref.f_star) <= ref.error_bar + 1e-6);
}

TEST_CASE("escape direction: absent for PSD certificates and full-rank factors") {
  std::mt19937_64 rng(54);
  Matrix Y = feasible_point(
      build_family(OrthoCutFamily{SymMatrix::identity(4), 1}), 2, rng);
  // PSD S: nothing to escape from
  CHECK_FALSE(escape_direction(Y, Matrix::Identity(4, 4), 1e-6).has_value());
  // full-rank Y: no null direction even with a negative eigenvalue
  Matrix S = Matrix::Identity(4, 4);
  S(0, 0) = -1.0;
  CHECK_FALSE(escape_direction(Y, S, 1e-6).has_value());
}

TEST_CASE("escape direction on the planted cycle saddle") {
  // negated Laplacian of the 4-cycle; the all-ones column is critical
  Matrix C = -cycle_laplacian(4);
  SdpProblem P = build_family(OrthoCutFamily{SymMatrix::fromDense(C), 1});
  Matrix Y(4, 2);
  Y << 1, 0, 1, 0, 1, 0, 1, 0;
  GramSystem gram(P, Y);
  SMatrix sm = s_matrix(P, gram);
  CHECK(riemannian_gradient(sm, Y).norm() <= 1e-13);
  // S = C here (mu = 0), so lambda_min(S) = -lambda_max(L) = -4
  EigenPair ep = smallest_eigenvalue(sm.S);
  CHECK(ep.value == doctest::Approx(-4.0).epsilon(1e-12));

  auto V = escape_direction(Y, sm.S, 1e-6);
  REQUIRE(V.has_value());
  CHECK(V->norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tangency_residual(gram, *V) <= 1e-12);
  Matrix HV = hessian_vec(P, gram, sm, *V);
  const Scalar quad = (V->array() * HV.array()).sum();
  CHECK(quad == doctest::Approx(2.0 * ep.value).epsilon(1e-10));

  // the quadratic form along the escape direction is the most negative one
  // over the rank-one slab x z^T with z the null direction of Y^T
  Vector z(2);
  z << 0.0, 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sm.S);
  for (int k = 0; k < 4; ++k) {
    Matrix W = es.eigenvectors().col(k) * z.transpose();
    Matrix HW = hessian_vec(P, gram, sm, W);
    CHECK((W.array() * HW.array()).sum() >= quad - 1e-10);
  }
}

TEST_CASE("escalation preserves the product, cost and S matrix exactly") {
  std::mt19937_64 rng(55);
  SdpProblem P = build_family(OrthoCutFamily{SymMatrix::fromDense(random_sym(5, rng)), 1});
  Matrix Y = feasible_point(P, 2, rng);
  Matrix Yup = escalate(Y);
  CHECK(Yup.cols() == 3);
  CHECK((Yup * Yup.transpose() - Y * Y.transpose()).norm() == 0.0);
  CHECK(cost(P, Yup) == cost(P, Y));
  GramSystem g1(P, Y), g2(P, Yup);
  CHECK((s_matrix(P, g1).S - s_matrix(P, g2).S).norm() <= 1e-13);
}

TEST_CASE("escalating from a suboptimal critical point strictly decreases the cost") {
  Matrix C = -cycle_laplacian(4);
  SdpProblem P = build_family(OrthoCutFamily{SymMatrix::fromDense(C), 1});
  Matrix Y(4, 2);
  Y << 1, 0, 1, 0, 1, 0, 1, 0;
  const Scalar g0 = cost(P, Y);
  SolverOptions opts;
  opts.seed = 5;
  auto [Y2, rep] = rtr(P, escalate(Y), opts);
  CHECK(rep.success);
  CHECK(rep.final_cost < g0 - 1.0); // escapes the saddle, not a micro-step
  OracleResult ref = oracle_sdp_via_escalation(P, 9);
  CHECK(std::abs(rep.final_cost - ref.f_star) <= ref.error_bar + 1e-6);
}

TEST_CASE("staircase certifies the smallest-eigenvalue problem without escalating") {
  std::mt19937_64 rng(56);
  Matrix Cd = random_sym(5, rng);
  Matrix W = random_sym(5, rng);
  Matrix B = W * W.transpose() + Matrix::Identity(5, 5);
  SdpProblem P = build_family(GenEigFamily{SymMatrix::fromDense(Cd), SymMatrix::fromDense(B)});
  SolverOptions opts;
  opts.seed = 8;
  auto [Y, rep] = staircase(P, opts);
  CHECK(rep.success);
  REQUIRE(rep.certificate.has_value());
  CHECK(rep.certificate->verdict == Verdict::CertifiedOptimal);
  CHECK(rep.escalations.empty());
  CHECK(rep.p_used == 2); // Pataki bound for m' = 1, plus one
  OracleResult ref = oracle_geneig(Cd, B);
  CHECK(std::abs(rep.final_cost - ref.f_star) <= 1e-7 * (1.0 + std::abs(ref.f_star)));
}

TEST_CASE("staircase escalates away from a planted rank-1 saddle and certifies") {
  // sphere quadratic with a strict suboptimal local minimum at (1, 0):
  // A = diag(-1, 1), b = (0.1, 0); global optimum near (-1, 0)
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = -1.0;
  A(1, 1) = 1.0;
  Vector b(2);
  b << 0.1, 0.0;
  SdpProblem P = build_family(TrsFamily{SymMatrix::fromDense(A), b, 0.0});
  Matrix Y0(3, 1);
  Y0 << 1.0, 0.0, 1.0; // the suboptimal local minimum, lifted
  SolverOptions opts;
  opts.seed = 13;
  opts.p_schedule = {1, 2, 3, 4};
  auto [Y, rep] = staircase(P, opts, Y0);
  CHECK(rep.success);
  REQUIRE(rep.certificate.has_value());
  CHECK(rep.certificate->verdict == Verdict::CertifiedOptimal);
  CHECK(!rep.escalations.empty());
  OracleResult ref = oracle_trs(A, b, 0.0);
  CHECK(std::abs(rep.final_cost - ref.f_star) <= 1e-6 * (1.0 + std::abs(ref.f_star)));
}

TEST_CASE("staircase on cut problems matches the reference value") {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 3; ++trial) {
    SdpProblem P = build_family(
        OrthoCutFamily{SymMatrix::fromDense(random_sym(6, rng)), trial == 2 ? 2 : 1});
    SolverOptions opts;
    opts.seed = 100 + trial;
    auto [Y, rep] = staircase(P, opts);
    CHECK(rep.success);
    REQUIRE(rep.certificate.has_value());
    OracleResult ref = oracle_sdp_via_escalation(P, 200 + trial);
    CHECK(std::abs(rep.final_cost - ref.f_star) <= ref.error_bar + 1e-6);
  }
}

TEST_CASE("solver runs are deterministic for a fixed seed") {
  std::mt19937_64 rng(58);
  SdpProblem P = build_family(OrthoCutFamily{SymMatrix::fromDense(random_sym(7, rng)), 1});
  SolverOptions opts;
  opts.seed = 77;
  auto [Y1, r1] = staircase(P, opts);
  auto [Y2, r2] = staircase(P, opts);
  CHECK((Y1 - Y2).norm() == 0.0);
  CHECK(r1.final_cost == r2.final_cost);
  CHECK(r1.outer_iters == r2.outer_iters);
  CHECK(r1.tcg_iters_total == r2.tcg_iters_total);
  CHECK(r1.escalations.size() == r2.escalations.size());
}

TEST_CASE("Hessian minimum eigenvalue: dense assembly vs a random probe bound") {
  std::mt19937_64 rng(59);
  SdpProblem P = build_family(OrthoCutFamily{SymMatrix::fromDense(random_sym(6, rng)), 1});
  Matrix Y = feasible_point(P, 2, rng);
  GramSystem gram(P, Y);
  SMatrix sm = s_matrix(P, gram);
  auto [lam, V] = hessian_min_eig(P, gram, sm, rng);
  // the attaining direction is tangent and achieves its Rayleigh quotient
  CHECK(tangency_residual(gram, V) <= 1e-10 * (1.0 + V.norm()));
  Matrix HV = hessian_vec(P, gram, sm, V);
  CHECK((V.array() * HV.array()).sum() / V.squaredNorm() ==
        doctest::Approx(lam).epsilon(1e-9));
  // no random tangent direction beats it
  for (int trial = 0; trial < 10; ++trial) {
    Matrix W = project_tangent(P, gram, Matrix::Random(6, 2));
    Matrix HW = hessian_vec(P, gram, sm, W);
    CHECK((W.array() * HW.array()).sum() / W.squaredNorm() >= lam - 1e-9);
  }
}
