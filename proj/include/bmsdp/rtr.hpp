#pragma once

#include "bmsdp/certify.hpp"

#include <optional>
#include <utility>

namespace bmsdp {

struct SolverOptions {
  Scalar eps_g = -1.0; // < 0 means default 1e-8 * (1 + ||C||_F)
  Scalar eps_H = -1.0; // < 0 means default 1e-6 * (1 + ||C||_F)
  int max_outer = 10000;
  Scalar tr_radius_init = -1.0; // < 0 means ||Y0|| / 8
  Scalar tr_radius_max = -1.0;  // < 0 means 4 ||Y0||
  int tcg_max = -1;             // < 0 means dim M
  std::uint64_t seed = 0;
  std::vector<int> p_schedule; // empty means "auto"

  Scalar epsG(const SdpProblem &problem) const {
    return eps_g > 0.0 ? eps_g : 1e-8 * (1.0 + problem.costNorm());
  }
  Scalar epsH(const SdpProblem &problem) const {
    return eps_H > 0.0 ? eps_H : 1e-6 * (1.0 + problem.costNorm());
  }
};

struct SolveReport {
  Scalar final_cost = 0.0;
  Scalar grad_norm = 0.0;
  Scalar hess_min_eig_estimate = 0.0;
  int p_used = 0;
  int rank_Y = 0;
  int outer_iters = 0;
  int tcg_iters_total = 0;
  std::vector<std::pair<int, std::string>> escalations; // (new p, reason)
  bool success = false;
  Scalar wall_time = 0.0;
  std::optional<DualCertificate> certificate;
};

/// Smallest Rayleigh quotient of the Riemannian Hessian over the tangent
/// space at Y, with the attaining direction. Dense assembly when np <= 400,
/// randomized Lanczos (50 iterations, 3 restarts) beyond.
std::pair<Scalar, Matrix> hessian_min_eig(const SdpProblem &problem, const GramSystem &gram,
                                          const SMatrix &S, std::mt19937_64 &rng);

/// Riemannian trust-region method with Steihaug-Toint truncated CG at a
/// fixed rank. Returns the final iterate and a report (no certificate).
std::pair<Matrix, SolveReport> rtr(const SdpProblem &problem, const Matrix &Y0,
                                   const SolverOptions &opts);

/// If Y is column-rank deficient and lambda_min(S) < -eps_H / 2, returns
/// the escape direction x z^T (unit bottom eigenvector of S times a unit
/// null vector of Y^T); its Hessian quadratic form equals 2 lambda_min(S).
std::optional<Matrix> escape_direction(const Matrix &Y, const Matrix &S, Scalar eps_H);

/// [Y | 0]: one extra zero column; preserves Y Y^T, cost and S exactly.
Matrix escalate(const Matrix &Y);

/// Staircase: solve at p0 = pataki_bound(m') + 1 (auto schedule), certify,
/// escalate along [Y | 0] plus the escape direction while the certificate
/// fails, hard stop at p = n + 1.
std::pair<Matrix, SolveReport> staircase(const SdpProblem &problem, const SolverOptions &opts,
                                         const std::optional<Matrix> &Y0 = std::nullopt);

} // namespace bmsdp
