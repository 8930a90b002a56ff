#pragma once

#include "bmsdp/rtr.hpp"

#include <string>

namespace bmsdp {

/// Reference results used to ground tests; deliberately simple and slow.
struct OracleResult {
  Scalar f_star = 0.0;
  Scalar error_bar = 0.0; // bound on f_star's error (0 when exact to roundoff)
  std::optional<Matrix> X_star;
  std::string method;
};

/// Smallest generalized eigenvalue of the symmetric-definite pencil (C, B).
OracleResult oracle_geneig(const Matrix &C, const Matrix &B);

/// Global minimum of x^T A x + 2 b^T x + c on the unit sphere, via the dual
/// secular equation with explicit hard-case handling.
OracleResult oracle_trs(const Matrix &A, const Vector &b, Scalar c);
Vector oracle_trs_minimizer(const Matrix &A, const Vector &b, Scalar c);

/// Reference SDP value: solve at p = n + 1 with tight tolerances; at that
/// rank every second-order critical point is globally optimal, and the
/// certificate's gap bound gives the error bar.
OracleResult oracle_sdp_via_escalation(const SdpProblem &problem, std::uint64_t seed = 7);

} // namespace bmsdp
