#pragma once

#include "bmsdp/geometry.hpp"

#include <optional>
#include <string>

namespace bmsdp {

enum class Verdict { CertifiedOptimal, GapBounded, Inconclusive };

std::string to_string(Verdict v);

struct DualCertificate {
  Vector mu;
  Matrix S;
  Scalar sy_norm = 0.0;       // ||S Y||_F
  Scalar lambda_min_S = 0.0;  // certified lower bound on the smallest eigenvalue
  Vector lambda_min_vec;      // approximate bottom eigenvector of S
  std::optional<Scalar> gap_bound; // upper bound on g(Y) - f_star
  Verdict verdict = Verdict::Inconclusive;
  Scalar tol_g = 0.0;
  Scalar tol_H = 0.0;
};

/// Smallest eigenvalue of a symmetric matrix with a certified lower bound.
/// Dense solve for n <= 2000; Lanczos with a residual error bar beyond.
struct EigenPair {
  Scalar value;     // Ritz estimate
  Scalar lower;     // certified lower bound (value minus residual)
  Vector vector;
};
EigenPair smallest_eigenvalue(const Matrix &S, std::uint64_t seed = 12345);

/// Dual certificate at Y. The gap bound uses eps_g = 2 ||S Y|| (grad = 2 S Y)
/// and eps_H = 2 max(0, -lambda_min_S); the sqrt(R) term drops when the
/// identity is in the range of A*.
DualCertificate certify(const SdpProblem &problem, const Matrix &Y, Scalar tol_g, Scalar tol_H);

struct FaceReport {
  int p = 0;        // rank of Y after trimming zero columns
  int dim_face = 0; // dimension of ker L_X
  int delta = 0;    // p(p+1)/2 - m'
  std::optional<int> neg_eig_cap;
  bool deterministic_optimal = false;
};

/// Dimension of the face of the feasible set at X = Y Y^T, via the rank of
/// the map A |-> A(Y A Y^T) on symmetric p x p matrices.
FaceReport face_dimension(const SdpProblem &problem, const Matrix &Y, bool allow_trim = true);

/// True iff {A_i Y} are numerically linearly independent (rank m).
/// Requires the A_i themselves to be independent; errors otherwise, naming
/// the dependent combination.
bool check_nondegeneracy(const SdpProblem &problem, const Matrix &Y);

/// Recovers a sphere-constrained minimizer from a certified TRS factor with
/// p <= 2: intersects the ellipse ||Y_1 z|| = 1 with the line y_2^T z = 1.
/// Among real intersections, picks the lowest lifted cost under the given
/// problem's C, ties broken lexicographically.
Vector extract_trs(const SdpProblem &problem, const Matrix &Y);

struct RankOneExtraction {
  Vector x;
  Scalar residual; // ||Y Y^T - x x^T|| / ||Y Y^T||
};
RankOneExtraction extract_rank_one(const Matrix &Y);

} // namespace bmsdp
