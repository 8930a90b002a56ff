#pragma once

#include "bmsdp/sym_matrix.hpp"

#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace bmsdp {

/// Hint used by the retraction and feasible-point construction.
/// kBlockNorm covers Trs, Spheres and Max-Cut: each constraint fixes the
/// Frobenius norm of a row slice of Y. kStiefelSlices covers OrthoCut with
/// d >= 2. kScaleByB covers the generalized eigenvalue family.
enum class StructureKind { kGeneric, kBlockNorm, kStiefelSlices, kScaleByB };

struct ProblemStructure {
  StructureKind kind = StructureKind::kGeneric;
  // kBlockNorm: (first row, row count, target Frobenius norm) per constraint.
  struct NormBlock {
    int first;
    int count;
    Scalar target;
  };
  std::vector<NormBlock> norm_blocks;
  // kStiefelSlices
  int slice_dim = 0;
  // kScaleByB: upper Cholesky factor of B, so ||R Y|| is the constraint norm.
  Matrix chol_B;
};

/// Equality-constrained SDP data: min <C, X> s.t. <A_i, X> = b_i, X psd.
struct SdpProblem {
  int n = 0;
  int m = 0;
  SymMatrix C;
  std::vector<SymMatrix> A;
  Vector b;

  std::optional<Scalar> trace_bound; // R = max trace over the feasible set
  bool constant_trace = false;
  std::optional<bool> identity_in_range;

  ProblemStructure structure;

  // Constraint groups with pairwise-disjoint row supports; the Gram matrix
  // is block diagonal over these groups. Computed by finalize().
  std::vector<std::vector<int>> support_groups;

  void finalize();
  void validate() const;

  Scalar costNorm() const { return C.frobeniusNorm(); }
};

/// A(X): component i is <A_i, X>.
Vector apply_A(const SdpProblem &problem, const Matrix &X);

/// Component i is <A_i, Y Y^T>, computed without forming Y Y^T.
Vector apply_A_gram(const SdpProblem &problem, const Matrix &Y);

/// A*(nu) = nu_1 A_1 + ... + nu_m A_m.
SymMatrix apply_A_adjoint(const SdpProblem &problem, const Vector &nu);

struct GenEigFamily {
  SymMatrix C;
  SymMatrix B;
};
struct TrsFamily {
  SymMatrix A;
  Vector b;
  Scalar c = 0.0;
};
struct SpheresFamily {
  SymMatrix C; // over the full lifted dimension
  std::vector<int> sizes;
  bool homogeneous = false;
};
struct OrthoCutFamily {
  SymMatrix C;
  int d = 1;
};

using ProblemFamily = std::variant<GenEigFamily, TrsFamily, SpheresFamily, OrthoCutFamily>;

SdpProblem build_family(const ProblemFamily &family);

/// Closed-form feasible point at rank p for a built-in family; generic
/// problems are rejected. Randomized but fully determined by the generator.
Matrix feasible_point(const SdpProblem &problem, int p, std::mt19937_64 &rng);
bool has_feasible_construction(const SdpProblem &problem);

/// Shared pseudo-rank convention: singular values below
/// max(rows, cols) * eps * sigma_max count as zero.
int numerical_rank(const Matrix &M, Scalar cutoff_scale = -1.0);

struct SmoothnessReport {
  int m_prime = 0;
  bool constant_rank = false;
  std::vector<int> observed_ranks; // one per sample
};

/// Sampling diagnostic for the constant-rank condition on {A_i Y}.
/// Samples feasible points (or uses the supplied ones) and perturbations
/// within a small ball around each.
SmoothnessReport check_smoothness(const SdpProblem &problem, int p, int samples, std::uint64_t seed,
                                  const std::vector<Matrix> &supplied = {});

/// Least-squares test for I_n in the range of A*; residual tolerance
/// 1e-10 * sqrt(n).
bool detect_identity_in_range(const SdpProblem &problem);

} // namespace bmsdp
