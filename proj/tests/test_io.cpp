#include "bmsdp/json_io.hpp"

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

} // namespace

TEST_CASE("sparse symmetric matrices round-trip bit-exactly") {
  std::mt19937_64 rng(71);
  SymMatrix M = SymMatrix::fromDense(random_sym(5, rng));
  Json j = sym_to_json(M);
  SymMatrix back = sym_from_json(j, "M");
  REQUIRE(back.dim() == M.dim());
  REQUIRE(back.nnz() == M.nnz());
  for (int k = 0; k < M.nnz(); ++k) {
    CHECK(back.triplets()[k].row == M.triplets()[k].row);
    CHECK(back.triplets()[k].col == M.triplets()[k].col);
    CHECK(back.triplets()[k].value == M.triplets()[k].value);
  }
  // serialized triplets are sorted lower-triangle entries
  for (int k = 1; k < M.nnz(); ++k) {
    const auto &a = M.triplets()[k - 1], &b = M.triplets()[k];
    CHECK((a.row < b.row || (a.row == b.row && a.col < b.col)));
    CHECK(b.row >= b.col);
  }
}

TEST_CASE("sym_from_json rejects malformed triplets with the offending path") {
  Json j;
  j["n"] = 3;
  j["triplets"] = Json::array({Json::array({0, 1, 2.0})}); // row < col
  try {
    sym_from_json(j, "C");
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(e.field == "C.triplets[0]");
  }

  Json dup;
  dup["n"] = 3;
  dup["triplets"] = Json::array({Json::array({1, 0, 1.0}), Json::array({1, 0, 2.0})});
  CHECK_THROWS_AS(sym_from_json(dup, "C"), ParseError);
}

TEST_CASE("problems round-trip through JSON with flags and trace bound") {
  std::mt19937_64 rng(72);
  SdpProblem P = build_family(OrthoCutFamily{SymMatrix::fromDense(random_sym(5, rng)), 1});
  Json j = problem_to_json(P);
  SdpProblem back = problem_from_json(j);
  CHECK(back.n == P.n);
  CHECK(back.m == P.m);
  CHECK((back.b - P.b).norm() == 0.0);
  CHECK((back.C.dense() - P.C.dense()).norm() == 0.0);
  for (int i = 0; i < P.m; ++i)
    CHECK((back.A[i].dense() - P.A[i].dense()).norm() == 0.0);
  CHECK(back.trace_bound.has_value());
  CHECK(*back.trace_bound == *P.trace_bound);
  CHECK(back.constant_trace == P.constant_trace);
  CHECK(back.identity_in_range == P.identity_in_range);
  CHECK(!back.support_groups.empty()); // finalize ran on load
}

TEST_CASE("problem_from_json names the field that fails validation") {
  std::mt19937_64 rng(73);
  SdpProblem P = build_family(OrthoCutFamily{SymMatrix::fromDense(random_sym(4, rng)), 1});
  Json j = problem_to_json(P);

  Json wrong_b = j;
  wrong_b["b"] = Json::array({1.0, 1.0}); // length 2 != m
  try {
    problem_from_json(wrong_b);
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(e.field == "b");
  }

  Json no_C = j;
  no_C.erase("C");
  try {
    problem_from_json(no_C);
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(e.field == "C");
  }

  Json bad_R = j;
  bad_R["R"] = -1.0;
  CHECK_THROWS_AS(problem_from_json(bad_R), ParseError);
}

TEST_CASE("factors round-trip bit-exactly in column-major order") {
  std::mt19937_64 rng(74);
  Matrix Y = random_sym(4, rng).leftCols(2);
  Json j = factor_to_json(Y);
  CHECK(j["n"] == 4);
  CHECK(j["p"] == 2);
  CHECK(j["data"][1].get<Scalar>() == Y(1, 0)); // column-major layout
  Matrix back = factor_from_json(j);
  CHECK((back - Y).norm() == 0.0);

  Json short_data = j;
  short_data["data"] = Json::array({1.0, 2.0});
  CHECK_THROWS_AS(factor_from_json(short_data), ParseError);
}

TEST_CASE("certificate and report serialization carries verdicts and bounds") {
  std::mt19937_64 rng(75);
  SdpProblem P = build_family(OrthoCutFamily{SymMatrix::fromDense(random_sym(4, rng)), 1});
  Matrix Y = feasible_point(P, 2, rng);
  DualCertificate cert = certify(P, Y, 1e-8, 1e-8);
  Json j = certificate_to_json(cert);
  CHECK(j["verdict"] == to_string(cert.verdict));
  CHECK(j["sy_norm"].get<Scalar>() == cert.sy_norm);
  CHECK(j["lambda_min_S"].get<Scalar>() == cert.lambda_min_S);
  REQUIRE(cert.gap_bound.has_value());
  CHECK(j["gap_bound"].get<Scalar>() == *cert.gap_bound);

  FaceReport fr = face_dimension(P, Y);
  Json fj = face_report_to_json(fr);
  CHECK(fj["p"] == fr.p);
  CHECK(fj["dim_face"] == fr.dim_face);
  CHECK(fj["delta"] == fr.delta);

  SolveReport rep;
  rep.final_cost = -1.5;
  rep.escalations = {{3, "negative eigenvalue"}};
  rep.certificate = cert;
  Json rj = solve_report_to_json(rep);
  CHECK(rj["final_cost"].get<Scalar>() == -1.5);
  CHECK(rj["escalations"][0]["p"] == 3);
  CHECK(rj["certificate"]["verdict"] == to_string(cert.verdict));
}

TEST_CASE("solve-report JSON is byte-stable across repeated serialization") {
  std::mt19937_64 rng(76);
  SdpProblem P = build_family(OrthoCutFamily{SymMatrix::fromDense(random_sym(5, rng)), 1});
  SolverOptions opts;
  opts.seed = 9;
  auto [Y, rep] = staircase(P, opts);
  CHECK(solve_report_to_json(rep).dump() == solve_report_to_json(rep).dump());
  CHECK(factor_to_json(Y).dump() == factor_to_json(Y).dump());
}
