#include "bmsdp/json_io.hpp"

namespace bmsdp {

Json sym_to_json(const SymMatrix &M) {
  Json j;
  j["n"] = M.dim();
  Json trips = Json::array();
  // Triplets are kept sorted by (row, col) in SymMatrix.
  for (const auto &t : M.triplets())
    trips.push_back({t.row, t.col, t.value});
  j["triplets"] = std::move(trips);
  return j;
}

SymMatrix sym_from_json(const Json &j, const std::string &path) {
  if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer())
    throw ParseError(path + ".n", "expected an integer dimension");
  const int n = j["n"].get<int>();
  std::vector<SymMatrix::Triplet> ts;
  if (j.contains("triplets")) {
    if (!j["triplets"].is_array())
      throw ParseError(path + ".triplets", "expected an array");
    for (size_t k = 0; k < j["triplets"].size(); ++k) {
      const auto &e = j["triplets"][k];
      const std::string ep = path + ".triplets[" + std::to_string(k) + "]";
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
          !e[1].is_number_integer() || !e[2].is_number())
        throw ParseError(ep, "expected [row, col, value]");
      const int r = e[0].get<int>(), c = e[1].get<int>();
      if (r < c)
        throw ParseError(ep, "expected row >= col");
      if (r < 0 || r >= n)
        throw ParseError(ep, "index out of range");
      ts.push_back({r, c, e[2].get<Scalar>()});
    }
  }
  try {
    return SymMatrix(n, std::move(ts));
  } catch (const std::exception &e) {
    throw ParseError(path, e.what());
  }
}

Json problem_to_json(const SdpProblem &problem) {
  Json j;
  j["n"] = problem.n;
  j["m"] = problem.m;
  j["b"] = std::vector<Scalar>(problem.b.data(), problem.b.data() + problem.b.size());
  j["C"] = sym_to_json(problem.C);
  Json A = Json::array();
  for (const auto &Ai : problem.A)
    A.push_back(sym_to_json(Ai));
  j["A"] = std::move(A);
  if (problem.trace_bound)
    j["R"] = *problem.trace_bound;
  Json flags;
  flags["constant_trace"] = problem.constant_trace;
  if (problem.identity_in_range)
    flags["identity_in_range"] = *problem.identity_in_range;
  j["flags"] = std::move(flags);
  return j;
}

SdpProblem problem_from_json(const Json &j) {
  SdpProblem P;
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw ParseError("n", "expected an integer");
  if (!j.contains("m") || !j["m"].is_number_integer())
    throw ParseError("m", "expected an integer");
  P.n = j["n"].get<int>();
  P.m = j["m"].get<int>();
  if (!j.contains("C"))
    throw ParseError("C", "missing");
  P.C = sym_from_json(j["C"], "C");
  if (!j.contains("A") || !j["A"].is_array())
    throw ParseError("A", "expected an array of sparse symmetric matrices");
  for (size_t i = 0; i < j["A"].size(); ++i)
    P.A.push_back(sym_from_json(j["A"][i], "A[" + std::to_string(i) + "]"));
  if (!j.contains("b") || !j["b"].is_array())
    throw ParseError("b", "expected an array");
  if (static_cast<int>(j["b"].size()) != P.m)
    throw ParseError("b", "length does not match m");
  P.b = Vector(P.m);
  for (int i = 0; i < P.m; ++i) {
    if (!j["b"][i].is_number())
      throw ParseError("b[" + std::to_string(i) + "]", "expected a number");
    P.b[i] = j["b"][i].get<Scalar>();
  }
  if (j.contains("R")) {
    if (!j["R"].is_number() || j["R"].get<Scalar>() < 0.0)
      throw ParseError("R", "expected a nonnegative number");
    P.trace_bound = j["R"].get<Scalar>();
  }
  if (j.contains("flags")) {
    const auto &f = j["flags"];
    if (f.contains("constant_trace"))
      P.constant_trace = f["constant_trace"].get<bool>();
    if (f.contains("identity_in_range"))
      P.identity_in_range = f["identity_in_range"].get<bool>();
  }
  try {
    P.finalize();
  } catch (const std::exception &e) {
    throw ParseError("(problem)", e.what());
  }
  return P;
}

Json factor_to_json(const Matrix &Y) {
  Json j;
  j["n"] = static_cast<int>(Y.rows());
  j["p"] = static_cast<int>(Y.cols());
  j["data"] = std::vector<Scalar>(Y.data(), Y.data() + Y.size()); // column-major
  return j;
}

Matrix factor_from_json(const Json &j) {
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw ParseError("factor.n", "expected an integer");
  if (!j.contains("p") || !j["p"].is_number_integer())
    throw ParseError("factor.p", "expected an integer");
  const int n = j["n"].get<int>(), p = j["p"].get<int>();
  if (n < 1 || p < 1)
    throw ParseError("factor", "n and p must be positive");
  if (!j.contains("data") || !j["data"].is_array() ||
      static_cast<int>(j["data"].size()) != n * p)
    throw ParseError("factor.data", "expected n*p column-major values");
  Matrix Y(n, p);
  for (int k = 0; k < n * p; ++k)
    Y.data()[k] = j["data"][k].get<Scalar>();
  return Y;
}

Json certificate_to_json(const DualCertificate &cert) {
  Json j;
  j["mu"] = std::vector<Scalar>(cert.mu.data(), cert.mu.data() + cert.mu.size());
  j["S"] = sym_to_json(SymMatrix::fromDense(cert.S));
  j["sy_norm"] = cert.sy_norm;
  j["lambda_min_S"] = cert.lambda_min_S;
  if (cert.gap_bound)
    j["gap_bound"] = *cert.gap_bound;
  else
    j["gap_bound"] = "unknown";
  j["verdict"] = to_string(cert.verdict);
  j["tol_g"] = cert.tol_g;
  j["tol_H"] = cert.tol_H;
  return j;
}

Json face_report_to_json(const FaceReport &rep) {
  Json j;
  j["p"] = rep.p;
  j["dim_face"] = rep.dim_face;
  j["delta"] = rep.delta;
  if (rep.neg_eig_cap)
    j["neg_eig_cap"] = *rep.neg_eig_cap;
  else
    j["neg_eig_cap"] = "not applicable";
  j["deterministic_optimal"] = rep.deterministic_optimal;
  return j;
}

Json solve_report_to_json(const SolveReport &rep) {
  Json j;
  j["final_cost"] = rep.final_cost;
  j["grad_norm"] = rep.grad_norm;
  j["hess_min_eig_estimate"] = rep.hess_min_eig_estimate;
  j["p_used"] = rep.p_used;
  j["rank_Y"] = rep.rank_Y;
  j["outer_iters"] = rep.outer_iters;
  j["tcg_iters_total"] = rep.tcg_iters_total;
  Json esc = Json::array();
  for (const auto &[p, reason] : rep.escalations)
    esc.push_back({{"p", p}, {"reason", reason}});
  j["escalations"] = std::move(esc);
  j["success"] = rep.success;
  j["wall_time"] = rep.wall_time;
  if (rep.certificate)
    j["certificate"] = certificate_to_json(*rep.certificate);
  return j;
}

} // namespace bmsdp
