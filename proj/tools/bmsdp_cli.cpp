// Command-line driver: solve, certify, diagnose and oracle subcommands over
// JSON problem files or built-in families.

#include "bmsdp/json_io.hpp"
#include "bmsdp/oracle.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

using namespace bmsdp;

namespace {

struct FamilyArgs {
  std::string name; // maxcut, orthocut, trs, geneig, spheres
  int n = 8;
  int d = 2;
  std::string graph = "cycle";
  std::vector<int> sizes;
  std::uint64_t seed = 0;
};

Matrix random_sym(int n, std::mt19937_64 &rng) {
  std::normal_distribution<Scalar> dist(0.0, 1.0);
  Matrix M(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      M(i, j) = dist(rng);
  return 0.5 * (M + M.transpose());
}

Matrix graph_laplacian(int n, const std::string &kind, std::mt19937_64 &rng) {
  Matrix W = Matrix::Zero(n, n);
  if (kind == "cycle") {
    for (int i = 0; i < n; ++i)
      W(i, (i + 1) % n) = W((i + 1) % n, i) = 1.0;
  } else if (kind == "complete") {
    W.setOnes();
    W.diagonal().setZero();
  } else if (kind == "random") {
    std::bernoulli_distribution edge(0.5);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (edge(rng))
          W(i, j) = W(j, i) = 1.0;
  } else {
    throw std::invalid_argument("unknown graph kind: " + kind);
  }
  Matrix L = Matrix(W.rowwise().sum().asDiagonal()) - W;
  return L;
}

SdpProblem build_from_args(const FamilyArgs &fa) {
  std::mt19937_64 rng(fa.seed ^ 0xabcdef1234567890ULL);
  if (fa.name == "maxcut") {
    Matrix L = graph_laplacian(fa.n, fa.graph, rng);
    return build_family(OrthoCutFamily{SymMatrix::fromDense(-0.25 * L), 1});
  }
  if (fa.name == "orthocut")
    return build_family(OrthoCutFamily{SymMatrix::fromDense(random_sym(fa.n, rng)), fa.d});
  if (fa.name == "trs") {
    Matrix A = random_sym(fa.n, rng);
    std::normal_distribution<Scalar> dist(0.0, 1.0);
    Vector b(fa.n);
    for (int i = 0; i < fa.n; ++i)
      b[i] = dist(rng);
    return build_family(TrsFamily{SymMatrix::fromDense(A), b, dist(rng)});
  }
  if (fa.name == "geneig") {
    Matrix W = random_sym(fa.n, rng);
    Matrix B = W * W.transpose() + Matrix::Identity(fa.n, fa.n);
    return build_family(GenEigFamily{SymMatrix::fromDense(random_sym(fa.n, rng)),
                                     SymMatrix::fromDense(B)});
  }
  if (fa.name == "spheres") {
    std::vector<int> sizes = fa.sizes.empty() ? std::vector<int>{fa.n / 2, fa.n - fa.n / 2}
                                              : fa.sizes;
    int total = 0;
    for (int s : sizes)
      total += s;
    return build_family(
        SpheresFamily{SymMatrix::fromDense(random_sym(total + 1, rng)), sizes, false});
  }
  throw std::invalid_argument("unknown family: " + fa.name);
}

SdpProblem load_problem(const std::string &input, const FamilyArgs &fa) {
  if (!input.empty()) {
    std::ifstream in(input);
    if (!in)
      throw std::runtime_error("cannot open input file: " + input);
    Json j = Json::parse(in);
    return problem_from_json(j);
  }
  if (fa.name.empty())
    throw std::runtime_error("either --input or --family is required");
  return build_from_args(fa);
}

void write_output(const Json &report, const std::string &path) {
  if (path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::ofstream out(path);
    out << report.dump(2) << "\n";
  }
}

int verdict_exit_code(const DualCertificate &cert, Scalar gap_tol) {
  if (cert.verdict == Verdict::CertifiedOptimal)
    return 0;
  if (cert.verdict == Verdict::GapBounded && cert.gap_bound && *cert.gap_bound <= gap_tol)
    return 0;
  return 2;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Low-rank factorization SDP solver with optimality certification"};
  app.require_subcommand(1);

  std::string input, output, factor_path;
  FamilyArgs fa;
  int p = 0; // 0 = auto
  Scalar eps_g = -1.0, eps_h = -1.0, gap_tol = 1e-6;
  int max_iter = 10000;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App *cmd) {
    cmd->add_option("--input", input, "problem JSON file");
    cmd->add_option("--family", fa.name, "built-in family: maxcut|orthocut|trs|geneig|spheres");
    cmd->add_option("--n", fa.n, "dimension for built-in families");
    cmd->add_option("--d", fa.d, "block size (orthocut)");
    cmd->add_option("--graph", fa.graph, "graph kind for maxcut: cycle|complete|random");
    cmd->add_option("--sizes", fa.sizes, "sphere sizes (spheres)");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--output", output, "write the JSON report here (default stdout)");
  };

  auto *solve = app.add_subcommand("solve", "run the staircase (or fixed-p RTR) and certify");
  add_common(solve);
  solve->add_option("--p", p, "fixed rank (omit or 0 for auto staircase)");
  solve->add_option("--eps-g", eps_g, "gradient tolerance");
  solve->add_option("--eps-h", eps_h, "Hessian tolerance");
  solve->add_option("--gap-tol", gap_tol, "acceptable certified gap for exit code 0");
  solve->add_option("--max-iter", max_iter, "outer iteration cap");

  auto *certify_cmd = app.add_subcommand("certify", "certify a given factor");
  add_common(certify_cmd);
  certify_cmd->add_option("--factor", factor_path, "factor JSON file")->required();
  certify_cmd->add_option("--eps-g", eps_g, "gradient tolerance");
  certify_cmd->add_option("--eps-h", eps_h, "Hessian tolerance");
  certify_cmd->add_option("--gap-tol", gap_tol, "acceptable certified gap for exit code 0");

  auto *diagnose = app.add_subcommand("diagnose", "smoothness and rank diagnostics");
  add_common(diagnose);
  diagnose->add_option("--p", p, "rank at which to sample (default: family minimum)");

  auto *oracle_cmd = app.add_subcommand("oracle", "reference solve for test reproduction");
  add_common(oracle_cmd);

  CLI11_PARSE(app, argc, argv);
  fa.seed = seed;

  try {
    SdpProblem problem = load_problem(input, fa);

    Json manifest;
    manifest["command"] = app.get_subcommands().front()->get_name();
    manifest["input"] = input.empty() ? ("family:" + fa.name) : input;
    manifest["seed"] = seed;
    manifest["output"] = output;
    manifest["options"] = {{"p", p},       {"eps_g", eps_g},       {"eps_h", eps_h},
                           {"gap_tol", gap_tol}, {"max_iter", max_iter}};

    Json report;
    report["schema_version"] = 1;
    report["manifest"] = manifest;

    if (solve->parsed()) {
      SolverOptions opts;
      opts.eps_g = eps_g;
      opts.eps_H = eps_h;
      opts.max_outer = max_iter;
      opts.seed = seed;

      Matrix Y;
      SolveReport rep;
      if (p > 0) {
        std::mt19937_64 rng(seed);
        Matrix Y0 = feasible_point(problem, p, rng);
        std::tie(Y, rep) = rtr(problem, Y0, opts);
        rep.certificate = certify(problem, Y, opts.epsG(problem), opts.epsH(problem) / 2.0);
      } else {
        std::tie(Y, rep) = staircase(problem, opts);
      }
      report["solve_report"] = solve_report_to_json(rep);
      report["face_report"] = face_report_to_json(face_dimension(problem, Y));
      report["factor"] = factor_to_json(Y);
      if (rep.certificate)
        report["verdict"] = to_string(rep.certificate->verdict);
      write_output(report, output);
      return rep.certificate ? verdict_exit_code(*rep.certificate, gap_tol) : 2;
    }

    if (certify_cmd->parsed()) {
      std::ifstream in(factor_path);
      if (!in)
        throw std::runtime_error("cannot open factor file: " + factor_path);
      Matrix Y = factor_from_json(Json::parse(in));
      if (Y.rows() != problem.n)
        throw std::runtime_error("factor dimension does not match problem n");
      const Scalar feas = feasibility_residual(problem, Y);
      if (feas > feasibility_tolerance(problem))
        throw std::runtime_error("factor infeasible: residual " + std::to_string(feas));
      SolverOptions opts;
      opts.eps_g = eps_g;
      opts.eps_H = eps_h;
      DualCertificate cert =
          certify(problem, Y, opts.epsG(problem), opts.epsH(problem) / 2.0);
      report["certificate"] = certificate_to_json(cert);
      report["face_report"] = face_report_to_json(face_dimension(problem, Y));
      report["verdict"] = to_string(cert.verdict);
      write_output(report, output);
      return verdict_exit_code(cert, gap_tol);
    }

    if (diagnose->parsed()) {
      const int p_probe =
          p > 0 ? p : std::max(1, problem.structure.slice_dim);
      SmoothnessReport rep = check_smoothness(problem, p_probe, 10, seed);
      report["m_prime"] = rep.m_prime;
      report["constant_rank"] = rep.constant_rank;
      report["observed_ranks"] = rep.observed_ranks;
      report["pataki_bound"] = pataki_bound(rep.m_prime);
      report["recommended_p"] = pataki_bound(rep.m_prime) + 1;
      if (rep.m_prime < problem.m)
        report["warning"] = "m' < m: constraints are dependent at sampled points";
      write_output(report, output);
      std::cerr << "m' = " << rep.m_prime << ", constant rank: " << rep.constant_rank
                << ", Pataki bound = " << pataki_bound(rep.m_prime)
                << ", recommended starting p = " << pataki_bound(rep.m_prime) + 1 << "\n";
      return 0;
    }

    if (oracle_cmd->parsed()) {
      OracleResult res = oracle_sdp_via_escalation(problem, seed);
      report["f_star"] = res.f_star;
      report["error_bar"] = res.error_bar;
      report["method"] = res.method;
      write_output(report, output);
      return 0;
    }
  } catch (const ParseError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
