#include "bmsdp/rtr.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

namespace bmsdp {

namespace {

constexpr Scalar kEps = std::numeric_limits<Scalar>::epsilon();

Scalar inner(const Matrix &A, const Matrix &B) { return (A.array() * B.array()).sum(); }

// Orthonormal basis of the tangent space at the gram's base point, as
// columns of an np x k matrix of vectorized directions.
Matrix tangent_basis(const GramSystem &gram) {
  const auto &AY = gram.AY();
  const int np = static_cast<int>(gram.baseY().size());
  const int m = static_cast<int>(AY.size());
  Matrix N(m, np);
  for (int i = 0; i < m; ++i)
    N.row(i) = Eigen::Map<const Vector>(AY[i].data(), np).transpose();
  Eigen::JacobiSVD<Matrix> svd(N, Eigen::ComputeFullV);
  const auto &sv = svd.singularValues();
  const Scalar cutoff = std::max(m, np) * kEps * (sv.size() ? sv(0) : 0.0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff)
      ++r;
  return svd.matrixV().rightCols(np - r);
}

struct State {
  Matrix Y;
  std::unique_ptr<GramSystem> gram;
  SMatrix S;
  Matrix grad;
  Scalar gnorm = 0.0;
  Scalar g = 0.0;

  void set(const SdpProblem &problem, Matrix Ynew) {
    Y = std::move(Ynew);
    gram = std::make_unique<GramSystem>(problem, Y);
    S = s_matrix(problem, *gram);
    grad = riemannian_gradient(S, Y);
    gnorm = grad.norm();
    g = cost(problem, Y);
  }
};

struct TcgResult {
  Matrix eta;
  int iters = 0;
  bool boundary = false;
};

TcgResult truncated_cg(const SdpProblem &problem, const State &st, Scalar radius, int max_iters) {
  // Steihaug-Toint with kappa = 0.1, theta = 1 inner stopping rule.
  TcgResult out;
  out.eta = Matrix::Zero(st.Y.rows(), st.Y.cols());
  Matrix r = st.grad;
  Matrix d = project_tangent(problem, *st.gram, -r);
  Scalar rr = inner(r, r);
  const Scalar r0 = std::sqrt(rr);
  const Scalar stop = r0 * std::min(0.1, r0);
  for (int j = 0; j < max_iters; ++j) {
    ++out.iters;
    Matrix Hd = hessian_vec(problem, *st.gram, st.S, d);
    const Scalar dHd = inner(d, Hd);
    if (dHd <= 0.0) {
      // Negative curvature: follow d to the boundary.
      const Scalar ee = inner(out.eta, out.eta), ed = inner(out.eta, d), dd = inner(d, d);
      const Scalar tau = (-ed + std::sqrt(ed * ed + dd * (radius * radius - ee))) / dd;
      out.eta += tau * d;
      out.boundary = true;
      return out;
    }
    const Scalar alpha = rr / dHd;
    Matrix eta_new = out.eta + alpha * d;
    if (eta_new.norm() >= radius) {
      const Scalar ee = inner(out.eta, out.eta), ed = inner(out.eta, d), dd = inner(d, d);
      const Scalar tau = (-ed + std::sqrt(ed * ed + dd * (radius * radius - ee))) / dd;
      out.eta += tau * d;
      out.boundary = true;
      return out;
    }
    out.eta = std::move(eta_new);
    r += alpha * Hd;
    const Scalar rr_new = inner(r, r);
    if (std::sqrt(rr_new) <= stop)
      return out;
    // Re-project to absorb tangency drift accumulated over the recursion.
    d = project_tangent(problem, *st.gram, -r + (rr_new / rr) * d);
    rr = rr_new;
  }
  return out;
}

std::pair<Scalar, Matrix> min_eig_lanczos(const SdpProblem &problem, const GramSystem &gram,
                                          const SMatrix &S, std::mt19937_64 &rng) {
  const int n = static_cast<int>(gram.baseY().rows());
  const int p = static_cast<int>(gram.baseY().cols());
  std::normal_distribution<Scalar> dist(0.0, 1.0);
  Scalar best = std::numeric_limits<Scalar>::infinity();
  Matrix best_dir = Matrix::Zero(n, p);
  for (int restart = 0; restart < 3; ++restart) {
    Matrix v(n, p);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < n; ++i)
        v(i, j) = dist(rng);
    v = project_tangent(problem, gram, v);
    if (v.norm() < 1e-14)
      continue;
    v /= v.norm();
    const int iters = 50;
    std::vector<Matrix> basis;
    Vector alpha(iters), beta(iters);
    int k = 0;
    for (; k < iters; ++k) {
      basis.push_back(v);
      Matrix w = hessian_vec(problem, gram, S, v);
      alpha[k] = inner(v, w);
      for (const auto &b : basis)
        w -= inner(b, w) * b;
      w = project_tangent(problem, gram, w);
      beta[k] = w.norm();
      if (beta[k] < 1e-13)
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
    if (es.eigenvalues()(0) < best) {
      best = es.eigenvalues()(0);
      best_dir.setZero();
      for (int i = 0; i < kk; ++i)
        best_dir += es.eigenvectors()(i, 0) * basis[i];
      best_dir /= std::max(best_dir.norm(), 1e-300);
    }
  }
  return {best, best_dir};
}

} // namespace

std::pair<Scalar, Matrix> hessian_min_eig(const SdpProblem &problem, const GramSystem &gram,
                                          const SMatrix &S, std::mt19937_64 &rng) {
  const int n = static_cast<int>(gram.baseY().rows());
  const int p = static_cast<int>(gram.baseY().cols());
  if (n * p <= 400) {
    Matrix B = tangent_basis(gram);
    const int k = static_cast<int>(B.cols());
    if (k == 0)
      return {0.0, Matrix::Zero(n, p)};
    Matrix HB(n * p, k);
    for (int j = 0; j < k; ++j) {
      Matrix Vj = Eigen::Map<const Matrix>(B.col(j).data(), n, p);
      Matrix HVj = hessian_vec(problem, gram, S, Vj);
      HB.col(j) = Eigen::Map<const Vector>(HVj.data(), n * p);
    }
    Matrix H = B.transpose() * HB;
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    Vector dir = B * es.eigenvectors().col(0);
    return {es.eigenvalues()(0), Eigen::Map<const Matrix>(dir.data(), n, p)};
  }
  return min_eig_lanczos(problem, gram, S, rng);
}

std::pair<Matrix, SolveReport> rtr(const SdpProblem &problem, const Matrix &Y0,
                                   const SolverOptions &opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scalar eps_g = opts.epsG(problem);
  const Scalar eps_H = opts.epsH(problem);
  const Scalar feas_tol = feasibility_tolerance(problem);
  if (feasibility_residual(problem, Y0) > feas_tol)
    throw std::invalid_argument("rtr: Y0 is not feasible to tolerance");

  std::mt19937_64 rng(opts.seed);
  State st;
  st.set(problem, Y0);

  const Scalar y0norm = std::max(st.Y.norm(), 1e-8);
  Scalar radius = opts.tr_radius_init > 0.0 ? opts.tr_radius_init : y0norm / 8.0;
  const Scalar radius_max = opts.tr_radius_max > 0.0 ? opts.tr_radius_max : 4.0 * y0norm;
  const int dim =
      static_cast<int>(st.Y.size()) - st.gram->mPrime();
  const int tcg_max = opts.tcg_max > 0 ? opts.tcg_max : std::max(dim, 1);

  SolveReport rep;
  rep.p_used = static_cast<int>(st.Y.cols());
  rep.hess_min_eig_estimate = std::numeric_limits<Scalar>::quiet_NaN();

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    rep.outer_iters = outer + 1;
    Matrix eta;
    bool boundary = false;
    if (st.gnorm <= eps_g) {
      auto [lmin, vmin] = hessian_min_eig(problem, *st.gram, st.S, rng);
      rep.hess_min_eig_estimate = lmin;
      if (lmin >= -eps_H || vmin.norm() == 0.0) {
        rep.success = true;
        break;
      }
      // Second-order step along the most negative curvature direction.
      const Scalar sign = inner(st.grad, vmin) <= 0.0 ? 1.0 : -1.0;
      eta = (sign * radius) * vmin;
      boundary = true;
    } else {
      TcgResult tcg = truncated_cg(problem, st, radius, tcg_max);
      rep.tcg_iters_total += tcg.iters;
      eta = std::move(tcg.eta);
      boundary = tcg.boundary;
    }

    const Matrix Heta = hessian_vec(problem, *st.gram, st.S, eta);
    const Scalar model_dec = -(inner(st.grad, eta) + 0.5 * inner(eta, Heta));

    Scalar rho = -1.0;
    Matrix Ynew;
    Scalar gnew = 0.0;
    bool retract_ok = true;
    try {
      Ynew = retract(problem, st.Y, eta);
      gnew = cost(problem, Ynew);
      const Scalar reg = 1e-13 * std::max(1.0, std::abs(st.g));
      if (model_dec > 0.0)
        rho = (st.g - gnew + reg) / (model_dec + reg);
    } catch (const RetractionFailure &) {
      retract_ok = false;
    }

    // Near the optimum the true decrease drops below the roundoff of g, so
    // the monotonicity guard needs the same slack as the rho regularizer.
    if (retract_ok && rho > 0.1 &&
        gnew <= st.g + 1e-13 * std::max(1.0, std::abs(st.g))) {
      st.set(problem, std::move(Ynew));
      if (rho > 0.75 && boundary)
        radius = std::min(2.0 * radius, radius_max);
    } else {
      radius *= 0.25;
      if (radius < 1e-14) {
        rep.success = false;
        break;
      }
    }
  }

  rep.final_cost = st.g;
  rep.grad_norm = st.gnorm;
  rep.p_used = static_cast<int>(st.Y.cols());
  rep.rank_Y = numerical_rank(st.Y);
  if (std::isnan(rep.hess_min_eig_estimate) && rep.success)
    rep.hess_min_eig_estimate = 0.0;
  rep.wall_time =
      std::chrono::duration<Scalar>(std::chrono::steady_clock::now() - t0).count();
  return {st.Y, rep};
}

std::optional<Matrix> escape_direction(const Matrix &Y, const Matrix &S, Scalar eps_H) {
  Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeFullV);
  const auto &sv = svd.singularValues();
  const int p = static_cast<int>(Y.cols());
  const Scalar smin = sv.size() == p ? sv(p - 1) : 0.0;
  if (smin > 1e-8 * sv(0))
    return std::nullopt; // full column rank
  EigenPair ep = smallest_eigenvalue(S);
  if (ep.value >= -eps_H / 2.0)
    return std::nullopt;
  const Vector z = svd.matrixV().col(p - 1);
  return ep.vector * z.transpose();
}

Matrix escalate(const Matrix &Y) {
  Matrix out(Y.rows(), Y.cols() + 1);
  out << Y, Vector::Zero(Y.rows());
  return out;
}

namespace {

// Move off an escalated saddle: backtrack along the escape direction until
// the decrease matches at least half the curvature model.
Matrix escape_step(const SdpProblem &problem, const Matrix &Y, const Matrix &V,
                   Scalar lambda_min_S) {
  const Scalar g0 = cost(problem, Y);
  Scalar t = std::max(Y.norm() / 8.0, 1e-6);
  for (int k = 0; k < 60; ++k, t *= 0.5) {
    try {
      Matrix Ynew = retract(problem, Y, t * V);
      if (cost(problem, Ynew) <= g0 - 0.5 * std::abs(lambda_min_S) * t * t)
        return Ynew;
    } catch (const RetractionFailure &) {
    }
  }
  return Y; // let RTR deal with it
}

} // namespace

std::pair<Matrix, SolveReport> staircase(const SdpProblem &problem, const SolverOptions &opts,
                                         const std::optional<Matrix> &Y0) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
  const Scalar eps_g = opts.epsG(problem);
  const Scalar eps_H = opts.epsH(problem);

  Matrix Y;
  std::vector<int> schedule = opts.p_schedule;
  if (Y0) {
    Y = *Y0;
  } else {
    if (!has_feasible_construction(problem))
      throw std::runtime_error("staircase: generic problems require a starting factor");
    int p0;
    if (!schedule.empty()) {
      p0 = schedule.front();
      schedule.erase(schedule.begin());
    } else {
      // Probe m' at a small rank, then start just above the Pataki bound.
      const int p_probe = std::max(1, problem.structure.slice_dim);
      GramSystem probe(problem, feasible_point(problem, p_probe, rng));
      p0 = pataki_bound(probe.mPrime()) + 1;
    }
    p0 = std::max(p0, std::max(1, problem.structure.slice_dim));
    p0 = std::min(p0, problem.n + 1);
    Y = feasible_point(problem, p0, rng);
  }

  SolveReport total;
  while (true) {
    auto [Yout, rep] = rtr(problem, Y, opts);
    Y = std::move(Yout);
    total.outer_iters += rep.outer_iters;
    total.tcg_iters_total += rep.tcg_iters_total;
    total.final_cost = rep.final_cost;
    total.grad_norm = rep.grad_norm;
    total.hess_min_eig_estimate = rep.hess_min_eig_estimate;
    total.p_used = rep.p_used;
    total.rank_Y = rep.rank_Y;
    total.success = rep.success;

    GramSystem gram(problem, Y);
    SMatrix sm = s_matrix(problem, gram);
    EigenPair ep = smallest_eigenvalue(sm.S);
    const Scalar slack = 10.0 * kEps * sm.S.norm();
    const int p = static_cast<int>(Y.cols());

    const bool certified = ep.value >= -eps_H / 2.0 - slack;
    if (certified || p >= problem.n + 1) {
      total.certificate = certify(problem, Y, eps_g, eps_H / 2.0 + slack);
      total.success = total.success && certified;
      break;
    }

    int p_next = p + 1;
    if (!schedule.empty()) {
      p_next = std::max(schedule.front(), p + 1);
      schedule.erase(schedule.begin());
    }
    std::string reason = "lambda_min(S) = " + std::to_string(ep.value);
    while (static_cast<int>(Y.cols()) < p_next)
      Y = escalate(Y);
    total.escalations.emplace_back(p_next, reason);
    if (auto V = escape_direction(Y, sm.S, eps_H))
      Y = escape_step(problem, Y, *V, ep.value);
  }
  total.wall_time =
      std::chrono::duration<Scalar>(std::chrono::steady_clock::now() - t0).count();
  return {Y, total};
}

} // namespace bmsdp
