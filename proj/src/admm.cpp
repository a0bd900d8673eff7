#include "fdrsmooth/admm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fdrsmooth/errors.hpp"

namespace fdrsmooth {

Eigen::SparseMatrix<double> laplacian_plus_identity(const SiteGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.num_nodes());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.num_nodes() + 2 * graph.num_edges());
  for (Eigen::Index i = 0; i < n; ++i) {
    triplets.emplace_back(i, i, 1.0 + static_cast<double>(graph.degree(static_cast<NodeId>(i))));
  }
  for (const Edge& e : graph.edges()) {
    triplets.emplace_back(static_cast<Eigen::Index>(e.lo), static_cast<Eigen::Index>(e.hi), -1.0);
    triplets.emplace_back(static_cast<Eigen::Index>(e.hi), static_cast<Eigen::Index>(e.lo), -1.0);
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

SddFactorization::SddFactorization(const SiteGraph& graph, bool allow_chain_fast_path)
    : size_(graph.num_nodes()) {
  const auto n = static_cast<Eigen::Index>(size_);
  if (allow_chain_fast_path && (graph.is_chain() || (n == 1 && graph.num_edges() == 0))) {
    Tridiagonal tri;
    tri.diag.resize(n);
    tri.sub.resize(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a_ii = 1.0 + static_cast<double>(graph.degree(static_cast<NodeId>(i)));
      tri.diag[i] = i == 0 ? a_ii : a_ii - tri.sub[i - 1] * tri.sub[i - 1] * tri.diag[i - 1];
      if (i + 1 < n) tri.sub[i] = -1.0 / tri.diag[i];
    }
    impl_ = std::move(tri);
    return;
  }
  auto llt = std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                                                   Eigen::AMDOrdering<int>>>();
  llt->compute(laplacian_plus_identity(graph));
  if (llt->info() != Eigen::Success) {
    throw std::runtime_error("sparse Cholesky factorization of I + D^T D failed");
  }
  impl_ = Sparse(std::move(llt));
}

void SddFactorization::solve_in_place(Eigen::VectorXd& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != size_) {
    throw std::invalid_argument("SddFactorization::solve: dimension mismatch");
  }
  if (const auto* tri = std::get_if<Tridiagonal>(&impl_)) {
    const Eigen::Index n = rhs.size();
    for (Eigen::Index i = 1; i < n; ++i) rhs[i] -= tri->sub[i - 1] * rhs[i - 1];
    for (Eigen::Index i = 0; i < n; ++i) rhs[i] /= tri->diag[i];
    for (Eigen::Index i = n - 2; i >= 0; --i) rhs[i] -= tri->sub[i] * rhs[i + 1];
    return;
  }
  rhs = std::get<Sparse>(impl_)->solve(rhs);
}

Eigen::VectorXd SddFactorization::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd out = rhs;
  solve_in_place(out);
  return out;
}

double WlsProblem::objective(const IncidenceMatrix& d, const Eigen::VectorXd& beta) const {
  return 0.5 * (eta.array() * (y - beta).array().square()).sum() +
         lambda * d.l1_of_differences(beta);
}

AdmmState fresh_admm_state(const WlsProblem& problem, const IncidenceMatrix& d) {
  AdmmState state;
  state.x = problem.y;
  state.z = problem.y;
  state.r = d.apply(problem.y);
  state.s = state.r;
  state.u = Eigen::VectorXd::Zero(problem.y.size());
  state.t = Eigen::VectorXd::Zero(state.r.size());
  state.step = problem.lambda > 0.0 ? 2.0 * problem.lambda : 1.0;
  state.initialized = true;
  return state;
}

void adapt_step(AdmmState& state) {
  if (state.primal_residual >= 5.0 * state.dual_residual) {
    state.step *= 2.0;
    state.u *= 0.5;
    state.t *= 0.5;
  } else if (state.dual_residual >= 5.0 * state.primal_residual) {
    state.step *= 0.5;
    state.u *= 2.0;
    state.t *= 2.0;
  }
}

AdmmSolution admm_solve(const WlsProblem& problem, const IncidenceMatrix& d,
                        const SddFactorization& factorization, AdmmState& state,
                        const ConvergenceSpec& tol) {
  const auto n = static_cast<Eigen::Index>(d.cols());
  const auto m = static_cast<Eigen::Index>(d.rows());
  if (problem.y.size() != n || problem.eta.size() != n ||
      factorization.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("admm_solve: dimension mismatch");
  }
  if (!(problem.lambda >= 0.0)) throw std::invalid_argument("admm_solve: lambda must be >= 0");
  if ((problem.eta.array() <= 0.0).any()) {
    throw std::invalid_argument("admm_solve: weights must be positive");
  }
  if (!state.initialized || state.x.size() != n || state.r.size() != m) {
    state = fresh_admm_state(problem, d);
  }

  const double sqrt_dim = std::sqrt(static_cast<double>(n + m));
  Eigen::VectorXd rhs(n);
  Eigen::VectorXd dt_v(n);
  Eigen::VectorXd z_prev(n);
  Eigen::VectorXd s_prev(m);
  state.iterations = 0;

  for (int iter = 1; iter <= tol.max_iterations; ++iter) {
    const double a = state.step;
    state.x = (problem.eta.cwiseProduct(problem.y) + a * (state.z - state.u)).cwiseQuotient(
        (problem.eta.array() + a).matrix());
    const double kappa = problem.lambda / a;
    for (Eigen::Index j = 0; j < m; ++j) {
      state.r[j] = soft_threshold(state.s[j] - state.t[j], kappa);
    }

    z_prev = state.z;
    s_prev = state.s;
    d.apply_transpose(state.r + state.t, dt_v);
    rhs = state.x + state.u + dt_v;
    factorization.solve_in_place(rhs);
    state.z = rhs;
    d.apply(state.z, state.s);

    state.u += state.x - state.z;
    state.t += state.r - state.s;

    const double primal =
        std::sqrt((state.x - state.z).squaredNorm() + (state.r - state.s).squaredNorm());
    const double dual =
        a * std::sqrt((state.z - z_prev).squaredNorm() + (state.s - s_prev).squaredNorm());
    state.primal_residual = primal;
    state.dual_residual = dual;
    state.iterations = iter;
    ++state.total_iterations;

    const double primal_scale = std::max(
        std::sqrt(state.x.squaredNorm() + state.r.squaredNorm()),
        std::sqrt(state.z.squaredNorm() + state.s.squaredNorm()));
    const double dual_scale = a * std::sqrt(state.u.squaredNorm() + state.t.squaredNorm());
    const double primal_eps = sqrt_dim * tol.abs_tol + tol.rel_tol * primal_scale;
    const double dual_eps = sqrt_dim * tol.abs_tol + tol.rel_tol * dual_scale;
    if (primal <= primal_eps && dual <= dual_eps) {
      return {state.z, iter, primal, dual};
    }
    if (tol.adapt_step) adapt_step(state);
  }
  throw NonConvergenceError("ADMM did not converge in " + std::to_string(tol.max_iterations) +
                                " iterations (primal residual " +
                                std::to_string(state.primal_residual) + ", dual residual " +
                                std::to_string(state.dual_residual) + ")",
                            state.iterations, state.primal_residual, state.dual_residual);
}

}  // namespace fdrsmooth
