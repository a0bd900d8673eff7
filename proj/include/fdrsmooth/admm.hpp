#pragma once

#include <memory>
#include <optional>
#include <variant>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include "fdrsmooth/graph.hpp"

namespace fdrsmooth {

/// Reusable solver for (I + D^T D) x = b. Chain graphs use a linear-time
/// tridiagonal factorization; other graphs use a sparse Cholesky
/// factorization under an AMD fill-reducing ordering.
class SddFactorization {
 public:
  explicit SddFactorization(const SiteGraph& graph, bool allow_chain_fast_path = true);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  void solve_in_place(Eigen::VectorXd& rhs) const;

  std::size_t size() const noexcept { return size_; }
  bool uses_chain_fast_path() const noexcept { return std::holds_alternative<Tridiagonal>(impl_); }

 private:
  struct Tridiagonal {
    // A = L D L^T with unit lower bidiagonal L; sub[i] is L(i+1, i).
    Eigen::VectorXd diag;
    Eigen::VectorXd sub;
  };
  using Sparse = std::shared_ptr<
      const Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                                 Eigen::AMDOrdering<int>>>;

  std::size_t size_;
  std::variant<Tridiagonal, Sparse> impl_;
};

/// Sparse A = I + D^T D (graph Laplacian plus identity).
Eigen::SparseMatrix<double> laplacian_plus_identity(const SiteGraph& graph);

inline double soft_threshold(double v, double kappa) {
  if (v > kappa) return v - kappa;
  if (v < -kappa) return v + kappa;
  return 0.0;
}

inline constexpr double kWeightFloor = 1e-6;

/// minimize sum_i eta_i (y_i - beta_i)^2 / 2 + lambda ||D beta||_1
struct WlsProblem {
  Eigen::VectorXd y;
  Eigen::VectorXd eta;
  double lambda = 0.0;

  double objective(const IncidenceMatrix& d, const Eigen::VectorXd& beta) const;
};

struct ConvergenceSpec {
  double abs_tol = 1e-8;
  double rel_tol = 1e-6;
  int max_iterations = 5000;
  bool adapt_step = true;
};

/// Primal variables x (n), r (m), their constrained copies z, s, scaled duals
/// u, t and the step size a. Carried across solves as a warm start.
struct AdmmState {
  Eigen::VectorXd x, r, z, s, u, t;
  double step = 1.0;
  int iterations = 0;        // iterations of the most recent solve
  long total_iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool initialized = false;
};

/// x = z = y, r = s = D y, zero duals, a = 2 lambda (1 when lambda == 0).
AdmmState fresh_admm_state(const WlsProblem& problem, const IncidenceMatrix& d);

/// Residual balancing: a doubles (duals halve) when the primal residual is
/// at least five times the dual residual, and the reverse when the dual
/// residual dominates.
void adapt_step(AdmmState& state);

struct AdmmSolution {
  Eigen::VectorXd beta;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

/// Runs ADMM from `state` (initialised fresh if empty) until both residual
/// tests pass. Returns z as the solution. Throws NonConvergenceError when
/// the iteration cap is hit; `state` then holds the last iterate.
AdmmSolution admm_solve(const WlsProblem& problem, const IncidenceMatrix& d,
                        const SddFactorization& factorization, AdmmState& state,
                        const ConvergenceSpec& tol = {});

}  // namespace fdrsmooth
