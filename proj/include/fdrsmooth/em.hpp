#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "fdrsmooth/admm.hpp"
#include "fdrsmooth/density.hpp"
#include "fdrsmooth/graph.hpp"

namespace fdrsmooth {

inline constexpr double kPosteriorClamp = 1e-10;
inline constexpr double kLikelihoodFloor = 1e-300;

/// f0(z_i) and f1(z_i) for every site; the only way the EM touches the data.
struct SiteLikelihoods {
  Eigen::VectorXd null;
  Eigen::VectorXd alt;

  std::size_t size() const noexcept { return static_cast<std::size_t>(null.size()); }
};

/// Throws std::invalid_argument on non-finite z.
SiteLikelihoods evaluate_likelihoods(const Eigen::VectorXd& z, const NullDensity& f0,
                                     const AltDensity& f1);

/// Inverse logit, c_i = e^beta / (1 + e^beta).
Eigen::VectorXd prior_probabilities(const Eigen::VectorXd& beta);
Eigen::VectorXd clamp_log_odds(Eigen::VectorXd beta);

/// l(beta) = -sum log[c_i f1(z_i) + (1 - c_i) f0(z_i)], bracket floored at 1e-300.
double neg_log_likelihood(const Eigen::VectorXd& beta, const SiteLikelihoods& lik);

/// Posterior signal probabilities w_i, clamped to [1e-10, 1 - 1e-10]. Where
/// both densities vanish the prior c_i is used and a warning is issued.
Eigen::VectorXd e_step(const Eigen::VectorXd& beta, const SiteLikelihoods& lik);

/// Working responses and weights of the quadratic surrogate at x:
/// eta = max(c (1 - c), 1e-6), y = x - (c - w) / eta.
WlsProblem working_quantities(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                              double lambda);

/// Complete-data negative log likelihood sum log(1 + e^b) - w b, with its
/// gradient and Hessian diagonal.
double complete_data_nll(const Eigen::VectorXd& beta, const Eigen::VectorXd& w);
Eigen::VectorXd complete_data_gradient(const Eigen::VectorXd& beta, const Eigen::VectorXd& w);
Eigen::VectorXd complete_data_hessian_diag(const Eigen::VectorXd& beta);

struct EmOptions {
  int max_iterations = 100;
  double rel_tol = 1e-6;
  ConvergenceSpec admm{};
  /// Step halvings tried when a partial M-step fails to decrease the objective.
  int max_backtracks = 30;
};

struct FitResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd w;
  std::vector<double> objective_trace;  // penalized observed-data objective, one per iterate
  bool converged = false;
  int iterations = 0;
  int backtracks = 0;
  long admm_iterations = 0;
  int admm_failures = 0;
};

/// Carries the ADMM warm start and the cached factorization between fits.
class FdrSmoother {
 public:
  FdrSmoother(const SiteGraph& graph, SiteLikelihoods likelihoods);

  const SiteGraph& graph() const noexcept { return graph_; }
  const IncidenceMatrix& incidence() const noexcept { return incidence_; }
  const SddFactorization& factorization() const noexcept { return factorization_; }
  const SiteLikelihoods& likelihoods() const noexcept { return likelihoods_; }
  AdmmState& admm_state() noexcept { return admm_state_; }

  double penalized_objective(const Eigen::VectorXd& beta, double lambda) const;

  /// EM with partial M-steps: one E-step, one quadratic surrogate and one
  /// warm-started ADMM solve per iteration.
  FitResult fit(double lambda, const Eigen::VectorXd& init, const EmOptions& options = {});

 private:
  SiteGraph graph_;
  IncidenceMatrix incidence_;
  SddFactorization factorization_;
  SiteLikelihoods likelihoods_;
  AdmmState admm_state_;
};

/// One-shot fit, initialised at the constant scalar log odds beta_s unless
/// `init` is supplied.
FitResult fit(const Eigen::VectorXd& z, const SiteGraph& graph, const TwoGroupsFit& densities,
              double lambda, const std::optional<Eigen::VectorXd>& init = std::nullopt,
              const EmOptions& options = {});

}  // namespace fdrsmooth
