#include "fdrsmooth/em.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fdrsmooth/errors.hpp"

namespace fdrsmooth {

SiteLikelihoods evaluate_likelihoods(const Eigen::VectorXd& z, const NullDensity& f0,
                                     const AltDensity& f1) {
  if (!z.allFinite()) throw std::invalid_argument("z contains non-finite values");
  return {f0.evaluate(z), f1.evaluate(z)};
}

Eigen::VectorXd prior_probabilities(const Eigen::VectorXd& beta) {
  return beta.unaryExpr([](double b) { return 1.0 / (1.0 + std::exp(-b)); });
}

Eigen::VectorXd clamp_log_odds(Eigen::VectorXd beta) {
  return beta.cwiseMax(-kLogOddsClamp).cwiseMin(kLogOddsClamp);
}

double neg_log_likelihood(const Eigen::VectorXd& beta, const SiteLikelihoods& lik) {
  if (static_cast<std::size_t>(beta.size()) != lik.size()) {
    throw std::invalid_argument("neg_log_likelihood: dimension mismatch");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const double c = 1.0 / (1.0 + std::exp(-beta[i]));
    const double mix = c * lik.alt[i] + (1.0 - c) * lik.null[i];
    total -= std::log(std::max(mix, kLikelihoodFloor));
  }
  return total;
}

Eigen::VectorXd e_step(const Eigen::VectorXd& beta, const SiteLikelihoods& lik) {
  if (static_cast<std::size_t>(beta.size()) != lik.size()) {
    throw std::invalid_argument("e_step: dimension mismatch");
  }
  Eigen::VectorXd w(beta.size());
  std::size_t degenerate = 0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const double c = 1.0 / (1.0 + std::exp(-beta[i]));
    const double signal = c * lik.alt[i];
    const double total = signal + (1.0 - c) * lik.null[i];
    double wi = c;
    if (total > 0.0) {
      wi = signal / total;
    } else {
      ++degenerate;
    }
    w[i] = std::clamp(wi, kPosteriorClamp, 1.0 - kPosteriorClamp);
  }
  if (degenerate > 0) {
    warn(std::to_string(degenerate) +
         " site(s) have zero null and alternative density; using the prior as posterior");
  }
  return w;
}

WlsProblem working_quantities(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                              double lambda) {
  if (x.size() != w.size()) throw std::invalid_argument("working_quantities: dimension mismatch");
  WlsProblem p;
  p.lambda = lambda;
  p.y.resize(x.size());
  p.eta.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double c = 1.0 / (1.0 + std::exp(-x[i]));
    const double eta = std::max(c * (1.0 - c), kWeightFloor);
    p.eta[i] = eta;
    p.y[i] = x[i] - (c - w[i]) / eta;
  }
  return p;
}

double complete_data_nll(const Eigen::VectorXd& beta, const Eigen::VectorXd& w) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const double b = beta[i];
    // log(1 + e^b) without overflow
    const double softplus = b > 0.0 ? b + std::log1p(std::exp(-b)) : std::log1p(std::exp(b));
    total += softplus - w[i] * b;
  }
  return total;
}

Eigen::VectorXd complete_data_gradient(const Eigen::VectorXd& beta, const Eigen::VectorXd& w) {
  return prior_probabilities(beta) - w;
}

Eigen::VectorXd complete_data_hessian_diag(const Eigen::VectorXd& beta) {
  const Eigen::VectorXd c = prior_probabilities(beta);
  return c.cwiseProduct((1.0 - c.array()).matrix());
}

namespace {

// Averages the ADMM iterate over the components joined by edges whose split
// variable r is exactly zero. The ADMM primal iterate only approaches exact
// fusion, and at large lambda the leftover 1e-7 jitter, multiplied by lambda,
// can outweigh a genuine likelihood improvement.
Eigen::VectorXd fuse_components(const Eigen::VectorXd& z, const Eigen::VectorXd& r,
                                const SiteGraph& graph) {
  const std::size_t n = graph.num_nodes();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  const auto edges = graph.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (r[static_cast<Eigen::Index>(e)] != 0.0) continue;
    const std::size_t a = find(edges[e].lo);
    const std::size_t b = find(edges[e].hi);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<double> sum(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t root = find(v);
    sum[root] += z[static_cast<Eigen::Index>(v)];
    ++count[root];
  }
  Eigen::VectorXd fused(z.size());
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t root = find(v);
    fused[static_cast<Eigen::Index>(v)] = sum[root] / static_cast<double>(count[root]);
  }
  return fused;
}

}  // namespace

FdrSmoother::FdrSmoother(const SiteGraph& graph, SiteLikelihoods likelihoods)
    : graph_(graph),
      incidence_(graph),
      factorization_(graph),
      likelihoods_(std::move(likelihoods)) {
  if (likelihoods_.size() != graph.num_nodes() ||
      likelihoods_.alt.size() != likelihoods_.null.size()) {
    throw std::invalid_argument("site likelihoods do not match the graph size");
  }
}

double FdrSmoother::penalized_objective(const Eigen::VectorXd& beta, double lambda) const {
  return neg_log_likelihood(beta, likelihoods_) + lambda * incidence_.l1_of_differences(beta);
}

FitResult FdrSmoother::fit(double lambda, const Eigen::VectorXd& init, const EmOptions& options) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be a finite non-negative number");
  }
  if (static_cast<std::size_t>(init.size()) != graph_.num_nodes()) {
    throw std::invalid_argument("initial log odds do not match the graph size");
  }
  FitResult result;
  result.beta = clamp_log_odds(init);
  double objective = penalized_objective(result.beta, lambda);
  result.objective_trace.push_back(objective);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;
    const Eigen::VectorXd w = e_step(result.beta, likelihoods_);
    const WlsProblem surrogate = working_quantities(result.beta, w, lambda);

    Eigen::VectorXd candidate;
    try {
      const AdmmSolution sol =
          admm_solve(surrogate, incidence_, factorization_, admm_state_, options.admm);
      candidate = sol.beta;
    } catch (const NonConvergenceError&) {
      ++result.admm_failures;
      candidate = admm_state_.z;
    }
    result.admm_iterations += admm_state_.iterations;
    candidate = clamp_log_odds(std::move(candidate));

    double next = penalized_objective(candidate, lambda);
    if (admm_state_.r.size() == static_cast<Eigen::Index>(graph_.num_edges())) {
      Eigen::VectorXd fused =
          clamp_log_odds(fuse_components(candidate, admm_state_.r, graph_));
      const double fused_value = penalized_objective(fused, lambda);
      if (fused_value < next) {
        candidate = std::move(fused);
        next = fused_value;
      }
    }
    if (!(next <= objective)) {
      // The surrogate step overshot; fall back along the segment towards the
      // current iterate until the objective no longer increases.
      const Eigen::VectorXd direction = candidate - result.beta;
      bool accepted = false;
      double fraction = 1.0;
      for (int k = 0; k < options.max_backtracks; ++k) {
        fraction *= 0.5;
        ++result.backtracks;
        Eigen::VectorXd trial = result.beta + fraction * direction;
        const double value = penalized_objective(trial, lambda);
        if (value <= objective) {
          candidate = std::move(trial);
          next = value;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        result.converged = true;
        break;
      }
    }

    const double change = (objective - next) / std::max(std::abs(objective), 1.0);
    result.beta = std::move(candidate);
    objective = next;
    result.objective_trace.push_back(objective);
    if (change < options.rel_tol) {
      result.converged = true;
      break;
    }
  }
  result.w = e_step(result.beta, likelihoods_);
  return result;
}

FitResult fit(const Eigen::VectorXd& z, const SiteGraph& graph, const TwoGroupsFit& densities,
              double lambda, const std::optional<Eigen::VectorXd>& init,
              const EmOptions& options) {
  FdrSmoother smoother(graph, evaluate_likelihoods(z, densities.f0, densities.f1));
  const Eigen::VectorXd start =
      init ? *init : Eigen::VectorXd::Constant(z.size(), densities.prior.beta_s);
  return smoother.fit(lambda, start, options);
}

}  // namespace fdrsmooth
