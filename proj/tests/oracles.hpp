#pragma once

// Reference computations used only by the tests. None of these share code
// paths with the library solvers they check.

#include <random>
#include <vector>

#include <Eigen/Core>

#include "fdrsmooth/graph.hpp"

namespace fdrsmooth::testing {

/// Exact weighted 1D fused lasso on a chain,
///   min sum eta_i (y_i - b_i)^2 / 2 + lambda sum |b_i - b_{i+1}|,
/// by dynamic programming on the derivative messages
///   g_1(b) = eta_1 (b - y_1),  g_{k+1}(b) = eta_{k+1} (b - y_{k+1}) + clamp(g_k(b), -lambda, lambda)
/// with bisection for the breakpoints and clipping on the way back.
Eigen::VectorXd fused_lasso_1d_dp(const Eigen::VectorXd& y, const Eigen::VectorXd& eta,
                                  double lambda);

/// Weighted generalized lasso on an arbitrary small graph solved through its
/// box-constrained dual by cyclic coordinate descent, run until the dual
/// iterate stops moving.
Eigen::VectorXd graph_lasso_dual_cd(const SiteGraph& graph, const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& eta, double lambda);

/// Dense D built entry by entry from the edge list.
Eigen::MatrixXd dense_incidence(const SiteGraph& graph);

/// (I + D^T D)^{-1} b with a dense LDL^T.
Eigen::VectorXd dense_laplacian_solve(const SiteGraph& graph, const Eigen::VectorXd& b);

/// Erdos-Renyi style random graph with a spanning path so it is connected.
SiteGraph random_connected_graph(std::size_t n, double extra_edge_prob, std::mt19937_64& rng);

/// Random graph without the connectivity guarantee, at most max_edges edges.
SiteGraph random_small_graph(std::size_t n, std::size_t max_edges, std::mt19937_64& rng);

/// -sum log[c f1 + (1 - c) f0] evaluated in 50-digit decimal arithmetic.
double neg_log_likelihood_high_precision(const Eigen::VectorXd& beta, const Eigen::VectorXd& f0,
                                         const Eigen::VectorXd& f1);

struct FiniteDifference {
  double first;
  double second;
};

/// Central first and second differences of the single-site complete-data
/// negative log likelihood log(1 + e^b) - w b, computed in 50-digit
/// arithmetic so the step can be tiny.
FiniteDifference complete_data_fd(double beta, double w);

/// Trapezoid integral of |f - g| / 2 on a uniform grid.
double total_variation(const std::vector<double>& grid, const std::vector<double>& f,
                       const std::vector<double>& g);

}  // namespace fdrsmooth::testing
