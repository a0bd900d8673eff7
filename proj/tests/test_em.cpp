#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fdrsmooth/em.hpp"
#include "fdrsmooth/sim.hpp"
#include "oracles.hpp"

namespace fdrsmooth {
namespace {

SiteLikelihoods random_likelihoods(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.01, 0.4);
  SiteLikelihoods lik{Eigen::VectorXd(static_cast<Eigen::Index>(n)),
                      Eigen::VectorXd(static_cast<Eigen::Index>(n))};
  for (auto& v : lik.null) v = u(rng);
  for (auto& v : lik.alt) v = u(rng);
  return lik;
}

// Likelihoods of a simulated grid under the true N(0,1) null and the
// true convolved alternative.
SiteLikelihoods simulated_likelihoods(const PriorImage& prior, const SignalDistribution& alt,
                                      std::uint64_t seed) {
  const auto data = simulate(prior, alt, seed);
  SiteLikelihoods lik{data.z, data.z};
  for (Eigen::Index i = 0; i < data.z.size(); ++i) {
    lik.null[i] = normal_pdf(data.z[i], 0.0, 1.0);
    lik.alt[i] = alt.convolved_density(data.z[i]);
  }
  return lik;
}

TEST(EStep, PosteriorFormulaAndClamp) {
  SiteLikelihoods lik{Eigen::Vector3d(0.2, 0.3, 1.0), Eigen::Vector3d(0.1, 0.3, 0.0)};
  const Eigen::Vector3d beta(0.0, std::log(3.0), 2.0);
  const auto w = e_step(beta, lik);
  EXPECT_NEAR(w[0], 0.1 / 0.3, 1e-15);
  EXPECT_NEAR(w[1], 0.75, 1e-15);
  EXPECT_EQ(w[2], kPosteriorClamp);
}

TEST(EStep, ZeroDensityFallsBackToPrior) {
  SiteLikelihoods lik{Eigen::Vector2d(0.0, 0.2), Eigen::Vector2d(0.0, 0.2)};
  const auto w = e_step(Eigen::Vector2d(std::log(0.25 / 0.75), 0.0), lik);
  EXPECT_NEAR(w[0], 0.25, 1e-15);
  EXPECT_NEAR(w[1], 0.5, 1e-15);
}

TEST(WorkingQuantities, TaylorExpansion) {
  const Eigen::Vector3d x(0.3, -2.0, 20.0);
  const Eigen::Vector3d w(0.9, 0.1, 0.5);
  const auto p = working_quantities(x, w, 0.7);
  EXPECT_EQ(p.lambda, 0.7);
  for (int i = 0; i < 2; ++i) {
    const double c = 1.0 / (1.0 + std::exp(-x[i]));
    EXPECT_NEAR(p.eta[i], c * (1 - c), 1e-15);
    EXPECT_NEAR(p.y[i], x[i] - (c - w[i]) / (c * (1 - c)), 1e-12);
  }
  EXPECT_EQ(p.eta[2], kWeightFloor);
}

TEST(CompleteData, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> beta_dist(-8.0, 8.0);
  std::uniform_real_distribution<double> w_dist(0.0, 1.0);
  for (int point = 0; point < 100; ++point) {
    Eigen::VectorXd beta(4), w(4);
    for (int i = 0; i < 4; ++i) {
      beta[i] = beta_dist(rng);
      w[i] = w_dist(rng);
    }
    const auto grad = complete_data_gradient(beta, w);
    const auto hess = complete_data_hessian_diag(beta);
    for (int i = 0; i < 4; ++i) {
      const auto fd = testing::complete_data_fd(beta[i], w[i]);
      EXPECT_NEAR(grad[i], fd.first, 1e-6 * std::abs(fd.first));
      EXPECT_NEAR(hess[i], fd.second, 1e-6 * std::abs(fd.second));
    }
  }
}

TEST(CompleteData, NllAgreesWithDirectFormula) {
  const Eigen::Vector3d beta(-40.0, 0.5, 40.0);
  const Eigen::Vector3d w(0.2, 0.5, 0.7);
  const double expected = (std::log1p(std::exp(-40.0)) + 0.2 * 40.0) +
                          (std::log1p(std::exp(0.5)) - 0.25) + (40.0 + std::log1p(std::exp(-40.0)) - 28.0);
  EXPECT_NEAR(complete_data_nll(beta, w), expected, 1e-12);
}

TEST(ObservedLikelihood, MatchesHighPrecision) {
  std::mt19937_64 rng(32);
  const auto lik = random_likelihoods(50, rng);
  std::normal_distribution<double> normal(0.0, 4.0);
  Eigen::VectorXd beta(50);
  for (auto& b : beta) b = normal(rng);
  const double hp = testing::neg_log_likelihood_high_precision(beta, lik.null, lik.alt);
  EXPECT_NEAR(neg_log_likelihood(beta, lik), hp, 1e-11 * std::abs(hp));
}

TEST(Fit, ObjectiveIsMonotone) {
  const auto prior = make_prior_image(Scenario::kLarge, 16, 16);
  const auto alt = SignalDistribution::named("alt1");
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    FdrSmoother smoother(prior.graph(), simulated_likelihoods(prior, alt, seed));
    for (const double lambda : {2.0, 0.5, 0.1}) {
      const auto fit = smoother.fit(lambda, Eigen::VectorXd::Constant(256, -2.0));
      for (std::size_t k = 1; k < fit.objective_trace.size(); ++k) {
        EXPECT_LE(fit.objective_trace[k], fit.objective_trace[k - 1]);
      }
      EXPECT_NEAR(fit.objective_trace.back(), smoother.penalized_objective(fit.beta, lambda), 1e-9);
      EXPECT_EQ(fit.w.size(), 256);
    }
  }
}

TEST(Fit, HugeLambdaGivesScalarMle) {
  // With a prohibitive penalty the fit is a constant log-odds equal to the
  // scalar maximum likelihood, found here by bisection on the score.
  std::mt19937_64 rng(33);
  auto lik = random_likelihoods(30, rng);
  for (Eigen::Index i = 0; i < 30; ++i) lik.alt[i] = lik.null[i] * (i % 2 == 0 ? 3.0 : 0.2);
  const auto score = [&](double b) {
    const double c = 1.0 / (1.0 + std::exp(-b));
    double s = 0.0;
    for (Eigen::Index i = 0; i < 30; ++i) {
      s += (lik.alt[i] - lik.null[i]) / (c * lik.alt[i] + (1 - c) * lik.null[i]);
    }
    return s;
  };
  double lo = -15.0, hi = 15.0;
  ASSERT_GT(score(lo), 0.0);
  ASSERT_LT(score(hi), 0.0);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (score(mid) > 0.0 ? lo : hi) = mid;
  }
  FdrSmoother smoother(build_grid_graph(5, 6), lik);
  EmOptions options;
  options.max_iterations = 2000;
  options.rel_tol = 1e-13;
  const auto fit = smoother.fit(1e4, Eigen::VectorXd::Zero(30), options);
  EXPECT_LT((fit.beta.array() - lo).abs().maxCoeff(), 1e-3) << fit.beta.transpose() << " lo " << lo << " it " << fit.iterations << " bt " << fit.backtracks << " fail " << fit.admm_failures;
}

TEST(Fit, SurvivesAdmmIterationCap) {
  const auto prior = make_prior_image(Scenario::kLarge, 16, 16);
  FdrSmoother smoother(prior.graph(),
                       simulated_likelihoods(prior, SignalDistribution::named("alt1"), 4));
  EmOptions options;
  options.admm.max_iterations = 2;
  const auto fit = smoother.fit(0.3, Eigen::VectorXd::Constant(256, -2.0), options);
  EXPECT_GT(fit.admm_failures, 0);
  for (std::size_t k = 1; k < fit.objective_trace.size(); ++k) {
    EXPECT_LE(fit.objective_trace[k], fit.objective_trace[k - 1]);
  }
}

TEST(Fit, ClampsInitialLogOdds) {
  std::mt19937_64 rng(34);
  FdrSmoother smoother(build_grid_graph(2, 2), random_likelihoods(4, rng));
  EmOptions options;
  options.max_iterations = 0;
  const auto fit = smoother.fit(1.0, Eigen::Vector4d(-100, 100, 0, 3), options);
  EXPECT_EQ(fit.beta, Eigen::Vector4d(-15, 15, 0, 3));
}

TEST(Fit, RejectsBadArguments) {
  std::mt19937_64 rng(35);
  FdrSmoother smoother(build_grid_graph(2, 2), random_likelihoods(4, rng));
  EXPECT_THROW(smoother.fit(-1.0, Eigen::VectorXd::Zero(4)), std::invalid_argument);
  EXPECT_THROW(smoother.fit(1.0, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  EXPECT_THROW(FdrSmoother(build_grid_graph(2, 3), random_likelihoods(4, rng)),
               std::invalid_argument);
  EXPECT_THROW(evaluate_likelihoods(Eigen::Vector2d(0.0, NAN), theoretical_null(), AltDensity()),
               std::invalid_argument);
}

}  // namespace
}  // namespace fdrsmooth
