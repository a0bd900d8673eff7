#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fdrsmooth/density.hpp"
#include "fdrsmooth/errors.hpp"
#include "oracles.hpp"

namespace fdrsmooth {
namespace {

std::vector<double> normal_draws(std::size_t n, double mu, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(mu, sigma);
  std::vector<double> z(n);
  for (double& v : z) v = normal(rng);
  return z;
}

// z = theta + N(0,1), theta = 0 w.p. pi0 and N(0, tau^2) otherwise.
std::vector<double> mixture_draws(std::size_t n, double pi0, double tau, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution signal(1.0 - pi0);
  std::vector<double> z(n);
  for (double& v : z) v = normal(rng) + (signal(rng) ? tau * normal(rng) : 0.0);
  return z;
}

int warnings_seen = 0;
void count_warning(const std::string&) { ++warnings_seen; }

TEST(NullDensity, StandardNormalValues) {
  const auto f0 = theoretical_null();
  EXPECT_NEAR(f0(0.0), 0.3989422804014327, 1e-15);
  EXPECT_NEAR(f0(1.0), 0.24197072451914337, 1e-15);
  EXPECT_NEAR(theoretical_null(1.0, 2.0)(1.0), 0.19947114020071635, 1e-15);
  EXPECT_THROW(theoretical_null(0.0, 0.0), std::invalid_argument);
}

TEST(NormalSf, TailValues) {
  EXPECT_NEAR(normal_sf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(normal_sf(1.959963984540054), 0.025, 1e-12);
  EXPECT_NEAR(normal_sf(8.0) / 6.22096057427178e-16, 1.0, 1e-9);
}

TEST(CentralMatching, RecoversGaussianParameters) {
  struct Case { double mu, sigma; };
  for (const Case c : {Case{0.0, 1.0}, Case{1.0, 2.0}, Case{-0.5, 1.5}}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto z = normal_draws(100000, c.mu, c.sigma, seed);
      const auto f0 = fit_empirical_null(z);
      EXPECT_EQ(f0.kind, NullKind::kEmpirical);
      EXPECT_NEAR(f0.mu, c.mu, 0.05 * std::max(std::abs(c.mu), 1.0));
      EXPECT_NEAR(f0.sigma / c.sigma, 1.0, 0.05);
    }
  }
}

TEST(CentralMatching, TracksOverdispersedNull) {
  // Nulls wider than N(0,1) plus a 5% signal at +-3: the fitted null should
  // follow the inflated bulk rather than the theoretical unit scale.
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution signal(0.05);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> z(50000);
  for (double& v : z) {
    v = signal(rng) ? (sign(rng) ? 3.0 : -3.0) + normal(rng) : 1.2 * normal(rng);
  }
  const auto f0 = fit_empirical_null(z);
  EXPECT_GT(f0.sigma, 1.1);
  EXPECT_LT(f0.sigma, 1.35);
  EXPECT_NEAR(f0.mu, 0.0, 0.05);
}

TEST(CentralMatching, ShiftAndScaleEquivariant) {
  const auto z = normal_draws(20000, 0.0, 1.0, 5);
  std::vector<double> moved(z.size());
  std::transform(z.begin(), z.end(), moved.begin(), [](double v) { return 3.0 + 2.0 * v; });
  const auto a = fit_empirical_null(z);
  const auto b = fit_empirical_null(moved);
  EXPECT_NEAR(b.mu, 3.0 + 2.0 * a.mu, 1e-6);
  EXPECT_NEAR(b.sigma, 2.0 * a.sigma, 1e-6);
}

TEST(CentralMatching, DegenerateInputs) {
  EXPECT_THROW(fit_empirical_null(std::vector<double>(500, 1.25)), EstimationError);
  EXPECT_THROW(fit_empirical_null(std::vector<double>{1.0, 2.0}), EstimationError);
  std::vector<double> bad = normal_draws(2000, 0, 1, 1);
  bad[3] = std::nan("");
  EXPECT_THROW(fit_empirical_null(bad), std::invalid_argument);
}

TEST(CentralMatching, WarnsOnSmallSamples) {
  warnings_seen = 0;
  set_warning_handler(&count_warning);
  const auto f0 = fit_empirical_null(normal_draws(400, 0, 1, 2));
  set_warning_handler(nullptr);
  EXPECT_EQ(warnings_seen, 1);
  EXPECT_GT(f0.sigma, 0.0);
}

TEST(AltDensity, TableIntegratesToOne) {
  std::vector<double> theta{-2.0, 0.0, 1.5};
  std::vector<double> weights{0.2, 0.5, 0.3};
  std::vector<double> grid(2001);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -10.0 + 0.01 * static_cast<double>(i);
  const AltDensity f1(theta, weights, 1.0, grid);
  double integral = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    integral += 0.5 * (f1.table()[i] + f1.table()[i - 1]) * 0.01;
  }
  EXPECT_NEAR(integral, 1.0, 1e-6);
  // Interpolated and direct evaluation agree inside the grid; outside the
  // grid the density is convolved directly.
  EXPECT_NEAR(f1(0.123), f1.convolve(0.123), 1e-5);
  EXPECT_NEAR(f1(12.0), f1.convolve(12.0), 1e-300);
  const double direct = 0.2 * normal_pdf(0.7, -2.0, 1.0) + 0.5 * normal_pdf(0.7, 0.0, 1.0) +
                        0.3 * normal_pdf(0.7, 1.5, 1.0);
  EXPECT_NEAR(f1.convolve(0.7), direct, 1e-14);
}

TEST(PredictiveRecursion, RecoversNullMassAndAlternative) {
  const auto z = mixture_draws(20000, 0.95, 3.0, 3);
  PredictiveRecursionOptions options;
  options.seed = 42;
  const auto pr = fit_alternative_pr(z, theoretical_null(), options);
  EXPECT_GE(pr.pi0, 0.90);
  EXPECT_LE(pr.pi0, 1.00);
  const double weight_sum = std::accumulate(pr.f1.weights().begin(), pr.f1.weights().end(), 0.0);
  EXPECT_NEAR(weight_sum, 1.0, 1e-12);

  std::vector<double> grid, fitted, truth;
  for (double x = -15.0; x <= 15.0; x += 0.01) {
    grid.push_back(x);
    fitted.push_back(pr.f1(x));
    truth.push_back(normal_pdf(x, 0.0, std::sqrt(10.0)));
  }
  EXPECT_LT(testing::total_variation(grid, fitted, truth), 0.1);
}

TEST(PredictiveRecursion, NullOnlyDataKeepsMostMassOnNull) {
  const auto z = normal_draws(10000, 0, 1, 4);
  const auto pr = fit_alternative_pr(z, theoretical_null());
  EXPECT_GT(pr.pi0, 0.9);
}

TEST(PredictiveRecursion, SeedDeterminesResult) {
  const auto z = mixture_draws(3000, 0.8, 2.0, 5);
  PredictiveRecursionOptions a, b, c;
  a.seed = b.seed = 9;
  c.seed = 10;
  a.passes = b.passes = c.passes = 5;
  const auto ra = fit_alternative_pr(z, theoretical_null(), a);
  const auto rb = fit_alternative_pr(z, theoretical_null(), b);
  const auto rc = fit_alternative_pr(z, theoretical_null(), c);
  EXPECT_EQ(ra.pi0, rb.pi0);
  EXPECT_EQ(ra.f1.weights(), rb.f1.weights());
  EXPECT_NE(ra.pi0, rc.pi0);
}

TEST(PredictiveRecursion, KernelUsesNullScale) {
  const auto z = normal_draws(2000, 0, 2, 6);
  PredictiveRecursionOptions options;
  options.passes = 2;
  const auto pr = fit_alternative_pr(z, theoretical_null(0.0, 2.0), options);
  EXPECT_EQ(pr.f1.kernel_sd(), 2.0);
}

TEST(PredictiveRecursion, RejectsBadInput) {
  EXPECT_THROW(fit_alternative_pr(std::vector<double>{}, theoretical_null()), std::invalid_argument);
  EXPECT_THROW(fit_alternative_pr(std::vector<double>(100, 0.5), theoretical_null()), EstimationError);
  PredictiveRecursionOptions options;
  options.passes = 0;
  EXPECT_THROW(fit_alternative_pr(normal_draws(10, 0, 1, 1), theoretical_null(), options),
               std::invalid_argument);
}

TEST(ScalarPrior, LogOddsAndClamp) {
  EXPECT_NEAR(scalar_two_groups(0.9).beta_s, std::log(0.1 / 0.9), 1e-14);
  EXPECT_NEAR(scalar_two_groups(0.9).c, 0.1, 1e-15);
  EXPECT_EQ(scalar_two_groups(1.0).beta_s, -kLogOddsClamp);
  EXPECT_EQ(scalar_two_groups(0.0).beta_s, kLogOddsClamp);
  EXPECT_THROW(scalar_two_groups(1.5), std::invalid_argument);
}

TEST(TwoGroups, JsonRoundTrip) {
  const auto z = mixture_draws(2000, 0.9, 3.0, 8);
  PredictiveRecursionOptions options;
  options.passes = 3;
  const auto fit = fit_two_groups(z, theoretical_null(0.1, 1.1), options);
  const auto back = two_groups_from_json(to_json(fit));
  EXPECT_EQ(back.f0.mu, fit.f0.mu);
  EXPECT_EQ(back.f0.sigma, fit.f0.sigma);
  EXPECT_EQ(back.pi0, fit.pi0);
  EXPECT_EQ(back.f1.weights(), fit.f1.weights());
  EXPECT_EQ(back.f1(1.3), fit.f1(1.3));
}

}  // namespace
}  // namespace fdrsmooth
