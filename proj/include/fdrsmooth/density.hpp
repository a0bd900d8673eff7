#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace fdrsmooth {

enum class NullKind { kTheoretical, kEmpirical };

std::string to_string(NullKind kind);

/// Gaussian null N(mu, sigma^2).
struct NullDensity {
  double mu = 0.0;
  double sigma = 1.0;
  NullKind kind = NullKind::kTheoretical;

  double operator()(double z) const;
  Eigen::VectorXd evaluate(const Eigen::VectorXd& z) const;
};

NullDensity theoretical_null(double mu = 0.0, double sigma = 1.0);

struct CentralMatchingOptions {
  double central_fraction = 1.0 / 3.0;
  /// Histogram of the full sample used for the smooth log-density estimate.
  int histogram_bins = 120;
  /// Degree of the Poisson-regression polynomial for the log density.
  int smoother_degree = 6;
  std::size_t min_recommended_size = 1000;
};

/// Central matching: a smooth log-density estimate g(z) is obtained by
/// Poisson regression of histogram counts on a degree-6 Legendre basis. On the
/// central fraction of the sorted sample, g is matched by
///   q(z) = d2 (z - z0)^2 + d1 (z - z0) + d0,   z0 = argmax of g,
/// giving mu0 = z0 - d1 / (2 d2) and sigma0 = sqrt(-1 / (2 d2)).
/// Throws EstimationError when the matched quadratic is not concave.
NullDensity fit_empirical_null(std::span<const double> z,
                               const CentralMatchingOptions& options = {});

/// Alternative density f1 = pi * N(0, sigma0^2), with the mixing distribution
/// pi held as point masses on a uniform theta grid. f1 is tabulated on a z grid
/// and evaluated by linear interpolation; outside the grid the convolution is
/// evaluated directly.
class AltDensity {
 public:
  AltDensity() = default;
  AltDensity(std::vector<double> theta_grid, std::vector<double> weights, double kernel_sd,
             std::vector<double> z_grid);

  double operator()(double z) const;
  Eigen::VectorXd evaluate(const Eigen::VectorXd& z) const;
  /// Direct convolution sum, ignoring the tabulation.
  double convolve(double z) const;

  const std::vector<double>& theta_grid() const noexcept { return theta_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& z_grid() const noexcept { return z_grid_; }
  const std::vector<double>& table() const noexcept { return table_; }
  double kernel_sd() const noexcept { return kernel_sd_; }

 private:
  std::vector<double> theta_;
  std::vector<double> weights_;
  double kernel_sd_ = 1.0;
  std::vector<double> z_grid_;
  std::vector<double> table_;
};

struct PredictiveRecursionOptions {
  int passes = 50;
  std::uint64_t seed = 0;
  int theta_points = 201;
  int z_points = 401;
  double initial_null_mass = 0.95;
  /// gamma_i = (i + 1)^(-decay), i counted across passes.
  double decay = 0.67;
};

struct PredictiveRecursionResult {
  AltDensity f1;
  double pi0 = 0.0;
};

/// Predictive recursion for the mixing measure pi0 * delta_null + (1 - pi0) * pi,
/// with observations revisited in a freshly shuffled order on each pass.
/// Throws EstimationError when all observations are identical.
PredictiveRecursionResult fit_alternative_pr(std::span<const double> z, const NullDensity& f0,
                                             const PredictiveRecursionOptions& options = {});

inline constexpr double kLogOddsClamp = 15.0;

struct ScalarPrior {
  double c = 0.0;       // prior signal probability
  double beta_s = 0.0;  // logit(c), clamped to [-15, 15]
};

ScalarPrior scalar_two_groups(double pi0);

struct TwoGroupsFit {
  NullDensity f0;
  AltDensity f1;
  double pi0 = 0.0;
  ScalarPrior prior;
};

/// Theoretical or empirical null followed by predictive recursion for f1.
TwoGroupsFit fit_two_groups(std::span<const double> z, const NullDensity& f0,
                            const PredictiveRecursionOptions& options = {});

nlohmann::json to_json(const NullDensity& f0);
nlohmann::json to_json(const AltDensity& f1);
nlohmann::json to_json(const TwoGroupsFit& fit);
TwoGroupsFit two_groups_from_json(const nlohmann::json& j);

double normal_pdf(double z, double mean, double sd);
/// Upper tail 1 - Phi(x).
double normal_sf(double x);

}  // namespace fdrsmooth
