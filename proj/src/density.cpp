#include "fdrsmooth/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "fdrsmooth/errors.hpp"

namespace fdrsmooth {

double normal_pdf(double z, double mean, double sd) {
  const double u = (z - mean) / sd;
  return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

std::string to_string(NullKind kind) {
  return kind == NullKind::kTheoretical ? "theoretical" : "empirical";
}

double NullDensity::operator()(double z) const { return normal_pdf(z, mu, sigma); }

Eigen::VectorXd NullDensity::evaluate(const Eigen::VectorXd& z) const {
  return z.unaryExpr([this](double v) { return (*this)(v); });
}

NullDensity theoretical_null(double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
    throw std::invalid_argument("null density needs finite mu and positive sigma");
  }
  return {mu, sigma, NullKind::kTheoretical};
}

namespace {

// Legendre polynomials P_0..P_degree at s in [-1, 1].
void legendre_row(double s, int degree,
                  Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
  row[0] = 1.0;
  if (degree >= 1) row[1] = s;
  for (int k = 2; k <= degree; ++k) {
    row[k] = ((2.0 * k - 1.0) * s * row[k - 1] - (k - 1.0) * row[k - 2]) / k;
  }
}

// Poisson regression of counts on X by iteratively reweighted least squares.
Eigen::VectorXd poisson_regression(const Eigen::MatrixXd& x, const Eigen::VectorXd& counts) {
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(x.cols());
  coef[0] = std::log(std::max(counts.mean(), 1e-12));
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd eta = x * coef;
    const Eigen::VectorXd mu = eta.array().exp().max(1e-300).matrix();
    const Eigen::VectorXd working = eta.array() + (counts - mu).array() / mu.array();
    const Eigen::MatrixXd xtw = x.transpose() * mu.asDiagonal();
    const Eigen::VectorXd next = (xtw * x).ldlt().solve(xtw * working);
    const double step = (next - coef).cwiseAbs().maxCoeff();
    coef = next;
    if (!coef.allFinite()) break;
    if (step < 1e-10) break;
  }
  return coef;
}

}  // namespace

NullDensity fit_empirical_null(std::span<const double> z, const CentralMatchingOptions& options) {
  const std::size_t n = z.size();
  if (n < 3) throw EstimationError("central matching needs at least 3 observations");
  if (n < options.min_recommended_size) {
    warn("central matching on " + std::to_string(n) +
         " observations is unreliable; consider the theoretical null");
  }
  if (!(options.central_fraction > 0.0 && options.central_fraction <= 1.0)) {
    throw std::invalid_argument("central fraction must lie in (0, 1]");
  }
  if (!std::all_of(z.begin(), z.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("central matching: non-finite z value");
  }
  std::vector<double> sorted(z.begin(), z.end());
  std::sort(sorted.begin(), sorted.end());

  const auto central =
      std::max<std::size_t>(3, static_cast<std::size_t>(std::llround(options.central_fraction * n)));
  const std::size_t first = (n - std::min(central, n)) / 2;
  const double central_lo = sorted[first];
  const double central_hi = sorted[std::min(first + central, n) - 1];

  // Histogram over the 0.1%..99.9% quantile range so a few outliers cannot
  // flatten the bins near the centre.
  const std::size_t trim = n / 1000;
  const double lo = sorted[trim];
  const double hi = sorted[n - 1 - trim];
  if (!(hi > lo) || !(central_hi > central_lo)) {
    throw EstimationError("central matching: z values are (nearly) all identical");
  }
  const int bins = options.histogram_bins;
  const int degree = options.smoother_degree;
  const double width = (hi - lo) / bins;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(bins);
  for (std::size_t i = trim; i < n - trim; ++i) {
    const auto b = std::min(bins - 1, static_cast<int>((sorted[i] - lo) / width));
    counts[b] += 1.0;
  }
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  Eigen::MatrixXd basis(bins, degree + 1);
  for (int b = 0; b < bins; ++b) {
    const double center = lo + (b + 0.5) * width;
    legendre_row((center - mid) / half, degree, basis.row(b));
  }
  const Eigen::VectorXd coef = poisson_regression(basis, counts);
  if (!coef.allFinite()) throw EstimationError("central matching: log-density fit diverged");

  constexpr int kMatchPoints = 64;
  Eigen::VectorXd grid(kMatchPoints);
  Eigen::VectorXd log_density(kMatchPoints);
  Eigen::RowVectorXd row(degree + 1);
  for (int i = 0; i < kMatchPoints; ++i) {
    grid[i] = central_lo + (central_hi - central_lo) * i / (kMatchPoints - 1);
    legendre_row((grid[i] - mid) / half, degree, row);
    log_density[i] = row.dot(coef);
  }
  Eigen::Index peak = 0;
  log_density.maxCoeff(&peak);
  const double z0 = grid[peak];

  Eigen::MatrixXd design(kMatchPoints, 3);
  for (int i = 0; i < kMatchPoints; ++i) {
    const double d = grid[i] - z0;
    design(i, 0) = d * d;
    design(i, 1) = d;
    design(i, 2) = 1.0;
  }
  const Eigen::Vector3d q = design.colPivHouseholderQr().solve(log_density);
  const double d2 = q[0];
  const double d1 = q[1];
  if (!(d2 < 0.0)) {
    throw EstimationError(
        "central matching produced a non-concave log density; use the theoretical null");
  }
  return {z0 - d1 / (2.0 * d2), std::sqrt(-1.0 / (2.0 * d2)), NullKind::kEmpirical};
}

AltDensity::AltDensity(std::vector<double> theta_grid, std::vector<double> weights,
                       double kernel_sd, std::vector<double> z_grid)
    : theta_(std::move(theta_grid)),
      weights_(std::move(weights)),
      kernel_sd_(kernel_sd),
      z_grid_(std::move(z_grid)) {
  if (theta_.size() != weights_.size() || theta_.empty()) {
    throw std::invalid_argument("AltDensity: theta grid and weights must be non-empty and aligned");
  }
  if (!(kernel_sd_ > 0.0)) throw std::invalid_argument("AltDensity: kernel sd must be positive");
  if (z_grid_.size() == 1) throw std::invalid_argument("AltDensity: z grid needs two points");
  table_.resize(z_grid_.size());
  for (std::size_t i = 0; i < z_grid_.size(); ++i) table_[i] = convolve(z_grid_[i]);
}

double AltDensity::convolve(double z) const {
  double total = 0.0;
  for (std::size_t j = 0; j < theta_.size(); ++j) {
    if (weights_[j] > 0.0) total += weights_[j] * normal_pdf(z, theta_[j], kernel_sd_);
  }
  return total;
}

double AltDensity::operator()(double z) const {
  if (z_grid_.empty() || z < z_grid_.front() || z > z_grid_.back()) return convolve(z);
  const double step = (z_grid_.back() - z_grid_.front()) / static_cast<double>(z_grid_.size() - 1);
  const auto i = std::min(z_grid_.size() - 2,
                          static_cast<std::size_t>((z - z_grid_.front()) / step));
  const double frac = (z - z_grid_[i]) / (z_grid_[i + 1] - z_grid_[i]);
  return (1.0 - frac) * table_[i] + frac * table_[i + 1];
}

Eigen::VectorXd AltDensity::evaluate(const Eigen::VectorXd& z) const {
  return z.unaryExpr([this](double v) { return (*this)(v); });
}

namespace {

std::vector<double> uniform_grid(double lo, double hi, int points) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[i] = lo + (hi - lo) * i / (points - 1);
  return grid;
}

// N(z | theta_j, sd^2) on a uniform theta grid. Consecutive ratios form a
// geometric sequence, so only three exponentials are needed per call.
void gaussian_kernel_row(double z, double theta0, double step, double sd,
                         std::vector<double>& out) {
  const auto points = static_cast<std::ptrdiff_t>(out.size());
  const double var = sd * sd;
  auto anchor = static_cast<std::ptrdiff_t>(std::lround((z - theta0) / step));
  anchor = std::clamp<std::ptrdiff_t>(anchor, 0, points - 1);
  const double d = z - (theta0 + step * static_cast<double>(anchor));
  out[anchor] = normal_pdf(d, 0.0, sd);
  const double shrink = std::exp(-step * step / var);
  double ratio = std::exp(d * step / var - 0.5 * step * step / var);
  for (std::ptrdiff_t j = anchor + 1; j < points; ++j) {
    out[j] = out[j - 1] * ratio;
    ratio *= shrink;
  }
  ratio = std::exp(-d * step / var - 0.5 * step * step / var);
  for (std::ptrdiff_t j = anchor - 1; j >= 0; --j) {
    out[j] = out[j + 1] * ratio;
    ratio *= shrink;
  }
}

}  // namespace

PredictiveRecursionResult fit_alternative_pr(std::span<const double> z, const NullDensity& f0,
                                             const PredictiveRecursionOptions& options) {
  if (z.empty()) throw std::invalid_argument("predictive recursion needs observations");
  if (options.passes < 1) throw std::invalid_argument("predictive recursion needs passes >= 1");
  if (options.theta_points < 2 || options.z_points < 2) {
    throw std::invalid_argument("predictive recursion grids need at least two points");
  }
  if (!std::all_of(z.begin(), z.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("predictive recursion: non-finite z value");
  }
  const auto [min_it, max_it] = std::minmax_element(z.begin(), z.end());
  const double z_min = *min_it;
  const double z_max = *max_it;
  if (!(z_max > z_min)) {
    throw EstimationError("predictive recursion: all observations are identical");
  }

  const double lo = z_min - 1.0;
  const double hi = z_max + 1.0;
  const std::vector<double> theta = uniform_grid(lo, hi, options.theta_points);
  const double step = theta[1] - theta[0];
  const double sd = f0.sigma;
  const std::size_t points = theta.size();

  double pi0 = options.initial_null_mass;
  // Alternative mass per grid point; pi0 + sum(alt) == 1.
  std::vector<double> alt(points, (1.0 - pi0) / static_cast<double>(points));
  std::vector<double> kernel(points);
  std::vector<std::size_t> order(z.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(options.seed);

  std::uint64_t visit = 0;
  for (int pass = 0; pass < options.passes; ++pass) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const std::size_t idx : order) {
      const double gamma = std::pow(static_cast<double>(++visit), -options.decay);
      const double zi = z[idx];
      gaussian_kernel_row(zi, lo, step, sd, kernel);
      double m1 = 0.0;
      for (std::size_t j = 0; j < points; ++j) m1 += alt[j] * kernel[j];
      const double m0 = pi0 * f0(zi);
      const double marginal = m0 + m1;
      if (!(marginal > 0.0)) continue;
      const double scale = gamma / marginal;
      pi0 = (1.0 - gamma) * pi0 + scale * m0;
      double total = pi0;
      for (std::size_t j = 0; j < points; ++j) {
        alt[j] = alt[j] * ((1.0 - gamma) + scale * kernel[j]);
        total += alt[j];
      }
      pi0 /= total;
      for (double& a : alt) a /= total;
    }
  }

  const double alt_mass = std::accumulate(alt.begin(), alt.end(), 0.0);
  if (!(alt_mass > 0.0)) {
    throw EstimationError("predictive recursion assigned no mass to the alternative");
  }
  std::vector<double> weights(points);
  for (std::size_t j = 0; j < points; ++j) weights[j] = alt[j] / alt_mass;
  return {AltDensity(theta, std::move(weights), sd, uniform_grid(lo, hi, options.z_points)), pi0};
}

ScalarPrior scalar_two_groups(double pi0) {
  if (!(pi0 >= 0.0 && pi0 <= 1.0)) {
    throw std::invalid_argument("null proportion must lie in [0, 1]");
  }
  const double c = 1.0 - pi0;
  double beta = std::log(c) - std::log1p(-c);
  if (std::isnan(beta)) beta = 0.0;
  beta = std::clamp(beta, -kLogOddsClamp, kLogOddsClamp);
  return {c, beta};
}

TwoGroupsFit fit_two_groups(std::span<const double> z, const NullDensity& f0,
                            const PredictiveRecursionOptions& options) {
  auto pr = fit_alternative_pr(z, f0, options);
  return {f0, std::move(pr.f1), pr.pi0, scalar_two_groups(pr.pi0)};
}

nlohmann::json to_json(const NullDensity& f0) {
  return {{"mu", f0.mu}, {"sigma", f0.sigma}, {"kind", to_string(f0.kind)}};
}

nlohmann::json to_json(const AltDensity& f1) {
  return {{"theta_grid", f1.theta_grid()},
          {"weights", f1.weights()},
          {"kernel_sd", f1.kernel_sd()},
          {"z_grid", f1.z_grid()},
          {"f1", f1.table()}};
}

nlohmann::json to_json(const TwoGroupsFit& fit) {
  return {{"f0", to_json(fit.f0)},
          {"f1", to_json(fit.f1)},
          {"pi0", fit.pi0},
          {"c", fit.prior.c},
          {"beta_s", fit.prior.beta_s}};
}

TwoGroupsFit two_groups_from_json(const nlohmann::json& j) {
  TwoGroupsFit fit;
  const auto& f0 = j.at("f0");
  fit.f0.mu = f0.at("mu").get<double>();
  fit.f0.sigma = f0.at("sigma").get<double>();
  fit.f0.kind = f0.at("kind").get<std::string>() == "empirical" ? NullKind::kEmpirical
                                                                : NullKind::kTheoretical;
  const auto& f1 = j.at("f1");
  fit.f1 = AltDensity(f1.at("theta_grid").get<std::vector<double>>(),
                      f1.at("weights").get<std::vector<double>>(),
                      f1.at("kernel_sd").get<double>(),
                      f1.at("z_grid").get<std::vector<double>>());
  fit.pi0 = j.at("pi0").get<double>();
  fit.prior = scalar_two_groups(fit.pi0);
  return fit;
}

}  // namespace fdrsmooth
