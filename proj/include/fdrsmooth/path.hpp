#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fdrsmooth/em.hpp"

namespace fdrsmooth {

struct InformationCriteria {
  double aic;
  double bic;
};

/// AIC = -2 loglik + 2k, BIC = -2 loglik + log(n) k.
InformationCriteria information_criteria(double loglik, std::size_t plateaus, std::size_t n);

/// `count` values geometrically spaced from hi down to lo.
std::vector<double> geometric_grid(double hi, double lo, std::size_t count);
std::vector<double> default_lambda_grid();

struct PathPoint {
  double lambda = 0.0;
  FitResult fit;
  double loglik = 0.0;
  std::size_t plateaus = 0;
  double aic = 0.0;
  double bic = 0.0;
  bool ok = false;
  std::string error;  // set when the fit threw
};

struct PathResult {
  std::vector<PathPoint> points;  // strictly decreasing lambda
  std::size_t selected = 0;       // argmin BIC, ties towards the larger lambda
};

struct PathOptions {
  EmOptions em{};
  double plateau_tolerance = kDefaultPlateauTolerance;
};

/// Fits every lambda in turn, warm-starting beta and the ADMM state from the
/// previous solution. A failed fit is recorded and the path continues.
PathResult solution_path(FdrSmoother& smoother, const std::vector<double>& grid,
                         const Eigen::VectorXd& init, const PathOptions& options = {});

PathResult solution_path(const Eigen::VectorXd& z, const SiteGraph& graph,
                         const TwoGroupsFit& densities, const std::vector<double>& grid,
                         const PathOptions& options = {});

/// Index of the min-BIC successful point; throws PathFailureError if none.
std::size_t select_index(const PathResult& path);
const FitResult& select(const PathResult& path);

/// Index minimising AIC (same tie rule), for diagnostics.
std::size_t min_aic_index(const PathResult& path);

/// CSV trace: lambda,loglik,plateaus,aic,bic,selected
void write_path_csv(std::ostream& out, const PathResult& path);

}  // namespace fdrsmooth
