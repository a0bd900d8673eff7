#include "fdrsmooth/path.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fdrsmooth/errors.hpp"
#include "fdrsmooth/io.hpp"

namespace fdrsmooth {

InformationCriteria information_criteria(double loglik, std::size_t plateaus, std::size_t n) {
  if (n < 1 || plateaus < 1) {
    throw std::invalid_argument("information criteria need n >= 1 and k >= 1");
  }
  const double k = static_cast<double>(plateaus);
  return {-2.0 * loglik + 2.0 * k, -2.0 * loglik + std::log(static_cast<double>(n)) * k};
}

std::vector<double> geometric_grid(double hi, double lo, std::size_t count) {
  if (count == 0) throw std::invalid_argument("lambda grid needs at least one value");
  if (!(hi > 0.0 && lo > 0.0)) throw std::invalid_argument("lambda grid must be positive");
  if (count == 1) return {hi};
  if (!(hi > lo)) throw std::invalid_argument("lambda grid upper end must exceed lower end");
  std::vector<double> grid(count);
  const double ratio = std::log(lo / hi) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) grid[i] = hi * std::exp(ratio * static_cast<double>(i));
  grid.back() = lo;
  return grid;
}

std::vector<double> default_lambda_grid() { return geometric_grid(2.0, 0.02, 20); }

PathResult solution_path(FdrSmoother& smoother, const std::vector<double>& grid,
                         const Eigen::VectorXd& init, const PathOptions& options) {
  if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
      throw std::invalid_argument("lambda grid values must be positive and finite");
    }
    if (i > 0 && !(grid[i] < grid[i - 1])) {
      throw std::invalid_argument("lambda grid must be strictly decreasing");
    }
  }
  const std::size_t n = smoother.graph().num_nodes();
  PathResult path;
  path.points.reserve(grid.size());
  Eigen::VectorXd warm = init;
  for (const double lambda : grid) {
    PathPoint point;
    point.lambda = lambda;
    try {
      point.fit = smoother.fit(lambda, warm, options.em);
      point.loglik = -neg_log_likelihood(point.fit.beta, smoother.likelihoods());
      point.plateaus =
          count_plateaus(point.fit.beta, smoother.graph(), options.plateau_tolerance).size();
      const auto ic = information_criteria(point.loglik, point.plateaus, n);
      point.aic = ic.aic;
      point.bic = ic.bic;
      point.ok = std::isfinite(point.bic);
      if (!point.ok) point.error = "non-finite information criterion";
      warm = point.fit.beta;
    } catch (const std::exception& e) {
      point.ok = false;
      point.error = e.what();
      smoother.admm_state() = AdmmState{};
      warn("fit at lambda " + std::to_string(lambda) + " failed: " + e.what());
    }
    path.points.push_back(std::move(point));
  }
  bool any = false;
  for (const auto& p : path.points) any = any || p.ok;
  if (any) path.selected = select_index(path);
  return path;
}

PathResult solution_path(const Eigen::VectorXd& z, const SiteGraph& graph,
                         const TwoGroupsFit& densities, const std::vector<double>& grid,
                         const PathOptions& options) {
  FdrSmoother smoother(graph, evaluate_likelihoods(z, densities.f0, densities.f1));
  return solution_path(smoother, grid, Eigen::VectorXd::Constant(z.size(), densities.prior.beta_s),
                       options);
}

namespace {

template <typename Score>
std::size_t argmin_point(const PathResult& path, Score score) {
  std::size_t best = path.points.size();
  double best_value = std::numeric_limits<double>::infinity();
  // Points are ordered by decreasing lambda, so a strict comparison keeps
  // the larger lambda on ties.
  for (std::size_t i = 0; i < path.points.size(); ++i) {
    const auto& p = path.points[i];
    if (!p.ok) continue;
    const double value = score(p);
    if (best == path.points.size() || value < best_value) {
      best = i;
      best_value = value;
    }
  }
  if (best == path.points.size()) throw PathFailureError("every fit on the lambda path failed");
  return best;
}

}  // namespace

std::size_t select_index(const PathResult& path) {
  return argmin_point(path, [](const PathPoint& p) { return p.bic; });
}

const FitResult& select(const PathResult& path) { return path.points[select_index(path)].fit; }

std::size_t min_aic_index(const PathResult& path) {
  return argmin_point(path, [](const PathPoint& p) { return p.aic; });
}

void write_path_csv(std::ostream& out, const PathResult& path) {
  out << "lambda,loglik,plateaus,aic,bic,selected\n";
  for (std::size_t i = 0; i < path.points.size(); ++i) {
    const auto& p = path.points[i];
    out << format_number(p.lambda) << ',';
    if (p.ok) {
      out << format_number(p.loglik) << ',' << p.plateaus << ',' << format_number(p.aic) << ','
          << format_number(p.bic);
    } else {
      out << "nan,0,nan,nan";
    }
    out << ',' << (i == path.selected && p.ok ? 1 : 0) << '\n';
  }
}

}  // namespace fdrsmooth
