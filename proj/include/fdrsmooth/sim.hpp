#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "fdrsmooth/density.hpp"
#include "fdrsmooth/graph.hpp"
#include "fdrsmooth/path.hpp"
#include "fdrsmooth/report.hpp"

namespace fdrsmooth {

enum class Scenario { kLarge, kSmall, kToy1d, kCustom };

std::string to_string(Scenario scenario);
/// Throws std::invalid_argument for unknown names.
Scenario scenario_from_string(const std::string& name);

/// True per-site prior signal probabilities on a rows x cols grid.
struct PriorImage {
  Scenario scenario = Scenario::kCustom;
  std::size_t rows = 0;
  std::size_t cols = 0;
  Eigen::VectorXd c;

  SiteGraph graph() const { return build_grid_graph(rows, cols); }
};

/// Large/small: background 0.05, a 0.8 square centred at (rows/4, cols/4)
/// and a 0.5 square centred at (3 rows/4, 3 cols/4). Square sides are 32/128
/// (large) or 13/128 (small) of the grid side, rounded. Toy1d: a 1 x cols
/// chain (cols >= 2000) with c = 0.5 on 1-based sites 1501..2000, else 0.02.
PriorImage make_prior_image(Scenario scenario, std::size_t rows, std::size_t cols);

/// Noiseless signal distribution pi(theta): a finite mixture of normal,
/// Laplace and point-mass components.
class SignalDistribution {
 public:
  enum class Kind { kNormal, kLaplace, kPointMass };
  struct Component {
    Kind kind;
    double weight;
    double location;
    double scale;  // sd for normal, b for Laplace, unused for point mass
  };

  SignalDistribution(std::string name, std::vector<Component> components);

  static SignalDistribution normal(double mean, double sd);
  static SignalDistribution laplace(double location, double scale);
  static SignalDistribution point_mass(double location);
  /// alt1..alt4, "toy" (N(0, 3^2)) and "null" (point mass at 0).
  static SignalDistribution named(const std::string& name);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Component>& components() const noexcept { return components_; }

  double sample(std::mt19937_64& rng) const;
  /// f1(z) = integral of N(z | theta, 1) pi(theta) dtheta, in closed form.
  double convolved_density(double z) const;

 private:
  std::string name_;
  std::vector<Component> components_;
};

struct SimDataset {
  Eigen::VectorXi h;
  Eigen::VectorXd theta;
  Eigen::VectorXd z;
  std::uint64_t seed = 0;
  std::string scenario;
  std::string alternative;
};

/// h_i ~ Bernoulli(c_i); theta_i ~ pi if h_i = 1, else 0; z_i ~ N(theta_i, 1).
SimDataset simulate(const PriorImage& prior, const SignalDistribution& alt, std::uint64_t seed);

/// Posterior under the true prior image and true f1, with f0 = N(0, 1).
DiscoveryReport oracle_report(const SimDataset& data, const PriorImage& prior,
                              const SignalDistribution& alt, double q);

struct Rates {
  double tpr = 0.0;
  double fdp = 0.0;
  std::size_t discoveries = 0;
};

/// TPR = true discoveries / true signals, FDP = false discoveries /
/// discoveries, with 0/0 taken as 0.
Rates score_report(const DiscoveryReport& report, const SimDataset& data);

struct ReplicateOptions {
  double q = 0.10;
  std::vector<double> lambda_grid = default_lambda_grid();
  PathOptions path{};
  PredictiveRecursionOptions pr{};
  std::vector<Method> methods{Method::kBenjaminiHochberg, Method::kTwoGroups,
                              Method::kFdrSmoothing, Method::kOracle};
};

struct ReplicateOutcome {
  SimDataset data;
  std::optional<TwoGroupsFit> densities;
  std::optional<PathResult> path;
  std::map<Method, DiscoveryReport> reports;
  std::map<Method, Rates> rates;
};

/// Simulates one data set and runs each requested method end to end. The
/// null is the theoretical N(0, 1) under which the data were generated; f1 is
/// estimated by predictive recursion, and FDR smoothing runs the full
/// path + BIC selection.
ReplicateOutcome run_replicate(const PriorImage& prior, const SignalDistribution& alt,
                               std::uint64_t seed, const ReplicateOptions& options);

struct MetricRow {
  std::string scenario;
  std::string alternative;
  Method method;
  int replicate;
  double tpr;
  double fdp;
  std::size_t discoveries;
};

struct ExperimentConfig {
  std::vector<std::string> scenarios{"large"};
  std::vector<std::string> alternatives{"alt1", "alt2", "alt3", "alt4"};
  std::size_t rows = 64;
  std::size_t cols = 64;
  int replicates = 20;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
  ReplicateOptions replicate{};

  /// Reads the declarative JSON form; unknown keys are rejected.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct SummaryRow {
  std::string scenario;
  std::string alternative;
  Method method;
  double mean_tpr;
  double mean_fdp;
  int replicates;
  int failures;
};

struct ExperimentResult {
  std::vector<MetricRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<std::string> failures;
};

std::uint64_t replicate_seed(std::uint64_t base, std::size_t scenario, std::size_t alternative,
                             std::size_t replicate);

/// Replicates run in parallel on `threads` workers; results are ordered
/// deterministically regardless of scheduling.
ExperimentResult run_experiment(const ExperimentConfig& config);

void write_metrics_csv(std::ostream& out, const ExperimentResult& result);
void write_summary_csv(std::ostream& out, const ExperimentResult& result);
/// Wide layout: one row per (metric, method), one column per scenario/alternative.
void write_table_csv(std::ostream& out, const ExperimentResult& result);

}  // namespace fdrsmooth
