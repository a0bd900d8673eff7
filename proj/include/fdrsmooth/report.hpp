#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "fdrsmooth/density.hpp"

namespace fdrsmooth {

enum class Method { kFdrSmoothing, kTwoGroups, kBenjaminiHochberg, kOracle };

std::string to_string(Method method);
/// Accepts "fdrs", "fdr-smoothing", "2g", "two-groups", "bh", "oracle".
Method method_from_string(const std::string& name);

struct DiscoveryReport {
  Method method = Method::kFdrSmoothing;
  double level = 0.0;
  /// Posterior signal probabilities; empty for BH.
  Eigen::VectorXd w;
  /// Two-sided p-values; only filled for BH.
  Eigen::VectorXd p_values;
  std::vector<bool> discovered;
  std::size_t num_discoveries = 0;
  /// Mean local fdr of the reported set (posterior methods) or the BH
  /// estimate n * p_(k) / k; zero for an empty set.
  double estimated_fdr = 0.0;

  Eigen::VectorXd local_fdr() const { return (1.0 - w.array()).matrix(); }
};

/// Largest set of sites, taken in increasing local fdr, whose mean local fdr
/// is at most q. Sites with tied local fdr enter or leave together.
DiscoveryReport discoveries_at_fdr(const Eigen::VectorXd& w, double q,
                                   Method method = Method::kFdrSmoothing);

/// Two-sided p-values 2 * (1 - Phi(|z - mu0| / sigma0)).
Eigen::VectorXd two_sided_p_values(const Eigen::VectorXd& z, const NullDensity& f0);

/// Benjamini-Hochberg step-up on already computed p-values.
DiscoveryReport bh_from_p_values(const Eigen::VectorXd& p, double q);
DiscoveryReport bh_procedure(const Eigen::VectorXd& z, const NullDensity& f0, double q);

/// Posterior with a single spatially constant prior c.
Eigen::VectorXd two_groups_posterior(const Eigen::VectorXd& z, const TwoGroupsFit& fit);
DiscoveryReport two_groups_report(const Eigen::VectorXd& z, const TwoGroupsFit& fit, double q);

/// Flat CSV: site_id,z,w,lfdr,discovered
void write_report_csv(std::ostream& out, const DiscoveryReport& report, const Eigen::VectorXd& z);
nlohmann::json to_json(const DiscoveryReport& report, const Eigen::VectorXd& z);

}  // namespace fdrsmooth
