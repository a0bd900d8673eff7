#include "fdrsmooth/report.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fdrsmooth/io.hpp"

namespace fdrsmooth {

std::string to_string(Method method) {
  switch (method) {
    case Method::kFdrSmoothing: return "fdr-smoothing";
    case Method::kTwoGroups: return "two-groups";
    case Method::kBenjaminiHochberg: return "bh";
    case Method::kOracle: return "oracle";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "fdrs" || name == "fdr-smoothing" || name == "fdr-s") return Method::kFdrSmoothing;
  if (name == "2g" || name == "two-groups") return Method::kTwoGroups;
  if (name == "bh") return Method::kBenjaminiHochberg;
  if (name == "oracle") return Method::kOracle;
  throw std::invalid_argument("unknown method '" + name + "'");
}

namespace {

void check_level(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("FDR level must lie in (0, 1)");
}

}  // namespace

DiscoveryReport discoveries_at_fdr(const Eigen::VectorXd& w, double q, Method method) {
  check_level(q);
  const auto n = static_cast<std::size_t>(w.size());
  DiscoveryReport report;
  report.method = method;
  report.level = q;
  report.w = w;
  report.discovered.assign(n, false);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Decreasing w is increasing local fdr.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });

  double lfdr_sum = 0.0;
  std::size_t accepted = 0;
  double accepted_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    double block = 0.0;
    while (j < n && w[order[j]] == w[order[i]]) {
      block += 1.0 - w[order[j]];
      ++j;
    }
    lfdr_sum += block;
    if (lfdr_sum / static_cast<double>(j) > q) break;
    accepted = j;
    accepted_sum = lfdr_sum;
    i = j;
  }
  for (std::size_t k = 0; k < accepted; ++k) report.discovered[order[k]] = true;
  report.num_discoveries = accepted;
  report.estimated_fdr = accepted > 0 ? accepted_sum / static_cast<double>(accepted) : 0.0;
  return report;
}

Eigen::VectorXd two_sided_p_values(const Eigen::VectorXd& z, const NullDensity& f0) {
  return z.unaryExpr(
      [&](double v) { return 2.0 * normal_sf(std::abs(v - f0.mu) / f0.sigma); });
}

DiscoveryReport bh_from_p_values(const Eigen::VectorXd& p, double q) {
  check_level(q);
  const auto n = static_cast<std::size_t>(p.size());
  DiscoveryReport report;
  report.method = Method::kBenjaminiHochberg;
  report.level = q;
  report.p_values = p;
  report.discovered.assign(n, false);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::size_t k_star = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (p[order[k - 1]] <= static_cast<double>(k) * q / static_cast<double>(n)) k_star = k;
  }
  for (std::size_t k = 0; k < k_star; ++k) report.discovered[order[k]] = true;
  report.num_discoveries = k_star;
  report.estimated_fdr =
      k_star > 0 ? static_cast<double>(n) * p[order[k_star - 1]] / static_cast<double>(k_star)
                 : 0.0;
  return report;
}

DiscoveryReport bh_procedure(const Eigen::VectorXd& z, const NullDensity& f0, double q) {
  return bh_from_p_values(two_sided_p_values(z, f0), q);
}

Eigen::VectorXd two_groups_posterior(const Eigen::VectorXd& z, const TwoGroupsFit& fit) {
  const double c = fit.prior.c;
  Eigen::VectorXd w(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double signal = c * fit.f1(z[i]);
    const double total = signal + (1.0 - c) * fit.f0(z[i]);
    w[i] = total > 0.0 ? signal / total : c;
  }
  return w;
}

DiscoveryReport two_groups_report(const Eigen::VectorXd& z, const TwoGroupsFit& fit, double q) {
  return discoveries_at_fdr(two_groups_posterior(z, fit), q, Method::kTwoGroups);
}

void write_report_csv(std::ostream& out, const DiscoveryReport& report,
                      const Eigen::VectorXd& z) {
  const bool posterior = report.w.size() == z.size();
  out << (posterior ? "site_id,z,w,lfdr,discovered\n" : "site_id,z,p_value,discovered\n");
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out << i << ',' << format_number(z[i]) << ',';
    if (posterior) {
      out << format_number(report.w[i]) << ',' << format_number(1.0 - report.w[i]);
    } else {
      out << format_number(report.p_values[i]);
    }
    out << ',' << (report.discovered[static_cast<std::size_t>(i)] ? 1 : 0) << '\n';
  }
}

nlohmann::json to_json(const DiscoveryReport& report, const Eigen::VectorXd& z) {
  nlohmann::json sites = nlohmann::json::array();
  const bool posterior = report.w.size() == z.size();
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    nlohmann::json s{{"site_id", i}, {"z", z[i]},
                     {"discovered", static_cast<bool>(report.discovered[static_cast<std::size_t>(i)])}};
    if (posterior) {
      s["w"] = report.w[i];
      s["lfdr"] = 1.0 - report.w[i];
    } else {
      s["p_value"] = report.p_values[i];
    }
    sites.push_back(std::move(s));
  }
  return {{"method", to_string(report.method)},
          {"level", report.level},
          {"num_discoveries", report.num_discoveries},
          {"estimated_fdr", report.estimated_fdr},
          {"sites", std::move(sites)}};
}

}  // namespace fdrsmooth
