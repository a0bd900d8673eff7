#include "fdrsmooth/sim.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "fdrsmooth/io.hpp"

namespace fdrsmooth {

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::kLarge: return "large";
    case Scenario::kSmall: return "small";
    case Scenario::kToy1d: return "toy1d";
    case Scenario::kCustom: return "custom";
  }
  return "custom";
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "large") return Scenario::kLarge;
  if (name == "small") return Scenario::kSmall;
  if (name == "toy1d") return Scenario::kToy1d;
  throw std::invalid_argument("unknown scenario '" + name + "' (expected large, small or toy1d)");
}

namespace {

void fill_square(PriorImage& image, double center_row, double center_col, std::size_t side_rows,
                 std::size_t side_cols, double value) {
  const auto r0 = static_cast<std::size_t>(std::lround(center_row - side_rows / 2.0));
  const auto c0 = static_cast<std::size_t>(std::lround(center_col - side_cols / 2.0));
  for (std::size_t r = r0; r < r0 + side_rows; ++r) {
    for (std::size_t c = c0; c < c0 + side_cols; ++c) {
      image.c[static_cast<Eigen::Index>(grid_node(r, c, image.cols))] = value;
    }
  }
}

}  // namespace

PriorImage make_prior_image(Scenario scenario, std::size_t rows, std::size_t cols) {
  PriorImage image;
  image.scenario = scenario;
  image.rows = rows;
  image.cols = cols;
  switch (scenario) {
    case Scenario::kToy1d: {
      if (rows != 1 || cols < 2000) {
        throw std::invalid_argument("toy1d needs a 1 x cols chain with cols >= 2000");
      }
      image.c = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(cols), 0.02);
      image.c.segment(1500, 500).setConstant(0.5);
      return image;
    }
    case Scenario::kLarge:
    case Scenario::kSmall: {
      if (rows < 8 || cols < 8) {
        throw std::invalid_argument("grid too small for the two-square prior image (need 8x8)");
      }
      const double fraction = scenario == Scenario::kLarge ? 32.0 / 128.0 : 13.0 / 128.0;
      const auto side_r = static_cast<std::size_t>(std::lround(fraction * rows));
      const auto side_c = static_cast<std::size_t>(std::lround(fraction * cols));
      image.c = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(rows * cols), 0.05);
      fill_square(image, rows / 4.0, cols / 4.0, side_r, side_c, 0.8);
      fill_square(image, 3.0 * rows / 4.0, 3.0 * cols / 4.0, side_r, side_c, 0.5);
      return image;
    }
    case Scenario::kCustom:
      break;
  }
  throw std::invalid_argument("custom prior images are built directly, not by name");
}

SignalDistribution::SignalDistribution(std::string name, std::vector<Component> components)
    : name_(std::move(name)), components_(std::move(components)) {
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0)) throw std::invalid_argument("mixture weights must be non-negative");
    if (c.kind != Kind::kPointMass && !(c.scale > 0.0)) {
      throw std::invalid_argument("mixture component scale must be positive");
    }
    total += c.weight;
  }
  if (!(total > 0.0)) throw std::invalid_argument("signal distribution has no mass");
  for (auto& c : components_) c.weight /= total;
}

SignalDistribution SignalDistribution::normal(double mean, double sd) {
  return {"normal", {{Kind::kNormal, 1.0, mean, sd}}};
}

SignalDistribution SignalDistribution::laplace(double location, double scale) {
  return {"laplace", {{Kind::kLaplace, 1.0, location, scale}}};
}

SignalDistribution SignalDistribution::point_mass(double location) {
  return {"point", {{Kind::kPointMass, 1.0, location, 0.0}}};
}

SignalDistribution SignalDistribution::named(const std::string& name) {
  if (name == "alt1") {
    return {name, {{Kind::kNormal, 0.5, -2.5, 0.5}, {Kind::kNormal, 0.5, 2.5, 0.5}}};
  }
  if (name == "alt2") return {name, {{Kind::kNormal, 1.0, 0.0, 2.0}}};
  if (name == "alt3") return {name, {{Kind::kLaplace, 1.0, 0.0, 1.0}}};
  if (name == "alt4") {
    return {name, {{Kind::kNormal, 0.3, -3.0, 1.0}, {Kind::kNormal, 0.7, 3.0, 0.5}}};
  }
  if (name == "toy") return {name, {{Kind::kNormal, 1.0, 0.0, 3.0}}};
  if (name == "null") return {name, {{Kind::kPointMass, 1.0, 0.0, 0.0}}};
  throw std::invalid_argument("unknown alternative '" + name +
                              "' (expected alt1, alt2, alt3, alt4, toy or null)");
}

double SignalDistribution::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double pick = unif(rng);
  const Component* comp = &components_.back();
  for (const auto& c : components_) {
    if (pick < c.weight) {
      comp = &c;
      break;
    }
    pick -= c.weight;
  }
  switch (comp->kind) {
    case Kind::kNormal: return std::normal_distribution<double>(comp->location, comp->scale)(rng);
    case Kind::kLaplace: {
      const double u = unif(rng) - 0.5;
      return comp->location - comp->scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
    }
    case Kind::kPointMass: return comp->location;
  }
  return 0.0;
}

double SignalDistribution::convolved_density(double z) const {
  double total = 0.0;
  for (const auto& c : components_) {
    const double x = z - c.location;
    switch (c.kind) {
      case Kind::kNormal:
        total += c.weight * normal_pdf(x, 0.0, std::sqrt(1.0 + c.scale * c.scale));
        break;
      case Kind::kLaplace: {
        // Laplace(b) convolved with N(0, 1), in log space to avoid inf * 0.
        const double b = c.scale;
        const double base = 0.5 / (b * b) - std::log(4.0 * b);
        const double left = -x / b + std::log(std::erfc((1.0 / b - x) / std::numbers::sqrt2));
        const double right = x / b + std::log(std::erfc((1.0 / b + x) / std::numbers::sqrt2));
        total += c.weight * (std::exp(base + left) + std::exp(base + right));
        break;
      }
      case Kind::kPointMass:
        total += c.weight * normal_pdf(x, 0.0, 1.0);
        break;
    }
  }
  return total;
}

SimDataset simulate(const PriorImage& prior, const SignalDistribution& alt, std::uint64_t seed) {
  const Eigen::Index n = prior.c.size();
  SimDataset data;
  data.seed = seed;
  data.scenario = to_string(prior.scenario);
  data.alternative = alt.name();
  data.h.resize(n);
  data.theta.resize(n);
  data.z.resize(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.h[i] = unif(rng) < prior.c[i] ? 1 : 0;
    data.theta[i] = data.h[i] == 1 ? alt.sample(rng) : 0.0;
    data.z[i] = data.theta[i] + noise(rng);
  }
  return data;
}

DiscoveryReport oracle_report(const SimDataset& data, const PriorImage& prior,
                              const SignalDistribution& alt, double q) {
  Eigen::VectorXd w(data.z.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double c = prior.c[i];
    const double signal = c * alt.convolved_density(data.z[i]);
    const double total = signal + (1.0 - c) * normal_pdf(data.z[i], 0.0, 1.0);
    w[i] = total > 0.0 ? signal / total : c;
  }
  return discoveries_at_fdr(w, q, Method::kOracle);
}

Rates score_report(const DiscoveryReport& report, const SimDataset& data) {
  std::size_t signals = 0;
  std::size_t true_hits = 0;
  std::size_t false_hits = 0;
  for (Eigen::Index i = 0; i < data.h.size(); ++i) {
    const bool signal = data.h[i] == 1;
    signals += signal ? 1 : 0;
    if (report.discovered[static_cast<std::size_t>(i)]) {
      (signal ? true_hits : false_hits) += 1;
    }
  }
  Rates r;
  r.discoveries = true_hits + false_hits;
  r.tpr = signals > 0 ? static_cast<double>(true_hits) / static_cast<double>(signals) : 0.0;
  r.fdp = r.discoveries > 0 ? static_cast<double>(false_hits) / static_cast<double>(r.discoveries)
                            : 0.0;
  return r;
}

ReplicateOutcome run_replicate(const PriorImage& prior, const SignalDistribution& alt,
                               std::uint64_t seed, const ReplicateOptions& options) {
  ReplicateOutcome out;
  out.data = simulate(prior, alt, seed);
  const NullDensity f0 = theoretical_null();
  const auto wants = [&](Method m) {
    return std::find(options.methods.begin(), options.methods.end(), m) != options.methods.end();
  };
  if (wants(Method::kTwoGroups) || wants(Method::kFdrSmoothing)) {
    PredictiveRecursionOptions pr = options.pr;
    pr.seed = seed ^ 0x9e3779b97f4a7c15ULL;
    out.densities = fit_two_groups(std::span<const double>(out.data.z.data(), out.data.z.size()),
                                   f0, pr);
  }
  for (const Method m : options.methods) {
    DiscoveryReport report;
    switch (m) {
      case Method::kBenjaminiHochberg:
        report = bh_procedure(out.data.z, f0, options.q);
        break;
      case Method::kTwoGroups:
        report = two_groups_report(out.data.z, *out.densities, options.q);
        break;
      case Method::kFdrSmoothing: {
        out.path = solution_path(out.data.z, prior.graph(), *out.densities, options.lambda_grid,
                                 options.path);
        report = discoveries_at_fdr(select(*out.path).w, options.q, Method::kFdrSmoothing);
        break;
      }
      case Method::kOracle:
        report = oracle_report(out.data, prior, alt, options.q);
        break;
    }
    out.rates[m] = score_report(report, out.data);
    out.reports.emplace(m, std::move(report));
  }
  return out;
}

std::uint64_t replicate_seed(std::uint64_t base, std::size_t scenario, std::size_t alternative,
                             std::size_t replicate) {
  // splitmix64 over the combined key
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  std::uint64_t h = mix(base);
  h = mix(h ^ scenario);
  h = mix(h ^ (alternative << 16));
  return mix(h ^ (replicate << 32));
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  static const std::vector<std::string> kKeys{"scenarios", "alternatives", "rows",   "cols",
                                              "replicates", "fdr",          "seed",   "methods",
                                              "lambda_grid", "pr_passes",   "threads"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw std::invalid_argument("unknown experiment config key '" + key + "'");
    }
  }
  ExperimentConfig c;
  if (j.contains("scenarios")) c.scenarios = j.at("scenarios").get<std::vector<std::string>>();
  if (j.contains("alternatives")) {
    c.alternatives = j.at("alternatives").get<std::vector<std::string>>();
  }
  if (j.contains("rows")) c.rows = j.at("rows").get<std::size_t>();
  if (j.contains("cols")) c.cols = j.at("cols").get<std::size_t>();
  if (j.contains("replicates")) c.replicates = j.at("replicates").get<int>();
  if (j.contains("fdr")) c.replicate.q = j.at("fdr").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
  if (j.contains("pr_passes")) c.replicate.pr.passes = j.at("pr_passes").get<int>();
  if (j.contains("methods")) {
    c.replicate.methods.clear();
    for (const auto& m : j.at("methods")) c.replicate.methods.push_back(method_from_string(m));
  }
  if (j.contains("lambda_grid")) {
    const auto& g = j.at("lambda_grid");
    c.replicate.lambda_grid = geometric_grid(g.at("max").get<double>(), g.at("min").get<double>(),
                                             g.at("count").get<std::size_t>());
  }
  for (const auto& s : c.scenarios) scenario_from_string(s);
  for (const auto& a : c.alternatives) SignalDistribution::named(a);
  if (c.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (!(c.replicate.q > 0.0 && c.replicate.q < 1.0)) {
    throw std::invalid_argument("fdr must lie in (0, 1)");
  }
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json methods = nlohmann::json::array();
  for (const Method m : replicate.methods) methods.push_back(fdrsmooth::to_string(m));
  return {{"scenarios", scenarios},
          {"alternatives", alternatives},
          {"rows", rows},
          {"cols", cols},
          {"replicates", replicates},
          {"fdr", replicate.q},
          {"seed", seed},
          {"methods", methods},
          {"lambda_grid",
           {{"max", replicate.lambda_grid.front()},
            {"min", replicate.lambda_grid.back()},
            {"count", replicate.lambda_grid.size()}}},
          {"pr_passes", replicate.pr.passes}};
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  struct Task {
    std::size_t scenario;
    std::size_t alternative;
    int replicate;
  };
  std::vector<PriorImage> priors;
  for (const auto& name : config.scenarios) {
    const Scenario s = scenario_from_string(name);
    priors.push_back(s == Scenario::kToy1d ? make_prior_image(s, 1, config.cols)
                                           : make_prior_image(s, config.rows, config.cols));
  }
  std::vector<SignalDistribution> alts;
  for (const auto& name : config.alternatives) alts.push_back(SignalDistribution::named(name));

  std::vector<Task> tasks;
  for (std::size_t s = 0; s < priors.size(); ++s) {
    for (std::size_t a = 0; a < alts.size(); ++a) {
      for (int r = 0; r < config.replicates; ++r) tasks.push_back({s, a, r});
    }
  }

  std::vector<std::optional<std::map<Method, Rates>>> outcomes(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      try {
        const auto seed = replicate_seed(config.seed, t.scenario, t.alternative,
                                         static_cast<std::size_t>(t.replicate));
        outcomes[i] =
            run_replicate(priors[t.scenario], alts[t.alternative], seed, config.replicate).rates;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  unsigned threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  for (std::size_t s = 0; s < priors.size(); ++s) {
    for (std::size_t a = 0; a < alts.size(); ++a) {
      for (const Method m : config.replicate.methods) {
        SummaryRow row{config.scenarios[s], config.alternatives[a], m, 0.0, 0.0, 0, 0};
        for (std::size_t i = 0; i < tasks.size(); ++i) {
          if (tasks[i].scenario != s || tasks[i].alternative != a) continue;
          if (!outcomes[i]) {
            ++row.failures;
            continue;
          }
          const Rates& r = outcomes[i]->at(m);
          result.rows.push_back({config.scenarios[s], config.alternatives[a], m,
                                 tasks[i].replicate, r.tpr, r.fdp, r.discoveries});
          row.mean_tpr += r.tpr;
          row.mean_fdp += r.fdp;
          ++row.replicates;
        }
        if (row.replicates > 0) {
          row.mean_tpr /= row.replicates;
          row.mean_fdp /= row.replicates;
        }
        result.summary.push_back(row);
      }
    }
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!outcomes[i]) {
      result.failures.push_back(config.scenarios[tasks[i].scenario] + "/" +
                                config.alternatives[tasks[i].alternative] + " replicate " +
                                std::to_string(tasks[i].replicate) + ": " + errors[i]);
    }
  }
  return result;
}

void write_metrics_csv(std::ostream& out, const ExperimentResult& result) {
  out << "scenario,alternative,method,replicate,tpr,fdp,discoveries\n";
  for (const auto& r : result.rows) {
    out << r.scenario << ',' << r.alternative << ',' << to_string(r.method) << ',' << r.replicate
        << ',' << format_number(r.tpr) << ',' << format_number(r.fdp) << ',' << r.discoveries
        << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result) {
  out << "scenario,alternative,method,mean_tpr,mean_fdp,replicates,failures\n";
  for (const auto& r : result.summary) {
    out << r.scenario << ',' << r.alternative << ',' << to_string(r.method) << ','
        << format_number(r.mean_tpr) << ',' << format_number(r.mean_fdp) << ',' << r.replicates
        << ',' << r.failures << '\n';
  }
}

void write_table_csv(std::ostream& out, const ExperimentResult& result) {
  std::vector<std::string> columns;
  std::vector<Method> methods;
  for (const auto& r : result.summary) {
    const std::string col = r.scenario + "/" + r.alternative;
    if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
  }
  out << "metric,method";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (const char* metric : {"tpr", "fdr"}) {
    for (const Method m : methods) {
      out << metric << ',' << to_string(m);
      for (const auto& c : columns) {
        for (const auto& r : result.summary) {
          if (r.method == m && r.scenario + "/" + r.alternative == c) {
            out << ',' << format_number(metric[0] == 't' ? r.mean_tpr : r.mean_fdp);
          }
        }
      }
      out << '\n';
    }
  }
}

}  // namespace fdrsmooth
