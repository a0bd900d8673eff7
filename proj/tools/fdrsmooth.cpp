// Command-line front end: analyze, path and simulate.
//
// Exit codes: 0 success, 2 malformed input or invalid configuration,
// 3 estimation failure, 1 anything else (I/O trouble writing outputs).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdrsmooth/fdrsmooth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fdrsmooth;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitEstimation = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string input;
  std::string grid;
  std::string edges;
  std::string null_mode = "theoretical";
  std::optional<double> mu0;
  std::optional<double> sigma0;
  double fdr = 0.10;
  std::string lambda_grid = "0.02:2:20";
  int pr_passes = 50;
  std::uint64_t seed = 1;
  std::string out = ".";
  unsigned threads = 0;
};

struct SimulateOptions {
  std::string config;
  std::string grid;
  std::string scenarios = "large,small";
  std::string alternatives = "alt1,alt2,alt3,alt4";
  std::string methods = "fdrs,2g,bh,oracle";
  int replicates = 20;
  bool full_scale = false;
};

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  std::size_t rows = 0, cols = 0;
  std::size_t used_r = 0, used_c = 0;
  try {
    if (x == std::string::npos) throw std::invalid_argument("");
    rows = std::stoul(text.substr(0, x), &used_r);
    cols = std::stoul(text.substr(x + 1), &used_c);
  } catch (const std::exception&) {
    throw UsageError("--grid: expected ROWSxCOLS, got '" + text + "'");
  }
  if (used_r != x || used_c != text.size() - x - 1 || rows == 0 || cols == 0) {
    throw UsageError("--grid: expected positive ROWSxCOLS, got '" + text + "'");
  }
  return {rows, cols};
}

std::vector<double> parse_lambda_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 3) throw UsageError("--lambda-grid: expected MIN:MAX:COUNT, got '" + text + "'");
  double lo = 0.0, hi = 0.0;
  long count = 0;
  try {
    std::size_t a = 0, b = 0, c = 0;
    lo = std::stod(parts[0], &a);
    hi = std::stod(parts[1], &b);
    count = std::stol(parts[2], &c);
    if (a != parts[0].size() || b != parts[1].size() || c != parts[2].size()) {
      throw std::invalid_argument("");
    }
  } catch (const std::exception&) {
    throw UsageError("--lambda-grid: expected MIN:MAX:COUNT, got '" + text + "'");
  }
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) {
    throw UsageError("--lambda-grid: need 0 < MIN <= MAX and COUNT >= 1");
  }
  if (count == 1) {
    if (lo != hi) throw UsageError("--lambda-grid: a single-value grid needs MIN == MAX");
    return {hi};
  }
  if (!(hi > lo)) throw UsageError("--lambda-grid: MAX must exceed MIN when COUNT > 1");
  return geometric_grid(hi, lo, static_cast<std::size_t>(count));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

// Rounds every floating-point value to 10 significant digits so that JSON
// output matches the CSV precision.
json rounded(const json& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) return nullptr;
    return std::stod(format_number(v));
  }
  if (j.is_array() || j.is_object()) {
    json copy = j;
    for (auto& item : copy) item = rounded(item);
    return copy;
  }
  return j;
}

struct Header {
  std::string command;
  std::string config_hash;
  std::uint64_t seed;

  void write_csv(std::ostream& out) const {
    out << "# fdrsmooth " << FDRSMOOTH_VERSION << '\n'
        << "# command " << command << '\n'
        << "# config_hash " << config_hash << '\n'
        << "# seed " << seed << '\n';
  }
  json to_json() const {
    return {{"version", FDRSMOOTH_VERSION},
            {"command", command},
            {"config_hash", config_hash},
            {"seed", seed}};
  }
};

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

void write_json(const fs::path& dir, const std::string& name, const Header& header, json body) {
  json doc = {{"header", header.to_json()}};
  for (auto& [key, value] : body.items()) doc[key] = rounded(value);
  auto out = open_output(dir, name);
  out << doc.dump(2) << '\n';
}

struct AnalysisInput {
  Eigen::VectorXd z;
  SiteGraph graph;
  json config;
  std::vector<double> lambdas;
};

AnalysisInput load_analysis(const CommonOptions& o, const std::string& command) {
  if (o.input.empty()) throw UsageError("--input is required");
  if (o.grid.empty() == o.edges.empty()) {
    throw UsageError("exactly one of --grid and --edges is required");
  }
  if (!(o.fdr > 0.0 && o.fdr < 1.0)) {
    throw UsageError("--fdr: must lie in (0, 1), got " + format_number(o.fdr));
  }
  if (o.null_mode != "theoretical" && o.null_mode != "empirical") {
    throw UsageError("--null: expected 'theoretical' or 'empirical', got '" + o.null_mode + "'");
  }
  if (o.null_mode == "empirical" && (o.mu0 || o.sigma0)) {
    throw UsageError("--mu0/--sigma0 apply only to --null theoretical");
  }
  if (o.sigma0 && !(*o.sigma0 > 0.0)) throw UsageError("--sigma0: must be positive");
  if (o.pr_passes < 1) throw UsageError("--pr-passes: must be >= 1");

  AnalysisInput in;
  in.lambdas = parse_lambda_grid(o.lambda_grid);
  std::ifstream file(o.input);
  if (!file) throw UsageError("--input: cannot open '" + o.input + "'");
  json graph_spec;
  if (!o.grid.empty()) {
    const auto [rows, cols] = parse_grid(o.grid);
    in.z = read_grid_values(file, rows, cols, o.input);
    in.graph = build_grid_graph(rows, cols);
    graph_spec = {{"grid", {rows, cols}}};
  } else {
    in.z = read_site_values(file, o.input);
    std::ifstream edges(o.edges);
    if (!edges) throw UsageError("--edges: cannot open '" + o.edges + "'");
    in.graph = read_edge_list(edges, static_cast<std::size_t>(in.z.size()), o.edges);
    graph_spec = {{"edges", o.edges}, {"num_edges", in.graph.num_edges()}};
  }

  // Input content is part of the hash so that two runs on different data
  // never share a config hash.
  std::ostringstream zs;
  for (const double v : in.z) zs << format_number(v) << '\n';
  in.config = {{"command", command},
               {"graph", graph_spec},
               {"null", o.null_mode},
               {"mu0", o.mu0.value_or(0.0)},
               {"sigma0", o.sigma0.value_or(1.0)},
               {"fdr", o.fdr},
               {"lambda_grid", in.lambdas},
               {"pr_passes", o.pr_passes},
               {"seed", o.seed},
               {"input_hash", hex64(fnv1a(zs.str()))}};
  return in;
}

TwoGroupsFit fit_densities(const CommonOptions& o, const Eigen::VectorXd& z) {
  const std::span<const double> values(z.data(), static_cast<std::size_t>(z.size()));
  const NullDensity f0 = o.null_mode == "empirical"
                             ? fit_empirical_null(values)
                             : theoretical_null(o.mu0.value_or(0.0), o.sigma0.value_or(1.0));
  PredictiveRecursionOptions pr;
  pr.passes = o.pr_passes;
  pr.seed = o.seed;
  return fit_two_groups(values, f0, pr);
}

PathResult run_path(const AnalysisInput& in, const TwoGroupsFit& densities) {
  PathResult path = solution_path(in.z, in.graph, densities, in.lambdas);
  select_index(path);  // throws PathFailureError when every fit failed
  return path;
}

int cmd_analyze(const CommonOptions& o) {
  const auto in = load_analysis(o, "analyze");
  const Header header{"analyze", hex64(fnv1a(in.config.dump())), o.seed};
  const auto densities = fit_densities(o, in.z);
  const auto path = run_path(in, densities);
  const auto& chosen = path.points[path.selected];
  const auto report = discoveries_at_fdr(chosen.fit.w, o.fdr);
  const Eigen::VectorXd c = prior_probabilities(chosen.fit.beta);

  fs::create_directories(o.out);
  {
    auto out = open_output(o.out, "discoveries.csv");
    header.write_csv(out);
    out << "site_id,z,w,lfdr\n";
    for (Eigen::Index i = 0; i < in.z.size(); ++i) {
      if (!report.discovered[static_cast<std::size_t>(i)]) continue;
      out << i << ',' << format_number(in.z[i]) << ',' << format_number(report.w[i]) << ','
          << format_number(1.0 - report.w[i]) << '\n';
    }
  }
  {
    json sites = json::array();
    for (Eigen::Index i = 0; i < in.z.size(); ++i) {
      sites.push_back({{"site_id", i},
                       {"z", in.z[i]},
                       {"beta", chosen.fit.beta[i]},
                       {"c", c[i]},
                       {"w", report.w[i]},
                       {"lfdr", 1.0 - report.w[i]},
                       {"discovered", static_cast<bool>(report.discovered[static_cast<std::size_t>(i)])}});
    }
    write_json(o.out, "sites.json", header,
               {{"config", in.config},
                {"selected_lambda", chosen.lambda},
                {"plateaus", chosen.plateaus},
                {"fdr_level", o.fdr},
                {"num_discoveries", report.num_discoveries},
                {"estimated_fdr", report.estimated_fdr},
                {"converged", chosen.fit.converged},
                {"sites", sites}});
  }
  {
    auto out = open_output(o.out, "path.csv");
    header.write_csv(out);
    write_path_csv(out, path);
  }
  write_json(o.out, "densities.json", header, {{"config", in.config}, {"densities", to_json(densities)}});
  std::cout << report.num_discoveries << " discoveries at FDR " << format_number(o.fdr)
            << " (lambda " << format_number(chosen.lambda) << ", " << chosen.plateaus
            << " plateaus); outputs in " << o.out << '\n';
  return 0;
}

int cmd_path(const CommonOptions& o) {
  const auto in = load_analysis(o, "path");
  const Header header{"path", hex64(fnv1a(in.config.dump())), o.seed};
  const auto densities = fit_densities(o, in.z);
  const auto path = run_path(in, densities);
  fs::create_directories(o.out);
  {
    auto out = open_output(o.out, "path.csv");
    header.write_csv(out);
    write_path_csv(out, path);
  }
  write_json(o.out, "densities.json", header, {{"config", in.config}, {"densities", to_json(densities)}});
  std::cout << "path over " << path.points.size() << " lambda values; BIC selects lambda "
            << format_number(path.points[path.selected].lambda) << "; trace in "
            << (fs::path(o.out) / "path.csv").string() << '\n';
  return 0;
}

int cmd_simulate(const CommonOptions& o, const SimulateOptions& s, const CLI::App& sub) {
  ExperimentConfig config;
  if (!s.config.empty()) {
    std::ifstream file(s.config);
    if (!file) throw UsageError("--config: cannot open '" + s.config + "'");
    json j;
    try {
      j = json::parse(file);
    } catch (const json::parse_error& e) {
      throw InputError(s.config, 0, e.what());
    }
    try {
      config = ExperimentConfig::from_json(j);
    } catch (const json::exception& e) {
      throw UsageError(s.config + ": " + e.what());
    }
  } else {
    config.scenarios = split_list(s.scenarios);
    config.alternatives = split_list(s.alternatives);
    config.replicates = s.replicates;
  }
  const auto given = [&](const char* name) { return sub.count(name) > 0; };
  if (given("--scenarios")) config.scenarios = split_list(s.scenarios);
  if (given("--alternatives")) config.alternatives = split_list(s.alternatives);
  if (given("--replicates")) config.replicates = s.replicates;
  if (given("--methods") || s.config.empty()) {
    config.replicate.methods.clear();
    for (const auto& m : split_list(s.methods)) {
      try {
        config.replicate.methods.push_back(method_from_string(m));
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--methods: ") + e.what());
      }
    }
  }
  if (given("--fdr") || s.config.empty()) config.replicate.q = o.fdr;
  if (given("--seed") || s.config.empty()) config.seed = o.seed;
  if (given("--pr-passes") || s.config.empty()) config.replicate.pr.passes = o.pr_passes;
  if (given("--lambda-grid") || s.config.empty()) {
    config.replicate.lambda_grid = parse_lambda_grid(o.lambda_grid);
  }
  if (given("--threads") || s.config.empty()) config.threads = o.threads;
  if (s.full_scale) {
    config.rows = config.cols = 128;
    config.replicates = 100;
  }
  if (given("--grid")) {
    const auto [rows, cols] = parse_grid(s.grid);
    config.rows = rows;
    config.cols = cols;
  }
  // Re-validate the merged configuration through the same path as a file.
  const json resolved = config.to_json();
  const unsigned threads = config.threads;
  config = ExperimentConfig::from_json(resolved);
  config.threads = threads;
  if (config.scenarios.empty() || config.alternatives.empty() || config.replicate.methods.empty()) {
    throw UsageError("simulate needs at least one scenario, alternative and method");
  }
  for (const auto& name : config.scenarios) {
    if (name == "toy1d" && config.cols < 2000) {
      throw UsageError("scenario toy1d needs --grid 1xCOLS with COLS >= 2000");
    }
    if (name != "toy1d") make_prior_image(scenario_from_string(name), config.rows, config.cols);
  }

  const json hashed = config.to_json();
  const Header header{"simulate", hex64(fnv1a(hashed.dump())), config.seed};
  const auto result = run_experiment(config);

  fs::create_directories(o.out);
  {
    auto out = open_output(o.out, "metrics.csv");
    header.write_csv(out);
    write_metrics_csv(out, result);
  }
  {
    auto out = open_output(o.out, "summary.csv");
    header.write_csv(out);
    write_summary_csv(out, result);
  }
  {
    auto out = open_output(o.out, "table.csv");
    header.write_csv(out);
    write_table_csv(out, result);
  }
  json summary = json::array();
  for (const auto& r : result.summary) {
    summary.push_back({{"scenario", r.scenario},
                       {"alternative", r.alternative},
                       {"method", to_string(r.method)},
                       {"mean_tpr", r.mean_tpr},
                       {"mean_fdp", r.mean_fdp},
                       {"replicates", r.replicates},
                       {"failures", r.failures}});
  }
  write_json(o.out, "summary.json", header,
             {{"config", hashed}, {"summary", summary}, {"failures", result.failures}});
  for (const auto& f : result.failures) std::cerr << "fdrsmooth: replicate failed: " << f << '\n';
  std::cout << result.rows.size() << " metric rows, " << result.failures.size()
            << " failed replicates; outputs in " << o.out << '\n';
  return 0;
}

void add_common(CLI::App& app, CommonOptions& o, bool analysis) {
  if (analysis) {
    app.add_option("--input", o.input, "z-scores: row-major grid values or site_id,z CSV")
        ->required();
    app.add_option("--edges", o.edges, "edge list file, one 'j k' pair per line (0-indexed)");
    app.add_option("--null", o.null_mode, "null density: theoretical or empirical");
    app.add_option("--mu0", o.mu0, "theoretical null mean (default 0)");
    app.add_option("--sigma0", o.sigma0, "theoretical null sd (default 1)");
  }
  app.add_option("--fdr", o.fdr, "target false discovery rate (default 0.10)");
  app.add_option("--lambda-grid", o.lambda_grid, "MIN:MAX:COUNT geometric grid (default 0.02:2:20)");
  app.add_option("--pr-passes", o.pr_passes, "predictive recursion passes (default 50)");
  app.add_option("--seed", o.seed, "random seed (default 1)");
  app.add_option("--out", o.out, "output directory (default .)");
  app.add_option("--threads", o.threads, "worker threads, 0 = all cores (default 0)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"False discovery rate smoothing over graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("fdrsmooth ") + FDRSMOOTH_VERSION);

  CommonOptions analyze_opts, path_opts, sim_opts;
  SimulateOptions sim;

  auto* analyze = app.add_subcommand("analyze", "Fit, select lambda by BIC and report discoveries");
  add_common(*analyze, analyze_opts, true);
  analyze->add_option("--grid", analyze_opts.grid, "grid dimensions ROWSxCOLS");

  auto* path = app.add_subcommand("path", "Trace the solution path and write path.csv");
  add_common(*path, path_opts, true);
  path->add_option("--grid", path_opts.grid, "grid dimensions ROWSxCOLS");

  auto* simulate = app.add_subcommand("simulate", "Run the simulation study");
  add_common(*simulate, sim_opts, false);
  simulate->add_option("--config", sim.config, "experiment configuration JSON");
  simulate->add_option("--grid", sim.grid, "grid dimensions ROWSxCOLS (default 64x64)");
  simulate->add_option("--scenarios", sim.scenarios, "comma list of large, small, toy1d");
  simulate->add_option("--alternatives", sim.alternatives, "comma list of alt1..alt4, toy");
  simulate->add_option("--methods", sim.methods, "comma list of fdrs, 2g, bh, oracle");
  simulate->add_option("--replicates", sim.replicates, "replicates per cell (default 20)");
  simulate->add_flag("--full-scale", sim.full_scale, "128x128 grid with 100 replicates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(analyze_opts);
    if (path->parsed()) return cmd_path(path_opts);
    return cmd_simulate(sim_opts, sim, *simulate);
  } catch (const InputError& e) {
    std::cerr << "fdrsmooth: error: " << e.what() << '\n';
    return kExitInput;
  } catch (const UsageError& e) {
    std::cerr << "fdrsmooth: error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "fdrsmooth: error: " << e.what() << '\n';
    return kExitInput;
  } catch (const EstimationError& e) {
    std::cerr << "fdrsmooth: estimation failed: " << e.what() << '\n';
    return kExitEstimation;
  } catch (const NonConvergenceError& e) {
    std::cerr << "fdrsmooth: estimation failed: " << e.what() << '\n';
    return kExitEstimation;
  } catch (const PathFailureError& e) {
    std::cerr << "fdrsmooth: estimation failed: " << e.what() << '\n';
    return kExitEstimation;
  } catch (const std::exception& e) {
    std::cerr << "fdrsmooth: error: " << e.what() << '\n';
    return 1;
  }
}
