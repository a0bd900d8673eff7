#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fdrsmooth/fdrsmooth.hpp"

namespace py = pybind11;
using namespace fdrsmooth;

namespace {

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

py::dict fit_to_dict(const FitResult& fit) {
  py::dict d;
  d["beta"] = fit.beta;
  d["w"] = fit.w;
  d["c"] = Eigen::VectorXd(prior_probabilities(fit.beta));
  d["objective_trace"] = fit.objective_trace;
  d["converged"] = fit.converged;
  d["iterations"] = fit.iterations;
  d["admm_iterations"] = fit.admm_iterations;
  return d;
}

std::vector<bool> discovered_flags(const DiscoveryReport& r) { return r.discovered; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "False discovery rate smoothing over graphs";
  m.attr("__version__") = FDRSMOOTH_VERSION;

  py::register_exception<EstimationError>(m, "EstimationError", PyExc_RuntimeError);
  py::register_exception<PathFailureError>(m, "PathFailureError", PyExc_RuntimeError);

  py::class_<SiteGraph>(m, "SiteGraph")
      .def(py::init<std::size_t, std::vector<std::pair<NodeId, NodeId>>>(), py::arg("num_nodes"),
           py::arg("edges"))
      .def_property_readonly("num_nodes", &SiteGraph::num_nodes)
      .def_property_readonly("num_edges", &SiteGraph::num_edges)
      .def_property_readonly("edges",
                             [](const SiteGraph& g) {
                               std::vector<std::pair<NodeId, NodeId>> out;
                               for (const Edge& e : g.edges()) out.emplace_back(e.lo, e.hi);
                               return out;
                             })
      .def("neighbors",
           [](const SiteGraph& g, NodeId node) {
             if (node >= g.num_nodes()) throw py::index_error("node out of range");
             const auto n = g.neighbors(node);
             return std::vector<NodeId>(n.begin(), n.end());
           })
      .def("__repr__", [](const SiteGraph& g) {
        return "SiteGraph(num_nodes=" + std::to_string(g.num_nodes()) +
               ", num_edges=" + std::to_string(g.num_edges()) + ")";
      });

  m.def("grid_graph", &build_grid_graph, py::arg("rows"), py::arg("cols"));

  m.def(
      "count_plateaus",
      [](const Eigen::VectorXd& values, const SiteGraph& graph, double tolerance) {
        std::vector<std::vector<NodeId>> out;
        for (auto& p : count_plateaus(values, graph, tolerance).plateaus) out.push_back(p.nodes);
        return out;
      },
      py::arg("values"), py::arg("graph"), py::arg("tolerance") = kDefaultPlateauTolerance,
      "Plateaus as lists of node ids, in order of their lowest node.");

  py::class_<NullDensity>(m, "NullDensity")
      .def_readonly("mu", &NullDensity::mu)
      .def_readonly("sigma", &NullDensity::sigma)
      .def_property_readonly("kind", [](const NullDensity& f) { return to_string(f.kind); })
      .def("__call__", &NullDensity::evaluate, py::arg("z"))
      .def("__repr__", [](const NullDensity& f) {
        return "NullDensity(mu=" + format_number(f.mu) + ", sigma=" + format_number(f.sigma) +
               ", kind=" + to_string(f.kind) + ")";
      });

  m.def("theoretical_null", &theoretical_null, py::arg("mu") = 0.0, py::arg("sigma") = 1.0);
  m.def(
      "fit_empirical_null",
      [](const Eigen::VectorXd& z) { return fit_empirical_null(as_span(z)); }, py::arg("z"));

  py::class_<TwoGroupsFit>(m, "TwoGroupsFit")
      .def_readonly("f0", &TwoGroupsFit::f0)
      .def_readonly("pi0", &TwoGroupsFit::pi0)
      .def_property_readonly("c", [](const TwoGroupsFit& f) { return f.prior.c; })
      .def("f1", [](const TwoGroupsFit& f, const Eigen::VectorXd& z) { return f.f1.evaluate(z); },
           py::arg("z"))
      .def_property_readonly("theta_grid", [](const TwoGroupsFit& f) { return f.f1.theta_grid(); })
      .def_property_readonly("theta_weights", [](const TwoGroupsFit& f) { return f.f1.weights(); });

  m.def(
      "fit_two_groups",
      [](const Eigen::VectorXd& z, const NullDensity& f0, int passes, std::uint64_t seed) {
        PredictiveRecursionOptions options;
        options.passes = passes;
        options.seed = seed;
        return fit_two_groups(as_span(z), f0, options);
      },
      py::arg("z"), py::arg("f0"), py::arg("passes") = 50, py::arg("seed") = 0,
      "Predictive-recursion estimate of the alternative density and null proportion.");

  m.def(
      "admm_solve",
      [](const Eigen::VectorXd& y, const Eigen::VectorXd& eta, double lambda,
         const SiteGraph& graph, int max_iterations) {
        const WlsProblem problem{y, eta, lambda};
        const IncidenceMatrix d(graph);
        const SddFactorization factorization(graph);
        AdmmState state = fresh_admm_state(problem, d);
        ConvergenceSpec tol;
        tol.max_iterations = max_iterations;
        return admm_solve(problem, d, factorization, state, tol).beta;
      },
      py::arg("y"), py::arg("eta"), py::arg("lam"), py::arg("graph"),
      py::arg("max_iterations") = 5000,
      "Minimize sum eta_i (y_i - b_i)^2 / 2 + lam * sum over edges |b_j - b_k|.");

  m.def(
      "fit",
      [](const Eigen::VectorXd& z, const SiteGraph& graph, const TwoGroupsFit& densities,
         double lambda, std::optional<Eigen::VectorXd> init) {
        FitResult result;
        {
          py::gil_scoped_release release;
          result = fit(z, graph, densities, lambda, init);
        }
        return fit_to_dict(result);
      },
      py::arg("z"), py::arg("graph"), py::arg("densities"), py::arg("lam"),
      py::arg("init") = py::none());

  m.def(
      "solution_path",
      [](const Eigen::VectorXd& z, const SiteGraph& graph, const TwoGroupsFit& densities,
         std::optional<std::vector<double>> grid) {
        PathResult path;
        {
          py::gil_scoped_release release;
          path = solution_path(z, graph, densities, grid.value_or(default_lambda_grid()));
        }
        py::list points;
        for (const auto& p : path.points) {
          py::dict d = fit_to_dict(p.fit);
          d["lam"] = p.lambda;
          d["ok"] = p.ok;
          d["loglik"] = p.loglik;
          d["plateaus"] = p.plateaus;
          d["aic"] = p.aic;
          d["bic"] = p.bic;
          points.append(d);
        }
        py::dict out;
        out["points"] = points;
        out["selected"] = select_index(path);
        return out;
      },
      py::arg("z"), py::arg("graph"), py::arg("densities"), py::arg("grid") = py::none(),
      "Warm-started fits over a decreasing lambda grid; 'selected' is the BIC minimizer.");

  m.def("information_criteria",
        [](double loglik, std::size_t plateaus, std::size_t n) {
          const auto ic = information_criteria(loglik, plateaus, n);
          return std::make_pair(ic.aic, ic.bic);
        },
        py::arg("loglik"), py::arg("plateaus"), py::arg("n"));

  py::class_<DiscoveryReport>(m, "DiscoveryReport")
      .def_property_readonly("method", [](const DiscoveryReport& r) { return to_string(r.method); })
      .def_readonly("level", &DiscoveryReport::level)
      .def_property_readonly("discovered", &discovered_flags)
      .def_readonly("num_discoveries", &DiscoveryReport::num_discoveries)
      .def_readonly("estimated_fdr", &DiscoveryReport::estimated_fdr)
      .def_readonly("w", &DiscoveryReport::w)
      .def_readonly("p_values", &DiscoveryReport::p_values);

  m.def(
      "discoveries_at_fdr",
      [](const Eigen::VectorXd& w, double q) { return discoveries_at_fdr(w, q); }, py::arg("w"),
      py::arg("q"));
  m.def("bh", &bh_procedure, py::arg("z"), py::arg("f0"), py::arg("q"));
  m.def("bh_from_p_values", &bh_from_p_values, py::arg("p"), py::arg("q"));
  m.def("two_groups_report", &two_groups_report, py::arg("z"), py::arg("densities"), py::arg("q"));

  m.def(
      "prior_image",
      [](const std::string& scenario, std::size_t rows, std::size_t cols) {
        return make_prior_image(scenario_from_string(scenario), rows, cols).c;
      },
      py::arg("scenario"), py::arg("rows"), py::arg("cols"));

  m.def(
      "simulate",
      [](const std::string& scenario, const std::string& alternative, std::size_t rows,
         std::size_t cols, std::uint64_t seed) {
        const auto prior = make_prior_image(scenario_from_string(scenario), rows, cols);
        const auto data = simulate(prior, SignalDistribution::named(alternative), seed);
        py::dict d;
        d["c"] = prior.c;
        d["h"] = data.h;
        d["theta"] = data.theta;
        d["z"] = data.z;
        return d;
      },
      py::arg("scenario"), py::arg("alternative"), py::arg("rows"), py::arg("cols"),
      py::arg("seed"));
}
