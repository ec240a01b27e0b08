#include <fstream>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "epodyn/cli.hpp"
#include "epodyn/dimreduce.hpp"
#include "epodyn/dynamics.hpp"
#include "epodyn/embed.hpp"
#include "epodyn/estimator.hpp"
#include "epodyn/evalsuite.hpp"
#include "epodyn/netview.hpp"
#include "epodyn/random.hpp"

namespace py = pybind11;
using namespace epodyn;

namespace {

OpinionPanel make_panel(const Matrix& values, std::vector<std::string> developers) {
  OpinionPanel panel;
  panel.values = values;
  if (developers.empty()) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) developers.push_back("dev" + std::to_string(i + 1));
  }
  panel.developers = std::move(developers);
  for (Eigen::Index t = 0; t < values.cols(); ++t) panel.periods.push_back(std::to_string(t + 1));
  return panel;
}

py::tuple trajectories(const TrajectoryPair& tr) {
  return py::make_tuple(tr.private_opinions, tr.expressed);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Expressed-private opinion dynamics: simulation, fitting and evaluation";
  m.attr("__version__") = kToolVersion;

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<InputError>(m, "InputError", error.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", error.ptr());

  py::class_<EpoParameters>(m, "EpoParameters")
      .def(py::init([](const Matrix& W, const Matrix& A, const Vector& phi, const Vector& d,
                       std::vector<std::string> developers) {
             EpoParameters p{W, A, phi, d, std::move(developers)};
             p.require_feasible();
             return p;
           }),
           py::arg("W"), py::arg("A"), py::arg("phi"), py::arg("d"),
           py::arg("developers") = std::vector<std::string>{})
      .def_static("from_decomposition", &EpoParameters::from_decomposition, py::arg("d"),
                  py::arg("A"), py::arg("phi"), py::arg("developers") = std::vector<std::string>{})
      .def_readonly("W", &EpoParameters::W)
      .def_readonly("A", &EpoParameters::A)
      .def_readonly("phi", &EpoParameters::phi)
      .def_readonly("d", &EpoParameters::d)
      .def_readonly("developers", &EpoParameters::developers)
      .def("violations", &EpoParameters::violations, py::arg("tol") = kFeasibilityTolerance)
      .def("__len__", &EpoParameters::size);

  m.def("random_feasible_params", [](std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return random_feasible_params(n, rng);
  }, py::arg("n"), py::arg("seed") = 0);

  m.def("epo_step", [](const EpoParameters& p, const Vector& x, const Vector& xe) {
    const StepResult r = epo_step(p, x, xe);
    return py::make_tuple(r.private_next, r.expressed_next);
  }, py::arg("params"), py::arg("x"), py::arg("xe"));

  m.def("simulate", [](const EpoParameters& p, const Vector& x0, const Vector& xe0,
                       std::size_t steps) { return trajectories(epo_simulate(p, x0, xe0, steps)); },
        py::arg("params"), py::arg("x0"), py::arg("xe0"), py::arg("steps"),
        "Returns (private, expressed), each n x (steps + 1).");

  m.def("evaluate_objective", [](const EpoParameters& p, const Matrix& x, const Matrix& xe,
                                 std::size_t first, std::size_t last) {
    return evaluate_objective(p, x, xe, {first, last});
  }, py::arg("params"), py::arg("x"), py::arg("xe"), py::arg("first"), py::arg("last"));

  m.def("project_simplex", &project_simplex, py::arg("v"));

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("params", &FitResult::params)
      .def_readonly("objective_value", &FitResult::objective_value)
      .def_readonly("iterations_used", &FitResult::iterations_used)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("per_start_objectives", &FitResult::per_start_objectives);

  m.def("fit", [](const Matrix& expressed, std::size_t first, std::size_t last,
                  std::optional<Matrix> private_series, std::size_t multistarts,
                  std::size_t max_iterations, double step_tolerance, std::uint64_t seed,
                  std::vector<std::string> developers) {
    FitOptions opt;
    opt.multistart_count = multistarts;
    opt.max_iterations = max_iterations;
    opt.step_tolerance = step_tolerance;
    opt.seed = seed;
    FitProblem problem{make_panel(expressed, std::move(developers)), {first, last}, opt,
                       std::move(private_series)};
    py::gil_scoped_release release;
    return fit(problem);
  }, py::arg("expressed"), py::arg("first"), py::arg("last"), py::arg("private") = py::none(),
        py::arg("multistarts") = 16, py::arg("max_iterations") = 10000,
        py::arg("step_tolerance") = 1e-8, py::arg("seed") = 0,
        py::arg("developers") = std::vector<std::string>{});

  m.def("predict", [](const EpoParameters& p, const Matrix& expressed, std::size_t first,
                      std::size_t last, std::size_t horizon) {
    return trajectories(predict(p, make_panel(expressed, p.developers), {first, last}, horizon));
  }, py::arg("params"), py::arg("expressed"), py::arg("first"), py::arg("last"),
        py::arg("horizon"));

  py::class_<PcaModel>(m, "PcaModel")
      .def_readonly("mean", &PcaModel::mean)
      .def_readonly("components", &PcaModel::components)
      .def_readonly("explained_variance", &PcaModel::explained_variance)
      .def_readonly("explained_variance_ratio", &PcaModel::explained_variance_ratio)
      .def_readonly("lo", &PcaModel::lo)
      .def_readonly("hi", &PcaModel::hi)
      .def_readonly("rank", &PcaModel::rank)
      .def_readonly("rank_deficient", &PcaModel::rank_deficient);

  m.def("pca_fit", &pca_fit, py::arg("data"), py::arg("r"));
  m.def("pca_project", &pca_project, py::arg("model"), py::arg("data"));
  m.def("pca_transform_normalized", [](const PcaModel& model, const Matrix& data) {
    const NormalizedProjection out = pca_transform_normalized(model, data);
    return py::make_tuple(out.values, out.clamped);
  }, py::arg("model"), py::arg("data"), "Returns (values in [0, 1], clamped count).");
  m.def("explained_variance_spectrum", &explained_variance_spectrum, py::arg("data"));

  py::class_<QualityReport>(m, "QualityReport")
      .def_readonly("k", &QualityReport::k)
      .def_readonly("trustworthiness", &QualityReport::trustworthiness)
      .def_readonly("continuity", &QualityReport::continuity)
      .def_readonly("mrre", &QualityReport::mrre)
      .def_readonly("spearman_global", &QualityReport::spearman_global);
  m.def("quality_report", &quality_report, py::arg("high"), py::arg("low"), py::arg("k"));

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("sum_residuals", &EvalReport::sum_residuals)
      .def_readonly("mae", &EvalReport::mae)
      .def_readonly("mape_percent", &EvalReport::mape_percent)
      .def_readonly("mape_excluded", &EvalReport::mape_excluded)
      .def_readonly("entries", &EvalReport::entries)
      .def_readonly("rmse_by_group", &EvalReport::rmse_by_group)
      .def("rmse", &EvalReport::rmse, py::arg("group"));
  m.def("error_metrics", [](const Matrix& predicted, const Matrix& observed,
                            const std::vector<std::pair<std::string, std::vector<std::size_t>>>& groups) {
    std::vector<PeriodGroup> pg;
    for (const auto& [label, cols] : groups) pg.push_back({label, cols});
    return error_metrics(predicted, observed, pg);
  }, py::arg("predicted"), py::arg("observed"), py::arg("groups"));

  py::class_<InfluenceGraph>(m, "InfluenceGraph")
      .def_readonly("nodes", &InfluenceGraph::nodes)
      .def_readonly("self_weights", &InfluenceGraph::self_weights)
      .def_readonly("weights", &InfluenceGraph::weights)
      .def_property_readonly("edges", [](const InfluenceGraph& g) {
        std::vector<std::tuple<std::string, std::string, double>> out;
        for (const auto& e : g.edges) out.emplace_back(g.nodes[e.source], g.nodes[e.target], e.weight);
        return out;
      })
      .def("to_dot", [](const InfluenceGraph& g) { return to_dot(g); });
  m.def("build_graph", [](const EpoParameters& p, double threshold, const std::string& source) {
    return build_graph(p, threshold, graph_source_from_string(source));
  }, py::arg("params"), py::arg("threshold") = kDefaultEdgeThreshold, py::arg("source") = "W");

  m.def("aggregate_jsonl", [](const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read '" + path + "'");
    const auto records = read_embedding_jsonl(in);
    AggregateOptions opt;
    opt.strict = strict;
    const auto panel =
        build_vector_panel(records, developers_of(records), periods_of(records), opt);
    py::dict out;
    out["developers"] = panel.developers;
    out["periods"] = panel.periods;
    out["stacked"] = panel.stacked();
    return out;
  }, py::arg("path"), py::arg("strict") = false,
        "Developer x period opinion vectors from an embedding JSONL, stacked developer-major.");

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs one command-line subcommand; returns (exit code, stdout, stderr).");
}
