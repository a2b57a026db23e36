// Python bindings for the main seqreview operations.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "seqreview/effort.hpp"
#include "seqreview/errors.hpp"
#include "seqreview/evaluation.hpp"
#include "seqreview/ingestion.hpp"
#include "seqreview/mechanisms.hpp"
#include "seqreview/model.hpp"

namespace py = pybind11;
using namespace seqreview;

PYBIND11_MODULE(_seqreview, m) {
  m.doc() = "Sequential review mechanisms: evaluation, fitting and effort analysis.";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<MechanismError>(m, "MechanismError", PyExc_RuntimeError);
  py::register_exception<UnsupportedMechanism>(m, "UnsupportedMechanism", PyExc_RuntimeError);

  // Settings and policies.
  py::class_<GaussianSetting>(m, "GaussianSetting")
      .def(py::init([](std::size_t n, double mu_q, double sigma_q, double sigma_r) {
             GaussianSetting s{n, mu_q, sigma_q, sigma_r};
             s.validate();
             return s;
           }),
           py::arg("n") = 5, py::arg("mu_q") = -1.0, py::arg("sigma_q") = 2.0, py::arg("sigma_r") = 1.0)
      .def_readwrite("n", &GaussianSetting::n)
      .def_readwrite("mu_q", &GaussianSetting::mu_q)
      .def_readwrite("sigma_q", &GaussianSetting::sigma_q)
      .def_readwrite("sigma_r", &GaussianSetting::sigma_r);

  py::class_<SoftmaxSetting>(m, "SoftmaxSetting")
      .def(py::init<>())
      .def_readwrite("paper_count_pmf", &SoftmaxSetting::paper_count_pmf)
      .def_readwrite("reviews_per_paper", &SoftmaxSetting::reviews_per_paper)
      .def_readwrite("mu_q", &SoftmaxSetting::mu_q)
      .def_readwrite("sigma_q", &SoftmaxSetting::sigma_q)
      .def_readwrite("temperature", &SoftmaxSetting::temperature)
      .def_readwrite("score_set", &SoftmaxSetting::score_set)
      .def_readwrite("desirability_offset", &SoftmaxSetting::desirability_offset)
      .def("mean_paper_count", &SoftmaxSetting::mean_paper_count);

  py::enum_<ThresholdFamily>(m, "ThresholdFamily")
      .value("parallel", ThresholdFamily::kParallel)
      .value("sequential", ThresholdFamily::kSequential)
      .value("isotonic", ThresholdFamily::kIsotonic);

  py::class_<ThresholdPolicy>(m, "ThresholdPolicy")
      .def_static("parallel", &ThresholdPolicy::parallel, py::arg("tau"))
      .def_static("sequential", &ThresholdPolicy::sequential, py::arg("tau_acc"), py::arg("tau_rev"))
      .def_static("isotonic", &ThresholdPolicy::isotonic, py::arg("tau"))
      .def_readonly("family", &ThresholdPolicy::family)
      .def_readonly("tau_acc", &ThresholdPolicy::tau_acc)
      .def_readonly("tau_rev", &ThresholdPolicy::tau_rev)
      .def("__repr__", &ThresholdPolicy::to_string);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("estimate", &EvalReport::estimate)
      .def_readonly("std_error", &EvalReport::std_error)
      .def_readonly("samples", &EvalReport::samples)
      .def_readonly("seed", &EvalReport::seed)
      .def("__repr__", [](const EvalReport& r) {
        std::ostringstream os;
        os << "EvalReport(" << r.estimate << " +/- " << r.std_error << ")";
        return os.str();
      });

  py::class_<GaussianMetrics>(m, "GaussianMetrics")
      .def_readonly("utility", &GaussianMetrics::utility)
      .def_readonly("burden", &GaussianMetrics::burden)
      .def_readonly("avg_reviewed_quality", &GaussianMetrics::avg_reviewed_quality);

  py::class_<SequentialProbs>(m, "SequentialProbs")
      .def_readonly("accept", &SequentialProbs::accept)
      .def_readonly("review", &SequentialProbs::review);

  // Evaluation.
  m.def("sequential_accept_probs",
        [](const std::vector<double>& q, double tau_acc, double tau_rev, double sigma_r) {
          return sequential_accept_probs(q, tau_acc, tau_rev, sigma_r);
        },
        py::arg("qualities"), py::arg("tau_acc"), py::arg("tau_rev"), py::arg("sigma_r"));
  m.def("evaluate_gaussian",
        [](const ThresholdPolicy& p, const GaussianSetting& s, std::size_t samples, std::uint64_t seed,
           std::size_t isotonic_noise_draws) {
          EvalOptions o;
          o.isotonic_noise_draws = isotonic_noise_draws;
          py::gil_scoped_release release;
          return evaluate_gaussian(p, s, samples, seed, o);
        },
        py::arg("policy"), py::arg("setting"), py::arg("samples"), py::arg("seed"),
        py::arg("isotonic_noise_draws") = 100);

  py::class_<SGDConfig>(m, "SGDConfig")
      .def(py::init<>())
      .def_readwrite("step_size", &SGDConfig::step_size)
      .def_readwrite("fd_step", &SGDConfig::fd_step)
      .def_readwrite("iterations", &SGDConfig::iterations)
      .def_readwrite("samples", &SGDConfig::samples)
      .def_readwrite("final_samples", &SGDConfig::final_samples)
      .def_readwrite("seed", &SGDConfig::seed)
      .def_readwrite("warm_start", &SGDConfig::warm_start);

  py::class_<OptimizeResult>(m, "OptimizeResult")
      .def_readonly("policy", &OptimizeResult::policy)
      .def_readonly("utility", &OptimizeResult::utility)
      .def_readonly("initial", &OptimizeResult::initial)
      .def_readonly("initial_utility", &OptimizeResult::initial_utility)
      .def_readonly("improved", &OptimizeResult::improved)
      .def_readonly("chosen", &OptimizeResult::chosen);

  m.def("optimize_thresholds",
        [](ThresholdFamily f, const GaussianSetting& s, const SGDConfig& c) {
          py::gil_scoped_release release;
          return optimize_thresholds(f, s, c);
        },
        py::arg("family"), py::arg("setting"), py::arg("config"));
  m.def("relative_utility", &relative_utility, py::arg("u_parallel"), py::arg("u_sequential"),
        py::arg("u_isotonic"));
  m.def("relative_utility_report",
        [](const ThresholdPolicy& p, const ThresholdPolicy& sq, const ThresholdPolicy& iso, const GaussianSetting& s,
           std::size_t samples, std::uint64_t seed) {
          py::gil_scoped_release release;
          return relative_utility_report(p, sq, iso, s, samples, seed);
        },
        py::arg("parallel"), py::arg("sequential"), py::arg("isotonic"), py::arg("setting"), py::arg("samples"),
        py::arg("seed"));

  py::class_<MatchedBurdenConfig>(m, "MatchedBurdenConfig")
      .def(py::init<>())
      .def_readwrite("samples", &MatchedBurdenConfig::samples)
      .def_readwrite("grid_points", &MatchedBurdenConfig::grid_points)
      .def_readwrite("z", &MatchedBurdenConfig::z);

  py::class_<MatchedBurdenResult>(m, "MatchedBurdenResult")
      .def_readonly("relative_burden", &MatchedBurdenResult::relative_burden)
      .def_readonly("std_error", &MatchedBurdenResult::std_error)
      .def_readonly("parallel", &MatchedBurdenResult::parallel)
      .def_readonly("sequential", &MatchedBurdenResult::sequential)
      .def_readonly("parallel_utility", &MatchedBurdenResult::parallel_utility)
      .def_readonly("sequential_utility", &MatchedBurdenResult::sequential_utility)
      .def_readonly("gap_std_error", &MatchedBurdenResult::gap_std_error);

  m.def("matched_burden",
        [](const GaussianSetting& s, std::uint64_t seed, const MatchedBurdenConfig& c) {
          py::gil_scoped_release release;
          return matched_burden(s, seed, c);
        },
        py::arg("setting"), py::arg("seed"), py::arg("config") = MatchedBurdenConfig{});
  m.def("matched_burden_softmax",
        [](const SoftmaxSetting& s, std::uint64_t seed, const MatchedBurdenConfig& c) {
          py::gil_scoped_release release;
          return matched_burden_softmax(s, seed, c);
        },
        py::arg("setting"), py::arg("seed"), py::arg("config") = MatchedBurdenConfig{});
  m.def("truncated_geometric_pmf", &truncated_geometric_pmf, py::arg("mean"), py::arg("max_count"));

  // Isotonic mechanism.
  m.def("isotonic_adjust",
        [](const std::vector<double>& scores, const std::vector<std::size_t>& order) {
          return isotonic_adjust(scores, Permutation::from_order(order));
        },
        py::arg("scores"), py::arg("order"),
        "Adjusted scores given the claimed ranking as a list of paper indices, best first.");
  m.def("isotonic_mechanism_accept",
        [](const std::vector<double>& scores, const std::vector<std::size_t>& order, double tau) {
          return isotonic_mechanism_accept(scores, Permutation::from_order(order), tau);
        },
        py::arg("scores"), py::arg("order"), py::arg("tau"));

  // Endogenous effort.
  py::class_<EffortProfile>(m, "EffortProfile")
      .def(py::init([](std::vector<std::size_t> counts, std::vector<double> probs, std::vector<double> rewards) {
             EffortProfile p{std::move(counts), std::move(probs), std::move(rewards)};
             p.validate();
             return p;
           }),
           py::arg("counts"), py::arg("accept_probs"), py::arg("rewards"))
      .def_readonly("counts", &EffortProfile::counts)
      .def_readonly("accept_probs", &EffortProfile::accept_probs)
      .def_readonly("rewards", &EffortProfile::rewards);

  py::enum_<EffortMechanism>(m, "EffortMechanism")
      .value("parallel", EffortMechanism::kParallel)
      .value("sequential", EffortMechanism::kSequential);

  m.def("parallel_utility", &parallel_utility, py::arg("profile"));
  m.def("sequential_utility", &sequential_utility, py::arg("profile"));
  m.def("mrs", &mrs, py::arg("mechanism"), py::arg("profile"), py::arg("i"), py::arg("j"));

  py::class_<DominanceVerdict>(m, "DominanceVerdict")
      .def_readonly("mrs_parallel", &DominanceVerdict::mrs_parallel)
      .def_readonly("mrs_sequential", &DominanceVerdict::mrs_sequential)
      .def_readonly("gap", &DominanceVerdict::gap)
      .def_readonly("holds", &DominanceVerdict::holds)
      .def_readonly("strict", &DominanceVerdict::strict);
  m.def("verify_mrs_dominance", &verify_mrs_dominance, py::arg("profile"), py::arg("i"), py::arg("j"));

  py::class_<SubstitutionVerdict>(m, "SubstitutionVerdict")
      .def_readonly("parallel_more_i", &SubstitutionVerdict::parallel_more_i)
      .def_readonly("parallel_more_j", &SubstitutionVerdict::parallel_more_j)
      .def_readonly("sequential_more_i", &SubstitutionVerdict::sequential_more_i)
      .def_readonly("sequential_more_j", &SubstitutionVerdict::sequential_more_j)
      .def_readonly("violated", &SubstitutionVerdict::violated);
  m.def("quality_quantity_counterexample", &quality_quantity_counterexample);

  // Data ingestion.
  py::class_<Dataset>(m, "Dataset")
      .def_readonly("score_min", &Dataset::score_min)
      .def_readonly("score_max", &Dataset::score_max)
      .def("__len__", [](const Dataset& d) { return d.records.size(); });
  m.def("parse_dataset", py::overload_cast<const std::string&>(&parse_dataset), py::arg("path"));

  py::class_<FittedModel>(m, "FittedModel")
      .def(py::init<>())
      .def_readwrite("paper_count_pmf", &FittedModel::paper_count_pmf)
      .def_readwrite("mu_q", &FittedModel::mu_q)
      .def_readwrite("sigma_q", &FittedModel::sigma_q)
      .def_readwrite("temperature", &FittedModel::temperature)
      .def_readwrite("reviews_per_paper", &FittedModel::reviews_per_paper)
      .def_readwrite("score_min", &FittedModel::score_min)
      .def_readwrite("score_max", &FittedModel::score_max)
      .def_readonly("papers", &FittedModel::papers)
      .def_readonly("authors", &FittedModel::authors)
      .def("to_document", &FittedModel::to_document)
      .def_static("from_document", &FittedModel::from_document, py::arg("text"))
      .def("to_setting", &FittedModel::to_setting);

  m.def("fit_model",
        [](const Dataset& d, const std::string& prior_method, std::uint64_t seed, std::size_t reviews_per_paper) {
          FitOptions o;
          o.prior_method = parse_prior_method(prior_method);
          o.seed = seed;
          o.reviews_per_paper = reviews_per_paper;
          py::gil_scoped_release release;
          return fit_model(d, o).model;
        },
        py::arg("dataset"), py::arg("prior_method") = "marginal", py::arg("seed") = 0,
        py::arg("reviews_per_paper") = 3);
  m.def("generate_synthetic_dataset", &generate_synthetic_dataset, py::arg("model"), py::arg("papers"),
        py::arg("seed"));

  // Command line.
  m.def("run_cli",
        [](std::vector<std::string> args) {
          args.insert(args.begin(), "seqreview");
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs one command line; returns (exit_code, stdout, stderr).");
}
