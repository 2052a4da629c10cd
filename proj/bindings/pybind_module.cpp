// Python bindings for the aggregate-treatment IV toolkit.
//
// The module mirrors the C++ API: models and interventional families are
// plain data classes, operations are free functions, Eigen types map to
// numpy arrays, and the three error categories surface as Python exception
// types aggiv.ConfigError / aggiv.ValidationError / aggiv.EstimationError.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "aggiv/acid.hpp"
#include "aggiv/config.hpp"
#include "aggiv/dataset.hpp"
#include "aggiv/diagnostics.hpp"
#include "aggiv/equivalence.hpp"
#include "aggiv/errors.hpp"
#include "aggiv/estimators.hpp"
#include "aggiv/experiments.hpp"
#include "aggiv/scm.hpp"
#include "aggiv/stats.hpp"
#include "aggiv/version.hpp"

namespace py = pybind11;
using namespace aggiv;

namespace {

/// Convenience wrapper so Python callers do not need the config struct:
/// runs a named study and returns the directory the artifacts landed in.
std::string run_named_experiment(const std::string& name, const std::string& out_dir,
                                 std::uint64_t seed, const std::vector<double>& grid,
                                 int replicates, std::int64_t n,
                                 const std::vector<double>& levels,
                                 const std::vector<std::int64_t>& sizes, int jobs) {
  ExperimentConfig config;
  config.id = experiment_id_from_string(name);
  config.master_seed = seed;
  config.grid = grid;
  config.replicates = replicates;
  config.n = n;
  if (!levels.empty()) config.levels = levels;
  config.sample_sizes = sizes;
  config.jobs = jobs;
  if (const auto violations = validate(config); !violations.empty()) {
    std::string message = "invalid experiment configuration:";
    for (const auto& violation : violations) message += " " + violation + ";";
    throw ValidationError(message);
  }
  return run_experiment(config, out_dir).string();
}

}  // namespace

PYBIND11_MODULE(_aggiv, m) {
  m.doc() = "aggregate-treatment instrumental-variable toolkit";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<ValidationError>(m, "ValidationError");
  py::register_exception<EstimationError>(m, "EstimationError");

  // --- models ---------------------------------------------------------------
  py::class_<AggregateIvScm>(m, "AggregateIvScm")
      .def(py::init<>())
      .def_readwrite("alpha", &AggregateIvScm::alpha)
      .def_readwrite("beta", &AggregateIvScm::beta)
      .def_readwrite("delta", &AggregateIvScm::delta)
      .def_readwrite("gamma_a", &AggregateIvScm::gamma_a)
      .def_readwrite("gamma_y", &AggregateIvScm::gamma_y)
      .def_readwrite("var_u", &AggregateIvScm::var_u)
      .def_readwrite("var_i", &AggregateIvScm::var_i)
      .def_readwrite("var_a", &AggregateIvScm::var_a)
      .def_readwrite("var_y", &AggregateIvScm::var_y)
      .def_property_readonly("k", &AggregateIvScm::k)
      .def_property_readonly("m", &AggregateIvScm::m)
      .def("unit_variances", &AggregateIvScm::unit_variances)
      .def("__repr__", [](const AggregateIvScm& scm) {
        return "<AggregateIvScm k=" + std::to_string(scm.k()) +
               " m=" + std::to_string(scm.m()) + ">";
      });

  m.def("make_unit_variance_scm", &make_unit_variance_scm, py::arg("alpha"), py::arg("beta"),
        py::arg("delta"), py::arg("gamma_a"), py::arg("gamma_y"),
        "Model with the given coefficients and every error variance set to one.");
  m.def("validate_scm", &validate_scm, py::arg("scm"),
        "Invariant violations as strings; empty when the model is valid.");
  m.def("two_component_scm", &two_component_scm, py::arg("beta1"));
  m.def("two_instrument_scm", &two_instrument_scm, py::arg("beta1"), py::arg("delta"));
  m.def("scm_from_config_text",
        [](const std::string& text) { return scm_from_config(Config::parse(text)); },
        py::arg("text"), "Parse a model from configuration text (key = value lines).");
  m.def("to_config_text", py::overload_cast<const AggregateIvScm&>(&to_config_text),
        py::arg("scm"));

  py::class_<PopulationMoments>(m, "PopulationMoments")
      .def_readonly("labels", &PopulationMoments::labels)
      .def_readonly("cov", &PopulationMoments::cov)
      .def("correlation", &PopulationMoments::correlation, py::arg("x"), py::arg("y"));
  m.def("population_moments", &population_moments, py::arg("scm"),
        "Joint covariance of (i1..im, u, a1..ak, a, y) implied by the model.");
  m.def("iv_estimand", &iv_estimand_population, py::arg("scm"), py::arg("instrument") = 0,
        "Population IV estimand cov(y, i_l) / cov(a, i_l).");
  m.def("check_proportional_aggregation", &check_proportional_aggregation, py::arg("scm"),
        py::arg("tol") = 1e-9,
        "The shared ratio beta(j)/alpha(j) when beta is proportional to alpha, else None.");
  m.def("per_instrument_estimands", &per_instrument_population_estimands, py::arg("scm"),
        "Population IV estimand per instrument; None for irrelevant instruments.");

  // --- datasets ---------------------------------------------------------------
  py::class_<Dataset>(m, "Dataset")
      .def(py::init<std::vector<std::string>, Eigen::MatrixXd>(), py::arg("labels"),
           py::arg("values"))
      .def_property_readonly("labels",
                             [](const Dataset& d) { return d.labels(); })
      .def_property_readonly("values",
                             [](const Dataset& d) -> Eigen::MatrixXd { return d.values(); })
      .def_readwrite("intervention_value", &Dataset::intervention_value)
      .def("column", &Dataset::column, py::arg("label"))
      .def_property_readonly("rows", &Dataset::rows)
      .def_property_readonly("cols", &Dataset::cols)
      .def("__repr__", [](const Dataset& d) {
        return "<Dataset " + std::to_string(d.rows()) + "x" + std::to_string(d.cols()) + ">";
      });
  m.def("sample_observational", &sample_observational, py::arg("scm"), py::arg("n"),
        py::arg("seed"), "n joint draws of (i1..im, u, a1..ak, a, y).");
  m.def("read_csv", py::overload_cast<const std::filesystem::path&>(&read_csv), py::arg("path"));
  m.def("write_csv",
        py::overload_cast<const Dataset&, const std::filesystem::path&>(&write_csv),
        py::arg("data"), py::arg("path"));
  m.def("to_csv_string", py::overload_cast<const Dataset&>(&to_csv_string), py::arg("data"));

  // --- interventional families -------------------------------------------------
  py::class_<GaussianAcid>(m, "GaussianAcid")
      .def(py::init<>())
      .def_readwrite("alpha", &GaussianAcid::alpha)
      .def_readwrite("c", &GaussianAcid::c)
      .def_readwrite("d", &GaussianAcid::d)
      .def_readwrite("sigma", &GaussianAcid::sigma)
      .def_property_readonly("k", &GaussianAcid::k);

  py::class_<AcidConstraintReport::Entry>(m, "AcidConstraintEntry")
      .def_readonly("constraint", &AcidConstraintReport::Entry::constraint)
      .def_readonly("residual", &AcidConstraintReport::Entry::residual)
      .def_readonly("passed", &AcidConstraintReport::Entry::pass);
  py::class_<AcidConstraintReport>(m, "AcidConstraintReport")
      .def_readonly("entries", &AcidConstraintReport::entries)
      .def_readonly("passed", &AcidConstraintReport::pass)
      .def("summary", &AcidConstraintReport::summary);

  m.def("validate_gaussian_acid", &validate_gaussian_acid, py::arg("acid"),
        py::arg("tol") = kAcidConstraintTol);
  m.def("ace_gaussian", &ace_gaussian, py::arg("acid"), py::arg("beta"),
        "Average causal effect sum_j beta(j) d(j) of a unit shift of the aggregate.");
  m.def("sample_gaussian_intervention", &sample_gaussian_intervention, py::arg("acid"),
        py::arg("a"), py::arg("n"), py::arg("seed"),
        "Component draws under do(a); every row satisfies alpha . x = a.");
  m.def("natural_acid_from_scm", &natural_acid_from_scm, py::arg("scm"),
        "Family matching the observational conditional of the components given the aggregate.");
  m.def("instrument_tuned_acid", &instrument_tuned_acid, py::arg("scm"),
        py::arg("instrument") = 0, py::arg("sigma_scale") = 1.0,
        "Family whose ACE equals the chosen instrument's IV estimand.");
  m.def("partially_instrument_tuned_acid", &partially_instrument_tuned_acid, py::arg("scm"),
        py::arg("proportional_set"), py::arg("instrument") = 0, py::arg("sigma_scale") = 1.0,
        py::arg("tol") = 1e-9,
        "Instrument-tuned family on a subset with proportional effects (0-based indices).");
  m.def("symmetric_marginal_ace",
        py::overload_cast<const AggregateIvScm&>(&symmetric_marginal_ace), py::arg("scm"),
        "ACE sum_j beta(j) / (k alpha(j)) of the family with identical scaled marginals.");
  m.def("uniform_counterexample_density", &uniform_counterexample_density, py::arg("a2"),
        py::arg("a"));
  m.def("uniform_counterexample_component2_mean", &uniform_counterexample_component2_mean,
        py::arg("a"));
  m.def("uniform_counterexample_delta", &uniform_counterexample_delta, py::arg("a"),
        "Unit-shift effect at base value a for the family violating value independence.");

  // --- estimation and diagnostics ----------------------------------------------
  py::class_<EstimateReport>(m, "EstimateReport")
      .def_readonly("point_estimate", &EstimateReport::point_estimate)
      .def_readonly("first_stage_coefficients", &EstimateReport::first_stage_coefficients)
      .def_readonly("first_stage_f", &EstimateReport::first_stage_f)
      .def_readonly("n", &EstimateReport::n)
      .def_readonly("instrument_labels", &EstimateReport::instrument_labels);
  m.def("fit_2sls", &fit_2sls, py::arg("data"), py::arg("treatment"), py::arg("outcome"),
        py::arg("instruments"), "Two-stage least squares with intercepts in both stages.");
  m.def("first_stage_f", &first_stage_f, py::arg("data"), py::arg("treatment"),
        py::arg("instruments"));

  py::class_<SarganReport>(m, "SarganReport")
      .def_readonly("statistic", &SarganReport::statistic)
      .def_readonly("dof", &SarganReport::dof)
      .def_readonly("p_value", &SarganReport::p_value)
      .def_readonly("level", &SarganReport::level)
      .def_readonly("reject", &SarganReport::reject);
  m.def("sargan_test", &sargan_test, py::arg("data"), py::arg("treatment"), py::arg("outcome"),
        py::arg("instruments"), py::arg("level"),
        "Overidentification test: n R^2 of residuals on instruments, chi-squared reference.");
  m.def("instrument_treatment_correlation", &instrument_treatment_correlation, py::arg("scm"),
        py::arg("instrument"));
  m.def("chi_squared_sf", &stats::chi_squared_sf, py::arg("x"), py::arg("dof"),
        "Upper tail probability of the chi-squared distribution.");

  // --- exclusion-violation equivalence -------------------------------------------
  py::class_<ExclusionViolationScm>(m, "ExclusionViolationScm")
      .def(py::init<>())
      .def_readwrite("beta", &ExclusionViolationScm::beta)
      .def_readwrite("delta_a", &ExclusionViolationScm::delta_a)
      .def_readwrite("gamma_a", &ExclusionViolationScm::gamma_a)
      .def_readwrite("delta_y", &ExclusionViolationScm::delta_y)
      .def_readwrite("gamma_y", &ExclusionViolationScm::gamma_y)
      .def_readwrite("var_eps_a", &ExclusionViolationScm::var_eps_a)
      .def_readwrite("var_eps_y", &ExclusionViolationScm::var_eps_y);
  m.def("exclusion_violation_equivalent", &exclusion_violation_equivalent, py::arg("scm"),
        "Scalar model with the same observational distribution; requires one instrument "
        "and unit error variances.");
  m.def("covariance_iuay", &covariance_iuay, py::arg("scm"));
  m.def("verify_distribution_equivalence", &verify_distribution_equivalence, py::arg("scm"),
        py::arg("scalar"), "Largest absolute covariance difference between the two models.");
  m.def("sample_exclusion_violation", &sample_exclusion_violation, py::arg("scm"), py::arg("n"),
        py::arg("seed"));

  // --- studies --------------------------------------------------------------------
  m.def("linear_grid", &linear_grid, py::arg("start"), py::arg("stop"), py::arg("step"));
  m.def("run_experiment", &run_named_experiment, py::arg("name"), py::arg("out_dir"),
        py::arg("seed") = 42, py::arg("grid") = std::vector<double>{},
        py::arg("replicates") = 100, py::arg("n") = 1000,
        py::arg("levels") = std::vector<double>{}, py::arg("sizes") = std::vector<std::int64_t>{},
        py::arg("jobs") = 1,
        "Run a named study (figure2a, figure2b, figure4, table1, table2, counterexample) "
        "and return the directory its results.csv and manifest were written to.");
}
