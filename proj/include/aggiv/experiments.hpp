#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aggiv/acid.hpp"
#include "aggiv/diagnostics.hpp"
#include "aggiv/scm.hpp"

namespace aggiv {

/// The reproducible studies shipped with the toolkit.
enum class ExperimentId {
  Figure2a,        ///< IV estimand vs ACE as the first component effect varies
  Figure2b,        ///< IV estimand vs ACE as the intervention slope varies
  Figure4,         ///< Sargan rejection frequencies across instrument strength
  Table1,          ///< instrument-treatment correlations of the named configs
  Table2,          ///< IV estimand vs ACE under zero restrictions
  Counterexample,  ///< base-value-dependent unit-shift effects
};

ExperimentId experiment_id_from_string(const std::string& name);
std::string to_string(ExperimentId id);

/// Inputs shared by all studies; fields an experiment does not use are
/// ignored. Empty grid / sample_sizes select the study's defaults.
struct ExperimentConfig {
  ExperimentId id = ExperimentId::Figure2a;
  std::uint64_t master_seed = 42;
  std::vector<double> grid;                 ///< x-axis values
  std::vector<std::int64_t> sample_sizes;   ///< per-point dataset sizes (figure 2)
  int replicates = 100;                     ///< datasets per point (figure 4)
  std::int64_t n = 1000;                    ///< dataset size (figure 4)
  std::vector<double> levels = {0.01, 0.5}; ///< significance levels (figure 4)
  int jobs = 1;                             ///< worker threads (figure 4)
};

/// Invariant violations as human-readable strings; empty when valid.
std::vector<std::string> validate(const ExperimentConfig& config);

/// One simulated estimate next to the two theoretical quantities.
struct SimulationRow {
  double x = 0.0;                   ///< grid value (beta1 or d1)
  std::int64_t n = 0;               ///< sample size
  double sample_estimate = 0.0;     ///< 2SLS estimate; NaN when status != "ok"
  double beta_iv_theoretical = 0.0; ///< closed-form IV estimand
  double ace_theoretical = 0.0;     ///< closed-form ACE
  std::string status = "ok";        ///< "ok" or the error message
};

/// Two-component SCM with alpha, gamma and delta all one, beta2 = 2, unit
/// variances and a single instrument; beta1 is the free parameter.
AggregateIvScm two_component_scm(double beta1);

/// Two-component, two-instrument SCM with gamma_a = (0.5, 0.5), gamma_y = 2,
/// beta2 = 2 and unit variances; beta1 and the delta matrix are free. At
/// beta1 = 2, beta is proportional to alpha and all instruments are valid.
AggregateIvScm two_instrument_scm(double beta1, const Eigen::MatrixXd& delta);

/// The named instrument-strength configurations: Strong-Weak
/// delta = [[1,1],[0.1,0.1]], Strong-Strong [[2,1],[0.5,2]], and Weak-Weak
/// [[0.2,0.1],[0.1,0.15]].
std::vector<InstrumentConfig> table1_instrument_configs();

/// Sweep of beta1 (default grid -1..4 step 0.1): for each grid value and
/// sample size (default 10, 100, 1000), a fresh dataset from
/// two_component_scm and its single-instrument 2SLS estimate, next to the
/// IV estimand and the ACE of the intervention with slope d = (2, -1).
/// At beta1 = 2 the two theoretical curves intersect.
std::vector<SimulationRow> run_figure2a(const ExperimentConfig& config);

/// Sweep of the intervention slope d1 (default grid -2..2 step 0.1) at
/// beta1 = 1: the ACE of d = (d1, 1 - d1) varies while the IV estimand
/// stays 1.5; they agree only at d1 = 0.5 (the instrument-tuned slope).
std::vector<SimulationRow> run_figure2b(const ExperimentConfig& config);

/// Sargan rejection frequencies over the beta1 grid (default -1..4 step 0.1)
/// for the three instrument configurations and the configured levels.
std::vector<SarganPowerPoint> run_figure4(const ExperimentConfig& config);

/// Population instrument-treatment correlations with strength labels.
struct Table1Row {
  std::string config;
  double cor_i1 = 0.0;
  double cor_i2 = 0.0;
  std::string class_i1;
  std::string class_i2;
};
std::vector<Table1Row> run_table1();

/// IV estimand and ACE for the model and its zero-restricted variants.
struct Table2Row {
  std::string case_name;  ///< general | beta2_zero | delta2_zero | both_zero
  double beta_iv = 0.0;
  double ace = 0.0;
};

/// Evaluates the first-instrument IV estimand and the Gaussian ACE on the
/// given two-component model and on the variants with beta2 = 0, with
/// delta(0,2) = 0, and with both. Each cell calls the same closed-form
/// operations on the restricted model; nothing is re-derived here. The ACID
/// slope d is reused as-is in every case.
std::vector<Table2Row> run_table2(const AggregateIvScm& scm, const GaussianAcid& acid);

/// Closed-form curves of the counterexample family over a grid of base
/// values (default -3..2 step 0.1).
struct CounterexampleRow {
  double a = 0.0;
  double mean_a2 = 0.0;          ///< E[a2 | do(a)]
  double mean_a2_shifted = 0.0;  ///< E[a2 | do(a+1)]
  double delta = 0.0;            ///< unit-shift effect on y at beta = (2, 3)
};
std::vector<CounterexampleRow> run_counterexample(const ExperimentConfig& config);

/// Inclusive grid start, start+step, ..., stop. When start is an integer
/// multiple of step, points are computed as single products of the step so
/// that anchor values (e.g. 2.0 on a 0.1 grid) are exact.
std::vector<double> linear_grid(double start, double stop, double step);

/// Runs the configured study and writes its artifacts under
/// out_root/<experiment>/: results.csv, a manifest (config hash, master
/// seed, toolkit version), and for figure4 a warnings.csv when any replicate
/// failed. Re-running with the same config reproduces the bytes exactly.
/// Returns the directory written.
std::filesystem::path run_experiment(const ExperimentConfig& config,
                                     const std::filesystem::path& out_root);

/// FNV-1a hash of the canonical serialization of the config (the jobs field
/// is excluded: it affects scheduling, never results).
std::uint64_t config_hash(const ExperimentConfig& config);

/// CSV text for each row type (headers "beta1,..." / "d1,..." chosen by
/// x_label for the simulation rows).
std::string to_csv_string(const std::vector<SimulationRow>& rows, const std::string& x_label);
std::string to_csv_string(const std::vector<Table1Row>& rows);
std::string to_csv_string(const std::vector<Table2Row>& rows);
std::string to_csv_string(const std::vector<CounterexampleRow>& rows);

}  // namespace aggiv
