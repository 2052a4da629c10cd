#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aggiv/dataset.hpp"
#include "aggiv/scm.hpp"

namespace aggiv {

/// Result of the overidentification test.
struct SarganReport {
  double statistic = 0.0;  ///< n * R^2 of the residual-on-instruments regression
  int dof = 0;             ///< instrument count - 1
  double p_value = 1.0;
  double level = 0.0;      ///< significance level the decision used
  bool reject = false;     ///< p_value < level
};

/// Sargan overidentification test: fits 2SLS, regresses the structural
/// residuals y - intercept - slope * treatment (the observed treatment, not
/// the fitted one) on the instruments plus intercept, and refers
/// n * R^2 to chi-squared with (instrument count - 1) degrees of freedom.
/// Requires at least two instruments and a level in (0, 1).
SarganReport sargan_test(const Dataset& data, const std::string& treatment,
                         const std::string& outcome,
                         const std::vector<std::string>& instruments, double level);

/// A named instrument-strength configuration: the delta matrix to plug into
/// an SCM template.
struct InstrumentConfig {
  std::string name;
  Eigen::MatrixXd delta;
};

/// One point of a rejection-frequency curve.
struct SarganPowerPoint {
  std::string config;
  double level = 0.0;
  double beta1 = 0.0;
  int replicates = 0;
  int rejections = 0;
  double frequency = 0.0;
  int failures = 0;  ///< replicates where simulation or the test errored
};

/// Builds the SCM to simulate from for a grid value and a delta matrix.
using ScmTemplate = std::function<AggregateIvScm(double beta1, const Eigen::MatrixXd& delta)>;

/// Monte Carlo rejection frequencies of the Sargan test over a parameter
/// grid, for each instrument configuration and significance level.
///
/// Replicate r of grid point g under configuration c draws its dataset from
/// the seed chain derive(derive(derive(master_seed, c), g), r), so results
/// are identical for any `jobs` value and any execution order; `jobs` > 1
/// distributes grid points across threads. Replicates that throw are counted
/// in `failures` and treated as non-rejections. Rows are ordered by
/// (configuration, level, beta1) with configurations and levels in input
/// order and beta1 ascending in grid order.
std::vector<SarganPowerPoint> sargan_power_curve(
    const ScmTemplate& make_scm, const std::vector<double>& beta1_grid,
    const std::vector<InstrumentConfig>& configs, int replicates, std::int64_t n,
    const std::vector<double>& levels, std::uint64_t master_seed, int jobs = 1);

/// Population correlation between instrument l (0-based) and the aggregate
/// treatment, from the closed-form moments.
double instrument_treatment_correlation(const AggregateIvScm& scm, Eigen::Index instrument);

/// |correlation| > 0.5 is strong, < 0.2 weak, in between intermediate.
enum class InstrumentStrength { Weak, Intermediate, Strong };
InstrumentStrength classify_instrument_strength(double correlation);
const char* to_string(InstrumentStrength strength);

/// CSV document for power points, header
/// "config,level,beta1,replicates,rejections,frequency".
std::string to_csv_string(const std::vector<SarganPowerPoint>& points);

}  // namespace aggiv
