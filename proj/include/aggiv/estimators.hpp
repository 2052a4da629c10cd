#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aggiv/dataset.hpp"
#include "aggiv/scm.hpp"

namespace aggiv {

/// Result of a two-stage least squares fit.
struct EstimateReport {
  double point_estimate = 0.0;                 ///< stage-2 slope on the treatment
  Eigen::VectorXd first_stage_coefficients;    ///< instrument slopes, intercept excluded
  double first_stage_f = 0.0;                  ///< joint F of the instruments
  std::int64_t n = 0;                          ///< sample size
  std::vector<std::string> instrument_labels;  ///< instruments used, in order
};

/// Two-stage least squares of `outcome` on `treatment` using `instruments`,
/// with an intercept in both stages. With a single instrument the point
/// estimate equals the sample ratio cov(outcome, i) / cov(treatment, i).
/// Throws EstimationError for rank-deficient designs, first stages with
/// (numerically) constant fitted values, or samples that are too small
/// (n must exceed the instrument count + 1).
EstimateReport fit_2sls(const Dataset& data, const std::string& treatment,
                        const std::string& outcome,
                        const std::vector<std::string>& instruments);

/// Joint F statistic of the instruments in the first-stage regression of
/// `treatment` on the instruments plus intercept; dof (m, n - m - 1).
double first_stage_f(const Dataset& data, const std::string& treatment,
                     const std::vector<std::string>& instruments);

/// Population IV estimand for each instrument; an entry is empty when that
/// instrument is irrelevant (sum_j alpha(j) delta(l,j) = 0).
std::vector<std::optional<double>> per_instrument_population_estimands(
    const AggregateIvScm& scm);

/// CSV document with header "estimate,f_stat,n,instruments" and one row;
/// instrument labels are joined with ';' so the field stays one CSV cell.
std::string to_csv_string(const EstimateReport& report);

namespace detail {

// Regression internals shared with the diagnostics module.

struct OlsFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
};

/// Least squares via column-pivoted QR; throws EstimationError when the
/// design is rank deficient.
OlsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

struct TwoStageFit {
  OlsFit first_stage;
  double f_statistic = 0.0;
  double intercept = 0.0;  ///< stage-2 intercept
  double slope = 0.0;      ///< stage-2 slope on the fitted treatment
};

TwoStageFit two_stage_least_squares(const Dataset& data, const std::string& treatment,
                                    const std::string& outcome,
                                    const std::vector<std::string>& instruments);

}  // namespace detail

}  // namespace aggiv
