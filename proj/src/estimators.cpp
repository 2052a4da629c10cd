#include "aggiv/estimators.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "aggiv/errors.hpp"

namespace aggiv {

namespace detail {

OlsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    throw EstimationError("rank-deficient design matrix (collinear regressors)");
  }
  OlsFit fit;
  fit.coefficients = qr.solve(response);
  fit.fitted = design * fit.coefficients;
  fit.residuals = response - fit.fitted;
  return fit;
}

TwoStageFit two_stage_least_squares(const Dataset& data, const std::string& treatment,
                                    const std::string& outcome,
                                    const std::vector<std::string>& instruments) {
  if (instruments.empty()) throw ValidationError("2sls: at least one instrument required");
  const Eigen::Index n = data.rows();
  const Eigen::Index m = static_cast<Eigen::Index>(instruments.size());
  if (n <= m + 1) {
    throw EstimationError("2sls: sample size " + std::to_string(n) +
                          " too small for " + std::to_string(m) + " instrument(s)");
  }

  const Eigen::VectorXd a = data.column(treatment);
  const Eigen::VectorXd y = data.column(outcome);
  Eigen::MatrixXd design(n, m + 1);
  design.col(0).setOnes();
  for (Eigen::Index l = 0; l < m; ++l) {
    design.col(l + 1) = data.column(instruments[static_cast<std::size_t>(l)]);
  }

  TwoStageFit fit;
  fit.first_stage = ols(design, a);

  // Joint F of the instruments against the intercept-only model.
  const double tss = (a.array() - a.mean()).matrix().squaredNorm();
  const double rss = fit.first_stage.residuals.squaredNorm();
  const double dof_resid = static_cast<double>(n - m - 1);
  if (rss > 0.0) {
    fit.f_statistic = ((tss - rss) / static_cast<double>(m)) / (rss / dof_resid);
  } else {
    fit.f_statistic = std::numeric_limits<double>::infinity();
  }

  // The second stage regresses the outcome on the fitted treatment; a
  // (numerically) constant fitted column means the instruments carry no
  // signal and the slope is unidentified.
  const double fitted_css = (fit.first_stage.fitted.array() - fit.first_stage.fitted.mean())
                                .matrix()
                                .squaredNorm();
  if (fitted_css <= 1e-24 * std::max(tss, 1.0)) {
    throw EstimationError("2sls: first-stage fitted values are constant (weak or irrelevant instruments)");
  }
  Eigen::MatrixXd stage2(n, 2);
  stage2.col(0).setOnes();
  stage2.col(1) = fit.first_stage.fitted;
  const OlsFit second = ols(stage2, y);
  fit.intercept = second.coefficients(0);
  fit.slope = second.coefficients(1);
  return fit;
}

}  // namespace detail

EstimateReport fit_2sls(const Dataset& data, const std::string& treatment,
                        const std::string& outcome,
                        const std::vector<std::string>& instruments) {
  const auto fit = detail::two_stage_least_squares(data, treatment, outcome, instruments);
  EstimateReport report;
  report.point_estimate = fit.slope;
  report.first_stage_coefficients = fit.first_stage.coefficients.tail(instruments.size());
  report.first_stage_f = fit.f_statistic;
  report.n = static_cast<std::int64_t>(data.rows());
  report.instrument_labels = instruments;
  return report;
}

double first_stage_f(const Dataset& data, const std::string& treatment,
                     const std::vector<std::string>& instruments) {
  if (instruments.empty()) throw ValidationError("first_stage_f: at least one instrument required");
  const Eigen::Index n = data.rows();
  const Eigen::Index m = static_cast<Eigen::Index>(instruments.size());
  if (n <= m + 1) {
    throw EstimationError("first_stage_f: sample size " + std::to_string(n) +
                          " too small for " + std::to_string(m) + " instrument(s)");
  }
  const Eigen::VectorXd a = data.column(treatment);
  Eigen::MatrixXd design(n, m + 1);
  design.col(0).setOnes();
  for (Eigen::Index l = 0; l < m; ++l) {
    design.col(l + 1) = data.column(instruments[static_cast<std::size_t>(l)]);
  }
  const auto fit = detail::ols(design, a);
  const double tss = (a.array() - a.mean()).matrix().squaredNorm();
  const double rss = fit.residuals.squaredNorm();
  if (!(rss > 0.0)) return std::numeric_limits<double>::infinity();
  return ((tss - rss) / static_cast<double>(m)) / (rss / static_cast<double>(n - m - 1));
}

std::vector<std::optional<double>> per_instrument_population_estimands(
    const AggregateIvScm& scm) {
  require_valid(scm);
  std::vector<std::optional<double>> estimands;
  for (Eigen::Index l = 0; l < scm.m(); ++l) {
    try {
      estimands.push_back(iv_estimand_population(scm, l));
    } catch (const ValidationError&) {
      estimands.push_back(std::nullopt);  // irrelevant instrument
    }
  }
  return estimands;
}

std::string to_csv_string(const EstimateReport& report) {
  std::ostringstream out;
  out << "estimate,f_stat,n,instruments\n";
  out << format_double(report.point_estimate) << "," << format_double(report.first_stage_f)
      << "," << report.n << ",";
  for (std::size_t i = 0; i < report.instrument_labels.size(); ++i) {
    if (i > 0) out << ";";
    out << report.instrument_labels[i];
  }
  out << "\n";
  return out.str();
}

}  // namespace aggiv
