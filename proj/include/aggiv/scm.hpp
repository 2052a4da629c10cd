#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aggiv/config.hpp"
#include "aggiv/dataset.hpp"

namespace aggiv {

/// Linear structural causal model with an aggregate treatment.
///
/// Structure, with independent zero-mean Gaussian errors:
///   u    = eps_u
///   i_l  = eps_{i_l}                                   l = 1..m
///   a_j  = sum_l delta(l,j) i_l + gamma_a(j) u + eps_{a_j}   j = 1..k
///   a    = sum_j alpha(j) a_j        (definitional, no error term)
///   y    = sum_j beta(j) a_j + gamma_y u + eps_y
///
/// Only the aggregate `a` and (i, u, y) are assumed observable by the
/// estimators; the component treatments a_j are latent.
struct AggregateIvScm {
  Eigen::VectorXd alpha;    ///< aggregation weights, length k
  Eigen::VectorXd beta;     ///< component effects on y, length k
  Eigen::MatrixXd delta;    ///< instrument effects, m x k (row l = instrument l)
  Eigen::VectorXd gamma_a;  ///< confounder effects on components, length k
  double gamma_y = 0.0;     ///< confounder effect on y
  double var_u = 1.0;       ///< confounder variance
  Eigen::VectorXd var_i;    ///< instrument variances, length m
  Eigen::VectorXd var_a;    ///< component error variances, length k
  double var_y = 1.0;       ///< outcome error variance

  Eigen::Index k() const { return alpha.size(); }
  Eigen::Index m() const { return delta.rows(); }
  /// True when every error variance equals one.
  bool unit_variances() const;
};

/// SCM with the given coefficients and all error variances set to one.
AggregateIvScm make_unit_variance_scm(Eigen::VectorXd alpha, Eigen::VectorXd beta,
                                      Eigen::MatrixXd delta, Eigen::VectorXd gamma_a,
                                      double gamma_y);

/// All invariant violations, as human-readable strings; empty when valid.
/// Checks dimensional consistency (k >= 1, m >= 1, matching lengths),
/// strictly positive variances, and a non-degenerate aggregate (alpha != 0).
std::vector<std::string> validate_scm(const AggregateIvScm& scm);

/// Throws ValidationError listing every violation reported by validate_scm.
void require_valid(const AggregateIvScm& scm);

/// Covariance matrix of the joint observational distribution over
/// (i1..im, u, a1..ak, a, y), all means zero.
struct PopulationMoments {
  std::vector<std::string> labels;
  Eigen::MatrixXd cov;

  Eigen::Index index_of(const std::string& label) const;
  double covariance(const std::string& x, const std::string& y) const;
  double variance(const std::string& x) const { return covariance(x, x); }
  /// Pearson correlation; throws ValidationError if either variance is zero.
  double correlation(const std::string& x, const std::string& y) const;
};

/// Population moments from the path coefficients. The row and column for the
/// aggregate are assembled as the alpha-weighted combination of the component
/// rows (ascending j), so that identity holds exactly in floating point.
PopulationMoments population_moments(const AggregateIvScm& scm);

/// Population IV estimand for one instrument (0-based index):
///   sum_j beta(j) delta(l,j) / sum_j alpha(j) delta(l,j).
/// Throws ValidationError when the instrument is irrelevant (denominator 0).
double iv_estimand_population(const AggregateIvScm& scm, Eigen::Index instrument = 0);

/// If beta is proportional to alpha (beta_j = tau * alpha_j for all j, up to
/// the relative tolerance), returns the shared ratio tau = beta(0)/alpha(0);
/// otherwise nullopt. Throws ValidationError when some alpha(j) is zero,
/// since the ratios are then undefined.
std::optional<double> check_proportional_aggregation(const AggregateIvScm& scm,
                                                     double tol = 1e-9);

/// n independent draws from the observational distribution, columns
/// i1..im, u, a1..ak, a, y. Each error column gets its own substream derived
/// from `seed`, so identical (scm, n, seed) produce identical bytes. The
/// aggregate column is computed from the component columns (ascending j),
/// never sampled separately.
Dataset sample_observational(const AggregateIvScm& scm, std::int64_t n, std::uint64_t seed);

/// Several outcomes y_i = sum_j beta_matrix(j,i) a_j + gamma_y_vec(i) u + eps_{y_i},
/// combined into the scalar target sum_i omega(i) y_i.
struct AggregateOutcomeSpec {
  Eigen::VectorXd omega;        ///< outcome weights, length m_y
  Eigen::MatrixXd beta_matrix;  ///< k x m_y, column i = component effects on y_i
  Eigen::VectorXd gamma_y_vec;  ///< confounder effects, length m_y
  Eigen::VectorXd var_y_vec;    ///< outcome error variances, length m_y
};

/// Population IV estimand of the aggregate outcome on the aggregate
/// treatment, single instrument (m = 1 required):
///   sum_i omega(i) * sum_j beta_matrix(j,i) delta(0,j) / sum_j alpha(j) delta(0,j).
double aggregate_outcome_estimand(const AggregateIvScm& scm, const AggregateOutcomeSpec& outcome);

/// Aggregate instrument i = sum_l eta(l) i_l.
struct AggregateInstrumentSpec {
  Eigen::VectorXd eta;  ///< combination weights, length m
};

/// Population projection slopes xi_j = cov(a_j, i) / var(i) of each component
/// on the aggregate instrument.
Eigen::VectorXd aggregate_instrument_projection(const AggregateIvScm& scm,
                                                const AggregateInstrumentSpec& inst);

/// Population IV estimand using the aggregate instrument:
///   sum_j beta(j) xi(j) / sum_j alpha(j) xi(j).
double aggregate_instrument_estimand(const AggregateIvScm& scm,
                                     const AggregateInstrumentSpec& inst);

/// Builds an SCM from config keys: k, m, alpha, beta, delta, gamma_a,
/// gamma_y, var_u, var_i, var_a, var_y. Variances default to one.
AggregateIvScm scm_from_config(const Config& config);

/// Config text that scm_from_config parses back to an identical model.
std::string to_config_text(const AggregateIvScm& scm);

}  // namespace aggiv
