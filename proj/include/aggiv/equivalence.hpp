#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "aggiv/config.hpp"
#include "aggiv/dataset.hpp"
#include "aggiv/scm.hpp"

namespace aggiv {

/// Scalar-treatment SCM with a direct instrument-to-outcome path (an
/// exclusion-restriction violation):
///   u = eps_u,  i = eps_i,
///   a = delta_a * i + gamma_a * u + eps_a,
///   y = beta * a + delta_y * i + gamma_y * u + eps_y.
struct ExclusionViolationScm {
  double beta = 0.0;
  double delta_a = 0.0;
  double gamma_a = 0.0;
  double delta_y = 0.0;  ///< the direct path that violates exclusion
  double gamma_y = 0.0;
  double var_eps_a = 1.0;
  double var_eps_y = 1.0;
};

/// Maps an aggregate-treatment SCM with one instrument and unit error
/// variances to the scalar SCM with the same observational distribution of
/// (i, u, a, y). With s = sum_j alpha(j)^2:
///   beta'    = sum_j alpha(j) beta(j) / s
///   delta_a' = sum_j alpha(j) delta(j),  gamma_a' = sum_j alpha(j) gamma_a(j)
///   delta_y' = sum_j beta(j) delta(j) - beta' delta_a'
///   gamma_y' = sum_j beta(j) gamma_a(j) + gamma_y - beta' gamma_a'
///   var_eps_a' = s
///   var_eps_y' = 1 + sum_{l<j} (beta(l) alpha(j) - beta(j) alpha(l))^2 / s.
/// delta_y' vanishes exactly when beta is proportional to alpha, i.e. the
/// aggregate model behaves like a well-specified scalar IV model only then.
/// Throws ValidationError unless m = 1 and every error variance is one.
ExclusionViolationScm exclusion_violation_equivalent(const AggregateIvScm& scm);

/// Covariance of (i, u, a, y) under the scalar SCM, in that order.
Eigen::Matrix4d covariance_iuay(const ExclusionViolationScm& scm);

/// Largest absolute difference between the aggregate model's covariance of
/// (i1, u, a, y) and the scalar model's. Zero (to rounding) certifies that
/// the two models are observationally indistinguishable.
double verify_distribution_equivalence(const AggregateIvScm& scm,
                                       const ExclusionViolationScm& scalar);

/// n draws from the scalar SCM, columns i1, u, a, y (the instrument keeps
/// the label i1 so estimators treat both models uniformly).
Dataset sample_exclusion_violation(const ExclusionViolationScm& scm, std::int64_t n,
                                   std::uint64_t seed);

/// Builds the scalar SCM from config keys exclusion.beta, exclusion.delta_a,
/// exclusion.gamma_a, exclusion.delta_y, exclusion.gamma_y,
/// exclusion.var_eps_a, exclusion.var_eps_y (variances default to one).
ExclusionViolationScm exclusion_from_config(const Config& config);

/// Config text that exclusion_from_config parses back identically.
std::string to_config_text(const ExclusionViolationScm& scm);

}  // namespace aggiv
