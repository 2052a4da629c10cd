#pragma once

namespace aggiv::stats {

/// Regularized lower incomplete gamma function P(s, x) for s > 0, x >= 0.
double regularized_gamma_p(double s, double x);

/// Regularized upper incomplete gamma function Q(s, x) = 1 - P(s, x).
double regularized_gamma_q(double s, double x);

/// Survival function of the chi-squared distribution with `dof` degrees of
/// freedom: P(X > x) = Q(dof/2, x/2). Requires dof > 0 and x >= 0.
double chi_squared_sf(double x, double dof);

}  // namespace aggiv::stats
