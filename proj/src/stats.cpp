#include "aggiv/stats.hpp"

#include <cmath>
#include <limits>

#include "aggiv/errors.hpp"

namespace aggiv::stats {

namespace {

// P(s, x) by the power series, reliable for x < s + 1.
double gamma_p_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  double a = s;
  for (int i = 0; i < 500; ++i) {
    a += 1.0;
    term *= x / a;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Q(s, x) by the modified Lentz continued fraction, reliable for x >= s + 1.
double gamma_q_continued_fraction(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

}  // namespace

double regularized_gamma_p(double s, double x) {
  if (!(s > 0.0)) throw ValidationError("regularized_gamma_p: s must be positive");
  if (!(x >= 0.0)) throw ValidationError("regularized_gamma_p: x must be non-negative");
  if (x == 0.0) return 0.0;
  if (x < s + 1.0) return gamma_p_series(s, x);
  return 1.0 - gamma_q_continued_fraction(s, x);
}

double regularized_gamma_q(double s, double x) {
  if (!(s > 0.0)) throw ValidationError("regularized_gamma_q: s must be positive");
  if (!(x >= 0.0)) throw ValidationError("regularized_gamma_q: x must be non-negative");
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
  return gamma_q_continued_fraction(s, x);
}

double chi_squared_sf(double x, double dof) {
  if (!(dof > 0.0)) throw ValidationError("chi_squared_sf: dof must be positive");
  if (!(x >= 0.0)) throw ValidationError("chi_squared_sf: x must be non-negative");
  return regularized_gamma_q(0.5 * dof, 0.5 * x);
}

}  // namespace aggiv::stats
