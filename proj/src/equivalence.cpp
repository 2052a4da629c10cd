#include "aggiv/equivalence.hpp"

#include <cmath>
#include <sstream>

#include "aggiv/errors.hpp"
#include "aggiv/rng.hpp"

namespace aggiv {

namespace {

void check_mapping_preconditions(const AggregateIvScm& scm) {
  require_valid(scm);
  if (scm.m() != 1) {
    throw ValidationError("exclusion-violation mapping requires a single instrument (m = 1)");
  }
  if (!scm.unit_variances()) {
    throw ValidationError("exclusion-violation mapping requires unit error variances");
  }
}

}  // namespace

ExclusionViolationScm exclusion_violation_equivalent(const AggregateIvScm& scm) {
  check_mapping_preconditions(scm);
  const Eigen::Index k = scm.k();

  double s = 0.0;
  double alpha_beta = 0.0;
  double delta_a = 0.0;
  double gamma_a = 0.0;
  double beta_delta = 0.0;
  double beta_gamma = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    s += scm.alpha(j) * scm.alpha(j);
    alpha_beta += scm.alpha(j) * scm.beta(j);
    delta_a += scm.alpha(j) * scm.delta(0, j);
    gamma_a += scm.alpha(j) * scm.gamma_a(j);
    beta_delta += scm.beta(j) * scm.delta(0, j);
    beta_gamma += scm.beta(j) * scm.gamma_a(j);
  }

  ExclusionViolationScm scalar;
  scalar.beta = alpha_beta / s;
  scalar.delta_a = delta_a;
  scalar.gamma_a = gamma_a;
  scalar.delta_y = beta_delta - scalar.beta * delta_a;
  scalar.gamma_y = beta_gamma + scm.gamma_y - scalar.beta * gamma_a;
  scalar.var_eps_a = s;

  // The variance the scalar outcome error needs on top of the unit eps_y to
  // absorb the component-level variation the projection on a leaves behind:
  // sum over pairs of the squared 2x2 minors of (beta, alpha), over s.
  double minors = 0.0;
  for (Eigen::Index l = 0; l < k; ++l) {
    for (Eigen::Index j = l + 1; j < k; ++j) {
      const double minor = scm.beta(l) * scm.alpha(j) - scm.beta(j) * scm.alpha(l);
      minors += minor * minor;
    }
  }
  scalar.var_eps_y = 1.0 + minors / s;
  return scalar;
}

Eigen::Matrix4d covariance_iuay(const ExclusionViolationScm& scm) {
  if (!(scm.var_eps_a > 0.0) || !(scm.var_eps_y > 0.0)) {
    throw ValidationError("exclusion-violation model: error variances must be positive");
  }
  // Coefficients of (i, u, a, y) on the errors (eps_i, eps_u, eps_a, eps_y).
  Eigen::Matrix4d coef = Eigen::Matrix4d::Zero();
  coef(0, 0) = 1.0;
  coef(1, 1) = 1.0;
  coef.row(2) << scm.delta_a, scm.gamma_a, 1.0, 0.0;
  coef.row(3) = scm.beta * coef.row(2);
  coef(3, 0) += scm.delta_y;
  coef(3, 1) += scm.gamma_y;
  coef(3, 3) = 1.0;

  const Eigen::Vector4d err_var(1.0, 1.0, scm.var_eps_a, scm.var_eps_y);
  const Eigen::Matrix4d cov = coef * err_var.asDiagonal() * coef.transpose();
  return Eigen::Matrix4d(cov.selfadjointView<Eigen::Lower>());
}

double verify_distribution_equivalence(const AggregateIvScm& scm,
                                       const ExclusionViolationScm& scalar) {
  check_mapping_preconditions(scm);
  const PopulationMoments pm = population_moments(scm);
  const char* names[4] = {"i1", "u", "a", "y"};
  Eigen::Matrix4d aggregate_cov;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) aggregate_cov(r, c) = pm.covariance(names[r], names[c]);
  }
  return (aggregate_cov - covariance_iuay(scalar)).cwiseAbs().maxCoeff();
}

Dataset sample_exclusion_violation(const ExclusionViolationScm& scm, std::int64_t n,
                                   std::uint64_t seed) {
  if (!(scm.var_eps_a > 0.0) || !(scm.var_eps_y > 0.0)) {
    throw ValidationError("exclusion-violation model: error variances must be positive");
  }
  if (n < 0) throw ValidationError("sample size must be non-negative");
  const Eigen::Index rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd values(rows, 4);

  const auto fill_normals = [&](Eigen::Index col, std::uint64_t stream, double sd) {
    rng::NormalStream s(rng::derive_stream(seed, stream));
    for (Eigen::Index r = 0; r < rows; ++r) values(r, col) = sd * s.normal();
  };
  fill_normals(0, 0, 1.0);                         // i
  fill_normals(1, 1, 1.0);                         // u
  fill_normals(2, 2, std::sqrt(scm.var_eps_a));    // eps_a
  fill_normals(3, 3, std::sqrt(scm.var_eps_y));    // eps_y
  values.col(2) += scm.delta_a * values.col(0) + scm.gamma_a * values.col(1);
  values.col(3) +=
      scm.beta * values.col(2) + scm.delta_y * values.col(0) + scm.gamma_y * values.col(1);

  return Dataset({"i1", "u", "a", "y"}, std::move(values));
}

ExclusionViolationScm exclusion_from_config(const Config& config) {
  ExclusionViolationScm scm;
  scm.beta = config.number("exclusion.beta");
  scm.delta_a = config.number("exclusion.delta_a");
  scm.gamma_a = config.number("exclusion.gamma_a");
  scm.delta_y = config.number("exclusion.delta_y");
  scm.gamma_y = config.number("exclusion.gamma_y");
  scm.var_eps_a = config.number_or("exclusion.var_eps_a", 1.0);
  scm.var_eps_y = config.number_or("exclusion.var_eps_y", 1.0);
  return scm;
}

std::string to_config_text(const ExclusionViolationScm& scm) {
  std::ostringstream out;
  out << "exclusion.beta = " << format_double(scm.beta) << "\n";
  out << "exclusion.delta_a = " << format_double(scm.delta_a) << "\n";
  out << "exclusion.gamma_a = " << format_double(scm.gamma_a) << "\n";
  out << "exclusion.delta_y = " << format_double(scm.delta_y) << "\n";
  out << "exclusion.gamma_y = " << format_double(scm.gamma_y) << "\n";
  out << "exclusion.var_eps_a = " << format_double(scm.var_eps_a) << "\n";
  out << "exclusion.var_eps_y = " << format_double(scm.var_eps_y) << "\n";
  return out.str();
}

}  // namespace aggiv
