#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aggiv/config.hpp"
#include "aggiv/dataset.hpp"
#include "aggiv/scm.hpp"

namespace aggiv {

/// Default tolerance for the Gaussian family's affine constraints.
inline constexpr double kAcidConstraintTol = 1e-10;

/// Gaussian family of component intervention distributions: under do(a) the
/// components are N(c + a*d, sigma). To make the intervention consistent
/// with the aggregation rule, the parameters must satisfy
///   alpha . c = 0,  alpha . d = 1,  alpha^T sigma = 0,  sigma >= 0 (PSD),
/// so that alpha . a_components == a holds almost surely. The struct carries
/// the aggregation weights the constraints refer to.
struct GaussianAcid {
  Eigen::VectorXd alpha;  ///< aggregation weights, length k
  Eigen::VectorXd c;      ///< mean offset, length k
  Eigen::VectorXd d;      ///< mean slope in the intervention value, length k
  Eigen::MatrixXd sigma;  ///< component covariance, k x k

  Eigen::Index k() const { return alpha.size(); }
};

/// Residual of each affine constraint, with a pass flag at tolerance `tol`.
struct AcidConstraintReport {
  struct Entry {
    std::string constraint;  ///< e.g. "alpha . d = 1"
    double residual;         ///< absolute violation
    bool pass;
  };
  std::vector<Entry> entries;
  bool pass = true;

  std::string summary() const;
};

/// Checks dimensions, symmetry of sigma, the three affine constraints and
/// positive semidefiniteness. Dimension mismatches throw ValidationError;
/// constraint violations are reported, not thrown.
AcidConstraintReport validate_gaussian_acid(const GaussianAcid& acid,
                                            double tol = kAcidConstraintTol);

/// Throws ValidationError with the report summary when validation fails.
void require_valid(const GaussianAcid& acid, double tol = kAcidConstraintTol);

/// Average causal effect of a unit shift of the aggregate:
///   E[y | do(a+1)] - E[y | do(a)] = sum_j beta(j) d(j), independent of a.
double ace_gaussian(const GaussianAcid& acid, const Eigen::VectorXd& beta);

/// n draws of the components under do(a), columns a1..ak. Draws are
/// generated inside the hyperplane alpha . x = a by parameterizing the
/// orthogonal complement of alpha, so every row satisfies the aggregation
/// constraint to machine precision rather than approximately.
Dataset sample_gaussian_intervention(const GaussianAcid& acid, double a, std::int64_t n,
                                     std::uint64_t seed);

/// Any mechanism that can draw component values under do(a).
using InterventionSampler =
    std::function<Dataset(double a, std::int64_t n, std::uint64_t seed)>;

/// Sampler backed by sample_gaussian_intervention (the acid is copied).
InterventionSampler gaussian_intervention_sampler(const GaussianAcid& acid);

/// Monte Carlo estimate of E[y | do(a+1)] - E[y | do(a)] where
/// y's component effects are beta: difference of the sample means of
/// beta . components across two independent batches of size n.
double ace_monte_carlo(const InterventionSampler& sampler, const Eigen::VectorXd& beta,
                       double a, std::int64_t n, std::uint64_t seed);

/// The interventional distribution that matches the observational
/// conditional of the components given the aggregate:
///   d = sigma' alpha / (alpha^T sigma' alpha),  c = 0,
///   sigma = sigma' - sigma' alpha alpha^T sigma' / (alpha^T sigma' alpha),
/// with sigma' the observational component covariance of the SCM.
GaussianAcid natural_acid_from_scm(const AggregateIvScm& scm);

/// The distribution that reproduces the IV estimand of one instrument:
///   d(j) = delta(l,j) / sum_i alpha(i) delta(l,i),  c = 0,
///   sigma = sigma_scale * (I - alpha alpha^T / |alpha|^2).
/// Throws ValidationError when the instrument is irrelevant. ace_gaussian of
/// the result equals iv_estimand_population for the same instrument.
GaussianAcid instrument_tuned_acid(const AggregateIvScm& scm, Eigen::Index instrument = 0,
                                   double sigma_scale = 1.0);

/// Instrument-tuned except on `proportional_set` (0-based component indices,
/// where beta(j)/alpha(j) must share a common ratio): those components
/// absorb the slack r = 1 - sum_{j not in set} alpha(j) d(j) proportionally
/// to alpha, d(j) = r * alpha(j) / sum_{i in set} alpha(i)^2. The ACE still
/// equals the IV estimand. An empty set reduces to instrument_tuned_acid.
GaussianAcid partially_instrument_tuned_acid(const AggregateIvScm& scm,
                                             const std::vector<Eigen::Index>& proportional_set,
                                             Eigen::Index instrument = 0,
                                             double sigma_scale = 1.0, double tol = 1e-9);

/// Marker for the family of interventions whose scaled components
/// alpha(j) * a_j share one marginal distribution under every do(a).
struct SymmetricMarginalAcid {
  Eigen::VectorXd alpha;  ///< aggregation weights, all non-zero
};

/// ACE shared by every member of the family: sum_j beta(j) / (k * alpha(j)).
double symmetric_marginal_ace(const SymmetricMarginalAcid& acid, const Eigen::VectorXd& beta);

/// Same, reading alpha and beta from the SCM.
double symmetric_marginal_ace(const AggregateIvScm& scm);

/// A Gaussian member of the family: c = 0, d(j) = 1 / (k * alpha(j)),
/// sigma = 0, so each alpha(j) * a_j is the point mass at a / k.
GaussianAcid gaussian_representative(const SymmetricMarginalAcid& acid);

/// Uniform-based two-component intervention family with support a in [-3, 3]:
/// component 1 is uniform on [-2, 2] and component 2 given do(a) is uniform
/// on [max(a-2, -1), min(a+2, 1)] (the conditional of z2 given z1 + z2 = a
/// for independent z1 ~ U[-2,2], z2 ~ U[-1,1]). Its unit-shift effect on
/// y = 2 a1 + 3 a2 depends on the base value a, so no single ACE exists.
inline constexpr double kCounterexampleSupportMin = -3.0;
inline constexpr double kCounterexampleSupportMax = 3.0;

/// Marginal density of component 2 under do(a); zero outside its interval.
double uniform_counterexample_density(double a2, double a);

/// E[a2 | do(a)] = midpoint of the interval above.
double uniform_counterexample_component2_mean(double a);

/// E[y | do(a+1)] - E[y | do(a)] with beta = (2, 3); requires a in [-3, 2]
/// so both intervention values stay in the support.
double uniform_counterexample_delta(double a);

/// Builds a Gaussian ACID from config keys acid.kind (gaussian | natural |
/// instrument_tuned | partial), acid.c, acid.d, acid.sigma, acid.instrument,
/// acid.sigma_scale, acid.proportional_set (1-based indices). The SCM
/// supplies alpha and, for the derived kinds, the remaining structure.
GaussianAcid acid_from_config(const Config& config, const AggregateIvScm& scm);

/// Config text (acid.* keys) that acid_from_config parses back identically.
std::string to_config_text(const GaussianAcid& acid);

}  // namespace aggiv
