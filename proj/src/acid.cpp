#include "aggiv/acid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "aggiv/errors.hpp"
#include "aggiv/rng.hpp"

namespace aggiv {

namespace {

std::vector<std::string> component_labels(Eigen::Index k) {
  std::vector<std::string> labels;
  for (Eigen::Index j = 0; j < k; ++j) labels.push_back("a" + std::to_string(j + 1));
  return labels;
}

// Orthonormal basis of the hyperplane orthogonal to alpha, k x (k-1).
Eigen::MatrixXd orthogonal_complement(const Eigen::VectorXd& alpha) {
  const Eigen::Index k = alpha.size();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(alpha);
  const Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(k - 1);
}

// Centered projector I - alpha alpha^T / |alpha|^2 (the default covariance
// shape for the tuned families; it is PSD and annihilates alpha).
Eigen::MatrixXd alpha_projector(const Eigen::VectorXd& alpha) {
  const double norm2 = alpha.squaredNorm();
  const Eigen::Index k = alpha.size();
  return Eigen::MatrixXd::Identity(k, k) - (alpha * alpha.transpose()) / norm2;
}

double relevance_denominator(const AggregateIvScm& scm, Eigen::Index instrument) {
  if (instrument < 0 || instrument >= scm.m()) {
    throw ValidationError("instrument index " + std::to_string(instrument) +
                          " out of range [0, " + std::to_string(scm.m()) + ")");
  }
  double den = 0.0;
  for (Eigen::Index j = 0; j < scm.k(); ++j) den += scm.alpha(j) * scm.delta(instrument, j);
  if (den == 0.0) {
    throw ValidationError("irrelevant instrument " + std::to_string(instrument + 1) +
                          ": sum_j alpha(j) * delta(l,j) is zero");
  }
  return den;
}

void check_sigma_scale(double sigma_scale) {
  if (!(sigma_scale >= 0.0)) throw ValidationError("sigma_scale must be non-negative");
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(v(i));
  }
  return out + "]";
}

std::string format_matrix(const Eigen::MatrixXd& m) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r > 0) out += ", ";
    out += format_vector(m.row(r).transpose());
  }
  return out + "]";
}

}  // namespace

std::string AcidConstraintReport::summary() const {
  std::ostringstream out;
  for (const auto& entry : entries) {
    out << (entry.pass ? "ok   " : "FAIL ") << entry.constraint
        << " (residual " << format_double(entry.residual) << ")\n";
  }
  return out.str();
}

AcidConstraintReport validate_gaussian_acid(const GaussianAcid& acid, double tol) {
  const Eigen::Index k = acid.k();
  if (k < 1) throw ValidationError("acid: alpha must have at least one component");
  if (acid.c.size() != k || acid.d.size() != k) {
    throw ValidationError("acid: c and d must have length k = " + std::to_string(k));
  }
  if (acid.sigma.rows() != k || acid.sigma.cols() != k) {
    throw ValidationError("acid: sigma must be k x k with k = " + std::to_string(k));
  }
  if (acid.alpha.isZero(0.0)) {
    throw ValidationError("acid: degenerate aggregate, every alpha(j) is zero");
  }

  AcidConstraintReport report;
  const auto add = [&](std::string constraint, double residual) {
    const bool pass = residual <= tol;
    report.entries.push_back({std::move(constraint), residual, pass});
    if (!pass) report.pass = false;
  };

  add("alpha . c = 0", std::fabs(acid.alpha.dot(acid.c)));
  add("alpha . d = 1", std::fabs(acid.alpha.dot(acid.d) - 1.0));
  add("sigma symmetric", (acid.sigma - acid.sigma.transpose()).cwiseAbs().maxCoeff());
  add("alpha^T sigma = 0", (acid.alpha.transpose() * acid.sigma).cwiseAbs().maxCoeff());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(acid.sigma);
  if (es.info() != Eigen::Success) throw ValidationError("acid: eigendecomposition of sigma failed");
  const double min_eig = es.eigenvalues().minCoeff();
  add("sigma positive semidefinite", std::max(0.0, -min_eig));
  return report;
}

void require_valid(const GaussianAcid& acid, double tol) {
  const auto report = validate_gaussian_acid(acid, tol);
  if (!report.pass) {
    throw ValidationError("invalid Gaussian intervention distribution:\n" + report.summary());
  }
}

double ace_gaussian(const GaussianAcid& acid, const Eigen::VectorXd& beta) {
  require_valid(acid);
  if (beta.size() != acid.k()) {
    throw ValidationError("ace_gaussian: beta must have length k = " + std::to_string(acid.k()));
  }
  double ace = 0.0;
  for (Eigen::Index j = 0; j < acid.k(); ++j) ace += beta(j) * acid.d(j);
  return ace;
}

Dataset sample_gaussian_intervention(const GaussianAcid& acid, double a, std::int64_t n,
                                     std::uint64_t seed) {
  require_valid(acid);
  if (n < 0) throw ValidationError("sample size must be non-negative");
  const Eigen::Index k = acid.k();
  const Eigen::Index rows = static_cast<Eigen::Index>(n);
  const Eigen::VectorXd mu = acid.c + a * acid.d;
  Eigen::MatrixXd values(rows, k);

  if (k == 1) {
    // The constraint pins the single component to a / alpha exactly (mu).
    for (Eigen::Index r = 0; r < rows; ++r) values(r, 0) = mu(0);
  } else {
    // Restrict sigma to the complement of alpha and take a symmetric square
    // root there; tiny negative eigenvalues from rounding are clamped.
    const Eigen::MatrixXd basis = orthogonal_complement(acid.alpha);
    const Eigen::MatrixXd restricted = basis.transpose() * acid.sigma * basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(restricted);
    if (es.info() != Eigen::Success) {
      throw ValidationError("acid: eigendecomposition of restricted sigma failed");
    }
    const Eigen::MatrixXd root =
        es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    const Eigen::MatrixXd transform = basis * root;  // k x (k-1)

    rng::NormalStream stream(rng::derive_stream(seed, 0));
    Eigen::VectorXd z(k - 1);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index i = 0; i < k - 1; ++i) z(i) = stream.normal();
      values.row(r) = (mu + transform * z).transpose();
    }
  }

  Dataset data(component_labels(k), std::move(values));
  data.intervention_value = a;
  return data;
}

InterventionSampler gaussian_intervention_sampler(const GaussianAcid& acid) {
  return [acid](double a, std::int64_t n, std::uint64_t seed) {
    return sample_gaussian_intervention(acid, a, n, seed);
  };
}

double ace_monte_carlo(const InterventionSampler& sampler, const Eigen::VectorXd& beta,
                       double a, std::int64_t n, std::uint64_t seed) {
  if (n <= 0) throw ValidationError("ace_monte_carlo: sample size must be positive");
  const Dataset base = sampler(a, n, rng::derive_stream(seed, 0));
  const Dataset shifted = sampler(a + 1.0, n, rng::derive_stream(seed, 1));
  if (base.cols() != beta.size() || shifted.cols() != beta.size()) {
    throw ValidationError("ace_monte_carlo: sampler column count does not match beta");
  }
  const double mean_base = (base.values() * beta).mean();
  const double mean_shifted = (shifted.values() * beta).mean();
  return mean_shifted - mean_base;
}

GaussianAcid natural_acid_from_scm(const AggregateIvScm& scm) {
  const PopulationMoments pm = population_moments(scm);
  const Eigen::Index k = scm.k();
  const Eigen::Index first = scm.m() + 1;  // component block starts after i1..im, u
  const Eigen::MatrixXd observational = pm.cov.block(first, first, k, k);

  const Eigen::VectorXd v = observational * scm.alpha;  // cov(a_j, a)
  const double var_a = scm.alpha.dot(v);
  if (!(var_a > 0.0)) throw ValidationError("natural acid: aggregate variance is not positive");

  GaussianAcid acid;
  acid.alpha = scm.alpha;
  acid.c = Eigen::VectorXd::Zero(k);
  acid.d = v / var_a;
  acid.sigma = observational - (v * v.transpose()) / var_a;
  return acid;
}

GaussianAcid instrument_tuned_acid(const AggregateIvScm& scm, Eigen::Index instrument,
                                   double sigma_scale) {
  require_valid(scm);
  check_sigma_scale(sigma_scale);
  const double den = relevance_denominator(scm, instrument);
  GaussianAcid acid;
  acid.alpha = scm.alpha;
  acid.c = Eigen::VectorXd::Zero(scm.k());
  acid.d = scm.delta.row(instrument).transpose() / den;
  acid.sigma = sigma_scale * alpha_projector(scm.alpha);
  return acid;
}

GaussianAcid partially_instrument_tuned_acid(const AggregateIvScm& scm,
                                             const std::vector<Eigen::Index>& proportional_set,
                                             Eigen::Index instrument, double sigma_scale,
                                             double tol) {
  require_valid(scm);
  check_sigma_scale(sigma_scale);
  const Eigen::Index k = scm.k();

  std::vector<bool> in_set(static_cast<std::size_t>(k), false);
  for (const Eigen::Index j : proportional_set) {
    if (j < 0 || j >= k) {
      throw ValidationError("proportional_set index " + std::to_string(j) +
                            " out of range [0, " + std::to_string(k) + ")");
    }
    if (in_set[static_cast<std::size_t>(j)]) {
      throw ValidationError("proportional_set contains a duplicate index");
    }
    in_set[static_cast<std::size_t>(j)] = true;
  }
  if (proportional_set.empty()) return instrument_tuned_acid(scm, instrument, sigma_scale);

  // On the set, beta must be proportional to alpha; the shared ratio makes
  // the ACE insensitive to how the slack is split across those components.
  double tau = 0.0;
  bool have_tau = false;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (!in_set[static_cast<std::size_t>(j)]) continue;
    if (scm.alpha(j) == 0.0) {
      throw ValidationError("proportional_set component " + std::to_string(j + 1) +
                            " has alpha(j) = 0, ratio undefined");
    }
    const double ratio = scm.beta(j) / scm.alpha(j);
    if (!have_tau) {
      tau = ratio;
      have_tau = true;
    } else if (std::fabs(ratio - tau) > tol * std::max(1.0, std::fabs(tau))) {
      throw ValidationError("proportional_set is not proportional: beta(j)/alpha(j) differs");
    }
  }

  const double den = relevance_denominator(scm, instrument);
  GaussianAcid acid;
  acid.alpha = scm.alpha;
  acid.c = Eigen::VectorXd::Zero(k);
  acid.d = Eigen::VectorXd::Zero(k);

  double set_norm2 = 0.0;
  double outside = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (in_set[static_cast<std::size_t>(j)]) {
      set_norm2 += scm.alpha(j) * scm.alpha(j);
    } else {
      acid.d(j) = scm.delta(instrument, j) / den;
      outside += scm.alpha(j) * acid.d(j);
    }
  }
  const double slack = 1.0 - outside;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (in_set[static_cast<std::size_t>(j)]) acid.d(j) = slack * scm.alpha(j) / set_norm2;
  }
  acid.sigma = sigma_scale * alpha_projector(scm.alpha);
  return acid;
}

double symmetric_marginal_ace(const SymmetricMarginalAcid& acid, const Eigen::VectorXd& beta) {
  const Eigen::Index k = acid.alpha.size();
  if (k < 1) throw ValidationError("symmetric marginal acid: alpha must be non-empty");
  if (beta.size() != k) {
    throw ValidationError("symmetric marginal ace: beta must have length k");
  }
  double ace = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (acid.alpha(j) == 0.0) {
      throw ValidationError("symmetric marginal acid: alpha(" + std::to_string(j + 1) +
                            ") is zero");
    }
    ace += beta(j) / (static_cast<double>(k) * acid.alpha(j));
  }
  return ace;
}

double symmetric_marginal_ace(const AggregateIvScm& scm) {
  require_valid(scm);
  return symmetric_marginal_ace(SymmetricMarginalAcid{scm.alpha}, scm.beta);
}

GaussianAcid gaussian_representative(const SymmetricMarginalAcid& marker) {
  const Eigen::Index k = marker.alpha.size();
  GaussianAcid acid;
  acid.alpha = marker.alpha;
  acid.c = Eigen::VectorXd::Zero(k);
  acid.d = Eigen::VectorXd(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (marker.alpha(j) == 0.0) {
      throw ValidationError("symmetric marginal acid: alpha(" + std::to_string(j + 1) +
                            ") is zero");
    }
    acid.d(j) = 1.0 / (static_cast<double>(k) * marker.alpha(j));
  }
  acid.sigma = Eigen::MatrixXd::Zero(k, k);
  return acid;
}

namespace {

void check_counterexample_support(double a) {
  if (!(a >= kCounterexampleSupportMin && a <= kCounterexampleSupportMax)) {
    throw ValidationError("intervention value " + format_double(a) +
                          " outside the support [-3, 3] of the counterexample family");
  }
}

}  // namespace

double uniform_counterexample_density(double a2, double a) {
  check_counterexample_support(a);
  const double lo = std::max(a - 2.0, -1.0);
  const double hi = std::min(a + 2.0, 1.0);
  if (a2 < lo || a2 > hi) return 0.0;
  return 1.0 / (hi - lo);
}

double uniform_counterexample_component2_mean(double a) {
  check_counterexample_support(a);
  const double lo = std::max(a - 2.0, -1.0);
  const double hi = std::min(a + 2.0, 1.0);
  return 0.5 * (lo + hi);
}

double uniform_counterexample_delta(double a) {
  if (!(a >= kCounterexampleSupportMin && a + 1.0 <= kCounterexampleSupportMax)) {
    throw ValidationError("unit shift from " + format_double(a) +
                          " leaves the support [-3, 3] of the counterexample family");
  }
  // Component 1 is uniform on [-2, 2] under every do(a), so only component 2
  // moves the outcome y = 2 a1 + 3 a2.
  return 3.0 * (uniform_counterexample_component2_mean(a + 1.0) -
                uniform_counterexample_component2_mean(a));
}

GaussianAcid acid_from_config(const Config& config, const AggregateIvScm& scm) {
  const std::string kind = config.text_or("acid.kind", "gaussian");
  const auto instrument = config.integer_or("acid.instrument", 1) - 1;  // 1-based in config
  const double sigma_scale = config.number_or("acid.sigma_scale", 1.0);

  if (kind == "gaussian") {
    GaussianAcid acid;
    acid.alpha = scm.alpha;
    acid.c = config.has("acid.c") ? config.vector("acid.c")
                                  : Eigen::VectorXd::Zero(scm.k()).eval();
    acid.d = config.vector("acid.d");
    acid.sigma = config.has("acid.sigma")
                     ? config.matrix("acid.sigma")
                     : Eigen::MatrixXd::Zero(scm.k(), scm.k()).eval();
    return acid;
  }
  if (kind == "natural") return natural_acid_from_scm(scm);
  if (kind == "instrument_tuned") return instrument_tuned_acid(scm, instrument, sigma_scale);
  if (kind == "partial") {
    std::vector<Eigen::Index> set;
    if (config.has("acid.proportional_set")) {
      const Eigen::VectorXd raw = config.vector("acid.proportional_set");
      for (Eigen::Index i = 0; i < raw.size(); ++i) {
        set.push_back(static_cast<Eigen::Index>(raw(i)) - 1);  // 1-based in config
      }
    }
    return partially_instrument_tuned_acid(scm, set, instrument, sigma_scale);
  }
  throw ConfigError("config: unknown acid.kind '" + kind +
                    "' (expected gaussian, natural, instrument_tuned or partial)");
}

std::string to_config_text(const GaussianAcid& acid) {
  std::ostringstream out;
  out << "acid.kind = gaussian\n";
  out << "acid.c = " << format_vector(acid.c) << "\n";
  out << "acid.d = " << format_vector(acid.d) << "\n";
  out << "acid.sigma = " << format_matrix(acid.sigma) << "\n";
  return out.str();
}

}  // namespace aggiv
