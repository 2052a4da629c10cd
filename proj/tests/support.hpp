#pragma once

// Shared test helpers: a small deterministic generator for random models and
// independent statistical oracles (sample moments, rank correlation). These
// deliberately avoid the library's own closed-form code paths so that tests
// compare two independent routes to the same quantity.

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "aggiv/rng.hpp"
#include "aggiv/scm.hpp"

namespace aggiv::test {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : stream_(seed) {}

  double uniform() { return stream_.uniform(); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * stream_.uniform(); }
  double normal() { return stream_.normal(); }

  /// Inclusive integer range.
  int uniform_int(int lo, int hi) {
    const int span = hi - lo + 1;
    const int offset = std::min(span - 1, static_cast<int>(uniform() * span));
    return lo + offset;
  }

  /// Random sign, magnitude in [min_abs, max_abs].
  double away_from_zero(double min_abs, double max_abs) {
    const double magnitude = uniform(min_abs, max_abs);
    return uniform() < 0.5 ? -magnitude : magnitude;
  }

 private:
  rng::NormalStream stream_;
};

struct RandomScmOptions {
  int min_k = 1;
  int max_k = 6;
  int min_m = 1;
  int max_m = 3;
  bool unit_variances = false;
  double min_relevance = 0.3;  ///< lower bound on |sum_j alpha(j) delta(l,j)|
};

/// A random valid SCM whose every instrument is relevant and whose alpha
/// entries are bounded away from zero.
inline AggregateIvScm random_scm(Rng& rng, const RandomScmOptions& opts = {}) {
  const int k = rng.uniform_int(opts.min_k, opts.max_k);
  const int m = rng.uniform_int(opts.min_m, opts.max_m);

  AggregateIvScm scm;
  scm.alpha = Eigen::VectorXd(k);
  scm.beta = Eigen::VectorXd(k);
  scm.gamma_a = Eigen::VectorXd(k);
  for (int j = 0; j < k; ++j) {
    scm.alpha(j) = rng.away_from_zero(0.3, 1.5);
    scm.beta(j) = rng.uniform(-2.0, 2.0);
    scm.gamma_a(j) = rng.uniform(-1.0, 1.0);
  }
  scm.gamma_y = rng.uniform(-1.0, 1.0);

  scm.delta = Eigen::MatrixXd(m, k);
  for (int l = 0; l < m; ++l) {
    while (true) {
      double den = 0.0;
      for (int j = 0; j < k; ++j) {
        scm.delta(l, j) = rng.uniform(-1.5, 1.5);
        den += scm.alpha(j) * scm.delta(l, j);
      }
      if (std::fabs(den) >= opts.min_relevance) break;
    }
  }

  if (opts.unit_variances) {
    scm.var_u = 1.0;
    scm.var_y = 1.0;
    scm.var_i = Eigen::VectorXd::Ones(m);
    scm.var_a = Eigen::VectorXd::Ones(k);
  } else {
    scm.var_u = rng.uniform(0.5, 2.0);
    scm.var_y = rng.uniform(0.5, 2.0);
    scm.var_i = Eigen::VectorXd(m);
    scm.var_a = Eigen::VectorXd(k);
    for (int l = 0; l < m; ++l) scm.var_i(l) = rng.uniform(0.5, 2.0);
    for (int j = 0; j < k; ++j) scm.var_a(j) = rng.uniform(0.5, 2.0);
  }
  return scm;
}

/// Unbiased sample covariance (denominator n - 1).
inline double sample_covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double mx = x.mean();
  const double my = y.mean();
  return ((x.array() - mx) * (y.array() - my)).sum() / static_cast<double>(x.size() - 1);
}

inline double sample_variance(const Eigen::VectorXd& x) { return sample_covariance(x, x); }

/// Sample covariance matrix of the columns.
inline Eigen::MatrixXd sample_covariance_matrix(const Eigen::MatrixXd& values) {
  const Eigen::RowVectorXd means = values.colwise().mean();
  const Eigen::MatrixXd centered = values.rowwise() - means;
  return (centered.transpose() * centered) / static_cast<double>(values.rows() - 1);
}

/// Ranks with ties replaced by their average rank (1-based).
inline std::vector<double> average_ranks(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
    i = j + 1;
  }
  return ranks;
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const Eigen::Map<const Eigen::VectorXd> vx(rx.data(), static_cast<Eigen::Index>(rx.size()));
  const Eigen::Map<const Eigen::VectorXd> vy(ry.data(), static_cast<Eigen::Index>(ry.size()));
  const double cov = sample_covariance(vx, vy);
  const double sx = sample_variance(vx);
  const double sy = sample_variance(vy);
  return cov / std::sqrt(sx * sy);
}

}  // namespace aggiv::test
