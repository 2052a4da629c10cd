// Acceptance suite: ten crisp criteria, one line of output each.
//
//   [PASS] 3. figure 2B curves ... (0.42 s, budget 30 s)
//
// Every tolerance is pinned next to the check it guards. A criterion fails
// honestly: on a violated bound, an exceeded runtime budget, or an exception.
// The process exits 0 only when all ten pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "aggiv/acid.hpp"
#include "aggiv/diagnostics.hpp"
#include "aggiv/equivalence.hpp"
#include "aggiv/errors.hpp"
#include "aggiv/estimators.hpp"
#include "aggiv/experiments.hpp"
#include "aggiv/scm.hpp"
#include "aggiv/version.hpp"
#include "support.hpp"

using namespace aggiv;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;  // <= 0: no stated budget, runtime is reported only
  std::function<Outcome()> run;
};

std::string fmt(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.3g", x);
  return buffer;
}

// ---------------------------------------------------------------------------
// 1. Closed-form IV estimand equals the covariance ratio from the moments.
// ---------------------------------------------------------------------------
Outcome criterion1() {
  constexpr double kTol = 1e-12;
  test::Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const AggregateIvScm scm = test::random_scm(rng);
    const PopulationMoments pm = population_moments(scm);
    for (Eigen::Index l = 0; l < scm.m(); ++l) {
      const std::string label = "i" + std::to_string(l + 1);
      const double ratio = pm.cov(pm.index_of("y"), pm.index_of(label)) /
                           pm.cov(pm.index_of("a"), pm.index_of(label));
      worst = std::max(worst, std::fabs(iv_estimand_population(scm, l) - ratio));
    }
  }
  return {worst <= kTol, "100 random models, max |estimand - cov ratio| = " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 2. Figure 2A: theory columns are beta1/2 + 1 and 2 beta1 - 2, both equal 2
//    at beta1 = 2, and the n = 1000 estimates track the estimand.
// ---------------------------------------------------------------------------
Outcome criterion2() {
  constexpr double kCurveTol = 1e-12;
  ExperimentConfig config;
  config.id = ExperimentId::Figure2a;
  config.sample_sizes = {1000};
  const auto rows = run_figure2a(config);
  if (rows.size() != 51) return {false, "expected 51 grid rows, got " + std::to_string(rows.size())};

  double worst_curve = 0.0;
  bool anchor_exact = false;
  int within_band = 0;
  for (const auto& row : rows) {
    worst_curve = std::max(worst_curve,
                           std::fabs(row.beta_iv_theoretical - (row.x / 2.0 + 1.0)));
    worst_curve = std::max(worst_curve,
                           std::fabs(row.ace_theoretical - (2.0 * row.x - 2.0)));
    if (row.x == 2.0) {
      anchor_exact = row.beta_iv_theoretical == 2.0 && row.ace_theoretical == 2.0;
    }
    if (row.status != "ok") continue;

    // Closed-form sd of the single-instrument 2SLS estimate at this grid
    // point: sqrt(var(u) var(i) / n) / |cov(a, i)| with u = y - beta_iv a.
    const PopulationMoments pm = population_moments(two_component_scm(row.x));
    const auto v = [&](const char* x, const char* y) {
      return pm.cov(pm.index_of(x), pm.index_of(y));
    };
    const double var_u = v("y", "y") - 2.0 * row.beta_iv_theoretical * v("y", "a") +
                         row.beta_iv_theoretical * row.beta_iv_theoretical * v("a", "a");
    const double sd = std::sqrt(var_u * v("i1", "i1") / static_cast<double>(row.n)) /
                      std::fabs(v("a", "i1"));
    if (std::fabs(row.sample_estimate - row.beta_iv_theoretical) <= 3.0 * sd) ++within_band;
  }
  const double fraction = static_cast<double>(within_band) / static_cast<double>(rows.size());
  const bool pass = worst_curve <= kCurveTol && anchor_exact && fraction >= 0.95;
  return {pass, "max curve deviation = " + fmt(worst_curve) +
                    ", anchor at beta1=2 " + (anchor_exact ? "exact" : "WRONG") + ", " +
                    std::to_string(within_band) + "/51 estimates within 3 sd"};
}

// ---------------------------------------------------------------------------
// 3. Figure 2B: estimand constant at 1.5, ace = 2 - d1, curves cross at 0.5.
// ---------------------------------------------------------------------------
Outcome criterion3() {
  constexpr double kTol = 1e-12;
  ExperimentConfig config;
  config.id = ExperimentId::Figure2b;
  config.sample_sizes = {1000};
  const auto rows = run_figure2b(config);
  if (rows.size() != 41) return {false, "expected 41 grid rows, got " + std::to_string(rows.size())};

  double worst = 0.0;
  bool crossing = false;
  bool ordering = true;
  for (const auto& row : rows) {
    worst = std::max(worst, std::fabs(row.beta_iv_theoretical - 1.5));
    worst = std::max(worst, std::fabs(row.ace_theoretical - (2.0 - row.x)));
    const double gap = row.ace_theoretical - row.beta_iv_theoretical;
    if (row.x == 0.5) crossing = std::fabs(gap) <= kTol;
    if (row.x < 0.5 && !(gap > 0.0)) ordering = false;   // ace above before the crossing
    if (row.x > 0.5 && !(gap < 0.0)) ordering = false;   // ace below after it
  }
  return {worst <= kTol && crossing && ordering,
          "max curve deviation = " + fmt(worst) + ", crossing at d1=0.5 " +
              (crossing ? "confirmed" : "MISSING") +
              (ordering ? "" : ", ordering around the crossing broken")};
}

// ---------------------------------------------------------------------------
// 4. Instrument-tuned and partially tuned families reproduce the estimand.
// ---------------------------------------------------------------------------
Outcome criterion4() {
  constexpr double kTol = 1e-12;
  test::Rng rng(202);
  double worst_tuned = 0.0;
  double worst_partial = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    AggregateIvScm scm = test::random_scm(rng);
    const auto l = static_cast<Eigen::Index>(rng.uniform_int(0, static_cast<int>(scm.m()) - 1));
    const double target = iv_estimand_population(scm, l);

    const GaussianAcid tuned = instrument_tuned_acid(scm, l, rng.uniform(0.0, 2.0));
    worst_tuned = std::max(worst_tuned, std::fabs(ace_gaussian(tuned, scm.beta) - target));

    // Random proportional subset: force beta = tau * alpha on the subset so
    // the partially tuned construction applies, then re-evaluate its target.
    const int k = static_cast<int>(scm.k());
    std::vector<Eigen::Index> indices(static_cast<std::size_t>(k));
    std::iota(indices.begin(), indices.end(), 0);
    for (int j = k - 1; j > 0; --j) {
      std::swap(indices[static_cast<std::size_t>(j)],
                indices[static_cast<std::size_t>(rng.uniform_int(0, j))]);
    }
    const int subset_size = rng.uniform_int(1, k);
    const std::vector<Eigen::Index> subset(indices.begin(), indices.begin() + subset_size);
    const double tau = rng.uniform(-2.0, 2.0);
    for (const auto j : subset) scm.beta(j) = tau * scm.alpha(j);

    const GaussianAcid partial =
        partially_instrument_tuned_acid(scm, subset, l, rng.uniform(0.0, 2.0));
    worst_partial = std::max(worst_partial, std::fabs(ace_gaussian(partial, scm.beta) -
                                                      iv_estimand_population(scm, l)));
  }
  const bool pass = worst_tuned <= kTol && worst_partial <= kTol;
  return {pass, "100 random models, max |ace - estimand|: tuned = " + fmt(worst_tuned) +
                    ", partially tuned = " + fmt(worst_partial)};
}

// ---------------------------------------------------------------------------
// 5. Exclusion-violation mapping: same second moments, zero direct path under
//    proportional effects, and the outcome error variance via two routes.
// ---------------------------------------------------------------------------
Outcome criterion5() {
  constexpr double kMomentTol = 1e-10;
  constexpr double kZeroTol = 1e-12;
  test::RandomScmOptions opts;
  opts.min_m = opts.max_m = 1;
  opts.unit_variances = true;

  test::Rng rng(303);
  double worst_moments = 0.0;
  double worst_variance = 0.0;
  double worst_direct = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    AggregateIvScm scm = test::random_scm(rng, opts);
    if (trial % 2 == 0) {
      const double tau = rng.uniform(-2.0, 2.0);
      scm.beta = tau * scm.alpha;  // proportional effects: exclusion must hold
    }
    const ExclusionViolationScm scalar = exclusion_violation_equivalent(scm);
    worst_moments = std::max(worst_moments, verify_distribution_equivalence(scm, scalar));

    // Independent route for the scalar outcome error variance:
    // sum beta^2 + 1 - (alpha . beta)^2 / |alpha|^2 (Lagrange identity form).
    const double s = scm.alpha.squaredNorm();
    const double direct = scm.beta.squaredNorm() + 1.0 -
                          scm.alpha.dot(scm.beta) * scm.alpha.dot(scm.beta) / s;
    worst_variance = std::max(worst_variance, std::fabs(scalar.var_eps_y - direct));
    if (trial % 2 == 0) worst_direct = std::max(worst_direct, std::fabs(scalar.delta_y));
  }
  const bool pass =
      worst_moments <= kMomentTol && worst_variance <= kMomentTol && worst_direct <= kZeroTol;
  return {pass, "100 random unit-variance models: max |cov diff| = " + fmt(worst_moments) +
                    ", var(eps_y') route gap = " + fmt(worst_variance) +
                    ", |delta_y'| under proportional effects = " + fmt(worst_direct)};
}

// ---------------------------------------------------------------------------
// 6. Table 1: the six instrument-treatment correlations. The Weak-Weak first
//    cell is 0.1424645..., which the reference prints as 0.143 (rounded up in
//    its last digit); agreement is therefore pinned at 1e-3, which all other
//    cells meet with two orders of margin.
// ---------------------------------------------------------------------------
Outcome criterion6() {
  constexpr double kTol = 1e-3;
  const double expected[3][2] = {{0.977, 0.037}, {0.788, 0.591}, {0.143, 0.074}};
  const auto rows = run_table1();
  if (rows.size() != 3) return {false, "expected 3 configurations"};
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    worst = std::max(worst, std::fabs(rows[i].cor_i1 - expected[i][0]));
    worst = std::max(worst, std::fabs(rows[i].cor_i2 - expected[i][1]));
  }
  return {worst <= kTol, "six cells, max |correlation - printed value| = " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 7. Figure 4, qualitative: size at the proportional point, power growth for
//    strong instruments, near-zero power for weak ones.
// ---------------------------------------------------------------------------
Outcome criterion7() {
  ExperimentConfig config;
  config.id = ExperimentId::Figure4;
  config.replicates = 100;
  config.n = 1000;
  config.levels = {0.01, 0.5};
  config.jobs = static_cast<int>(
      std::clamp<unsigned>(std::thread::hardware_concurrency(), 1u, 8u));
  const auto points = run_figure4(config);

  // 99% binomial band around the nominal level with 100 replicates.
  const auto in_band = [](double frequency, double level) {
    const double half_width = 2.5758293035489004 * std::sqrt(level * (1.0 - level) / 100.0);
    return std::fabs(frequency - level) <= half_width;
  };

  bool size_ok = true;
  std::string size_detail;
  bool weak_ok = true;
  double weak_max = 0.0;
  std::vector<double> distance;
  std::vector<double> power;
  int failures = 0;
  for (const auto& point : points) {
    failures += point.failures;
    if (point.beta1 == 2.0 && !in_band(point.frequency, point.level)) {
      size_ok = false;
      size_detail += " " + point.config + "@" + fmt(point.level) + "=" + fmt(point.frequency);
    }
    if (point.config == "Weak-Weak" && point.level == 0.01) {
      weak_max = std::max(weak_max, point.frequency);
      if (point.frequency >= 0.1) weak_ok = false;
    }
    if (point.config == "Strong-Strong" && point.level == 0.5) {
      distance.push_back(std::fabs(point.beta1 - 2.0));
      power.push_back(point.frequency);
    }
  }
  const double rho = test::spearman(distance, power);
  const bool pass = size_ok && weak_ok && rho > 0.8 && failures == 0;
  return {pass, "size at beta1=2 " + std::string(size_ok ? "within" : "OUTSIDE") +
                    " the 99% band" + size_detail + "; strong-strong spearman = " + fmt(rho) +
                    "; weak-weak max frequency at level 0.01 = " + fmt(weak_max) +
                    (failures == 0 ? "" : "; " + std::to_string(failures) + " replicate failures")};
}

// ---------------------------------------------------------------------------
// 8. The uniform family that breaks value independence: exact anchors and
//    agreement with direct quadrature over its density.
// ---------------------------------------------------------------------------
Outcome criterion8() {
  constexpr double kQuadTol = 1e-6;

  // Simpson's rule for E[A2 | do(a)] over the support of the density.
  const auto quadrature_mean = [](double a) {
    const double lo = std::max(a - 2.0, -1.0);
    const double hi = std::min(a + 2.0, 1.0);
    const int intervals = 2000;  // even
    const double h = (hi - lo) / intervals;
    double sum = 0.0;
    for (int i = 0; i <= intervals; ++i) {
      const double x = lo + h * i;
      const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      sum += w * x * uniform_counterexample_density(x, a);
    }
    return sum * h / 3.0;
  };

  const bool anchors = uniform_counterexample_delta(-2.0) == 1.5 &&
                       uniform_counterexample_delta(-0.9) == 0.0;
  double worst = 0.0;
  for (const double a : {-3.0, -2.0, -1.3, -0.9, 0.4, 1.0, 1.9}) {
    const double quad_delta = 3.0 * (quadrature_mean(a + 1.0) - quadrature_mean(a));
    worst = std::max(worst, std::fabs(uniform_counterexample_delta(a) - quad_delta));
    worst = std::max(worst,
                     std::fabs(uniform_counterexample_component2_mean(a) - quadrature_mean(a)));
  }
  return {anchors && worst <= kQuadTol,
          std::string("anchors delta(-2)=1.5, delta(-0.9)=0 ") +
              (anchors ? "exact" : "WRONG") + "; max |closed form - quadrature| = " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 9. Gaussian-family property suite: hard aggregation constraint per draw,
//    value independence via Monte Carlo, and the observationally matched
//    family (validity + its covariance-weighted ACE formula).
// ---------------------------------------------------------------------------
Outcome criterion9() {
  constexpr double kResidualTol = 1e-9;
  constexpr std::int64_t kDraws = 100000;
  constexpr std::int64_t kMcDraws = 200000;

  test::Rng rng(707);
  const AggregateIvScm scm = test::random_scm(rng);
  const GaussianAcid acid = instrument_tuned_acid(scm, 0, 1.0);

  // (a) every draw satisfies alpha . x = a, not just on average.
  double worst_residual = 0.0;
  const std::int64_t per_value = kDraws / 4;
  for (const double a : {-5.0, 0.0, 3.0, 7.0}) {
    const Dataset draws = sample_gaussian_intervention(acid, a, per_value, 11);
    const Eigen::VectorXd residuals =
        (draws.values() * acid.alpha).array() - a;
    worst_residual = std::max(worst_residual, residuals.cwiseAbs().maxCoeff());
  }

  // (b) Monte Carlo ACE at several base values vs the closed form; the MC
  // standard error of a difference of two batch means is sqrt(2 b'Sb / n).
  const double exact = ace_gaussian(acid, scm.beta);
  const double spread = scm.beta.dot(acid.sigma * scm.beta);
  const double se = std::sqrt(2.0 * spread / static_cast<double>(kMcDraws));
  const auto sampler = gaussian_intervention_sampler(acid);
  double worst_mc = 0.0;
  for (const double a : {-5.0, 0.0, 7.0}) {
    const double mc = ace_monte_carlo(sampler, scm.beta, a, kMcDraws,
                                      static_cast<std::uint64_t>(a + 100.0));
    worst_mc = std::max(worst_mc, std::fabs(mc - exact));
  }
  const bool mc_ok = se > 0.0 && worst_mc <= 4.0 * se;

  // (c) the observationally matched family: valid for 50 random models and
  // ACE equal to sum_j beta(j) cov(a_j, a) / var(a) from the moments.
  double worst_natural = 0.0;
  bool all_valid = true;
  for (int trial = 0; trial < 50; ++trial) {
    const AggregateIvScm model = test::random_scm(rng);
    const GaussianAcid natural = natural_acid_from_scm(model);
    all_valid = all_valid && validate_gaussian_acid(natural).pass;
    const PopulationMoments pm = population_moments(model);
    double weighted = 0.0;
    for (Eigen::Index j = 0; j < model.k(); ++j) {
      weighted += model.beta(j) *
                  pm.cov(pm.index_of("a" + std::to_string(j + 1)), pm.index_of("a"));
    }
    weighted /= pm.cov(pm.index_of("a"), pm.index_of("a"));
    worst_natural = std::max(worst_natural,
                             std::fabs(ace_gaussian(natural, model.beta) - weighted));
  }
  // One Monte Carlo confirmation of the covariance-weighted form.
  const AggregateIvScm model = test::random_scm(rng);
  const GaussianAcid natural = natural_acid_from_scm(model);
  const double natural_spread = model.beta.dot(natural.sigma * model.beta);
  const double natural_se = std::sqrt(2.0 * natural_spread / static_cast<double>(kMcDraws));
  const double natural_mc = ace_monte_carlo(gaussian_intervention_sampler(natural), model.beta,
                                            0.0, kMcDraws, 2024);
  const bool natural_mc_ok =
      std::fabs(natural_mc - ace_gaussian(natural, model.beta)) <= 4.0 * natural_se;

  const bool pass = worst_residual <= kResidualTol && mc_ok && all_valid &&
                    worst_natural <= 1e-12 && natural_mc_ok;
  return {pass, "per-draw constraint residual = " + fmt(worst_residual) +
                    " over 1e5 draws; MC ace gap = " + fmt(worst_mc) + " (4 se = " +
                    fmt(4.0 * se) + "); matched family: " + (all_valid ? "50/50 valid" : "INVALID") +
                    ", ACE vs covariance form = " + fmt(worst_natural) +
                    ", MC confirmation gap = " + fmt(std::fabs(natural_mc - ace_gaussian(natural, model.beta)))};
}

// ---------------------------------------------------------------------------
// 10. Table 2: the four zero-restriction cases against their symbolic forms.
// ---------------------------------------------------------------------------
Outcome criterion10() {
  constexpr double kTol = 1e-12;
  test::Rng rng(909);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    AggregateIvScm scm;
    scm.alpha = Eigen::Vector2d(rng.away_from_zero(0.3, 1.5), rng.away_from_zero(0.3, 1.5));
    scm.beta = Eigen::Vector2d(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    scm.gamma_a = Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    scm.gamma_y = rng.uniform(-1.0, 1.0);
    scm.var_i = Eigen::VectorXd::Ones(1);
    scm.var_a = Eigen::VectorXd::Ones(2);
    scm.delta = Eigen::MatrixXd(1, 2);
    do {  // keep both the full and the restricted denominators away from zero
      scm.delta(0, 0) = rng.uniform(-1.5, 1.5);
      scm.delta(0, 1) = rng.uniform(-1.5, 1.5);
    } while (std::fabs(scm.alpha.dot(scm.delta.row(0))) < 0.3 ||
             std::fabs(scm.alpha(0) * scm.delta(0, 0)) < 0.3);

    GaussianAcid acid;
    acid.alpha = scm.alpha;
    acid.c = Eigen::VectorXd::Zero(2);
    const double d1 = rng.uniform(-2.0, 2.0);
    acid.d = Eigen::Vector2d(d1, (1.0 - scm.alpha(0) * d1) / scm.alpha(1));
    acid.sigma = rng.uniform(0.0, 1.0) *
                 (Eigen::Matrix2d::Identity() -
                  scm.alpha * scm.alpha.transpose() / scm.alpha.squaredNorm());

    const auto rows = run_table2(scm, acid);
    if (rows.size() != 4) return {false, "expected 4 cases"};

    const double a1 = scm.alpha(0), a2 = scm.alpha(1);
    const double b1 = scm.beta(0), b2 = scm.beta(1);
    const double e1 = scm.delta(0, 0), e2 = scm.delta(0, 1);
    const double q1 = acid.d(0), q2 = acid.d(1);
    const double expected[4][2] = {
        {(b1 * e1 + b2 * e2) / (a1 * e1 + a2 * e2), b1 * q1 + b2 * q2},  // general
        {b1 * e1 / (a1 * e1 + a2 * e2), b1 * q1},                        // beta2 = 0
        {b1 / a1, b1 * q1 + b2 * q2},                                    // delta2 = 0
        {b1 / a1, b1 * q1},                                              // both zero
    };
    for (int i = 0; i < 4; ++i) {
      worst = std::max(worst, std::fabs(rows[static_cast<std::size_t>(i)].beta_iv - expected[i][0]));
      worst = std::max(worst, std::fabs(rows[static_cast<std::size_t>(i)].ace - expected[i][1]));
    }
  }
  return {worst <= kTol,
          "20 random parameterizations, max |cell - symbolic form| = " + fmt(worst)};
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "closed-form IV estimand equals the population covariance ratio", 1.0, criterion1},
      {2, "figure 2A theory curves and sampled estimates", 30.0, criterion2},
      {3, "figure 2B constant estimand, linear ace, crossing at 0.5", 30.0, criterion3},
      {4, "instrument-tuned families reproduce the estimand", 1.0, criterion4},
      {5, "exclusion-violation equivalence and its variance identities", 1.0, criterion5},
      {6, "table 1 instrument-treatment correlations", 1.0, criterion6},
      {7, "figure 4 Sargan power curves (qualitative)", 300.0, criterion7},
      {8, "value-dependence counterexample anchors and quadrature", 0.0, criterion8},
      {9, "interventional family property suite", 0.0, criterion9},
      {10, "table 2 zero-restriction cases", 1.0, criterion10},
  };

  std::printf("acceptance suite, toolkit version %s\n", kVersion);
  int failed = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = criterion.budget_seconds <= 0.0 || elapsed <= criterion.budget_seconds;
    const bool pass = outcome.pass && in_budget;
    if (!pass) ++failed;

    std::ostringstream timing;
    timing.precision(2);
    timing << std::fixed << elapsed << " s";
    if (criterion.budget_seconds > 0.0) {
      timing << ", budget " << criterion.budget_seconds << " s";
      if (!in_budget) timing << " EXCEEDED";
    }
    std::printf("[%s] %2d. %s — %s (%s)\n", pass ? "PASS" : "FAIL", criterion.id,
                criterion.name.c_str(), outcome.detail.c_str(), timing.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
