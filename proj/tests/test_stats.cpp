#include <doctest.h>

#include <cmath>

#include "aggiv/errors.hpp"
#include "aggiv/stats.hpp"

using namespace aggiv;

TEST_CASE("chi-squared survival matches the closed forms for 1 and 2 dof") {
  // dof = 1: P(X > x) = erfc(sqrt(x / 2)); dof = 2: P(X > x) = exp(-x / 2).
  for (const double x : {0.0, 0.1, 0.5, 1.0, 2.706, 3.841, 6.635, 15.0, 40.0}) {
    CHECK(stats::chi_squared_sf(x, 1.0) ==
          doctest::Approx(std::erfc(std::sqrt(0.5 * x))).epsilon(1e-12));
    CHECK(stats::chi_squared_sf(x, 2.0) == doctest::Approx(std::exp(-0.5 * x)).epsilon(1e-12));
  }
}

TEST_CASE("chi-squared survival hits standard critical values") {
  // Frozen textbook quantiles: sf at the critical value equals the level.
  CHECK(stats::chi_squared_sf(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(stats::chi_squared_sf(6.634896601021213, 1.0) == doctest::Approx(0.01).epsilon(1e-10));
  CHECK(stats::chi_squared_sf(7.814727903251179, 3.0) == doctest::Approx(0.05).epsilon(1e-10));
}

TEST_CASE("regularized gamma halves are complementary and monotone") {
  for (const double s : {0.5, 1.0, 2.5, 7.0}) {
    double previous = 1.0;
    for (double x = 0.0; x <= 30.0; x += 0.5) {
      const double p = stats::regularized_gamma_p(s, x);
      const double q = stats::regularized_gamma_q(s, x);
      CHECK(p + q == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(q <= previous + 1e-14);  // survival decreases in x
      previous = q;
    }
  }
}

TEST_CASE("stats functions reject out-of-domain arguments") {
  CHECK_THROWS_AS(stats::chi_squared_sf(-1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(stats::chi_squared_sf(1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(stats::regularized_gamma_p(-2.0, 1.0), ValidationError);
}
