#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "subclt/errors.hpp"
#include "subclt/stein.hpp"

using namespace subclt;

TEST_CASE("standard normal point values") {
    CHECK(std_normal(0.0).cdf == 0.5);
    CHECK(std_normal(0.0).density ==
          doctest::Approx(0.398942280401432677939946059934).epsilon(1e-15));
    CHECK(std_normal(1.959964).cdf ==
          doctest::Approx(0.975000000903557595697504894747).epsilon(1e-14));
    for (double x : {0.5, 1.0, 2.0, 5.0}) {
        CHECK(std::abs(std_normal(x).cdf + std_normal(-x).cdf - 1.0) <= 1e-15);
        CHECK(std_normal(x).density == doctest::Approx(std_normal(-x).density));
        CHECK(std_normal(x).cdf > std_normal(x - 0.25).cdf);
    }
    CHECK(std_normal(40.0).cdf == 1.0);
    CHECK(std_normal(-40.0).cdf >= 0.0);
    CHECK(std_normal(-40.0).cdf <= 1e-300);
    CHECK_THROWS_AS(std_normal(std::nan("")), ConfigError);
    CHECK_THROWS_AS(std_normal(INFINITY), ConfigError);
}

TEST_CASE("ode comparison bound") {
    CHECK(ode_bound(1.0, 0.0, 0.5) ==
          doctest::Approx(0.0391422109505614910883212843593).epsilon(1e-14));
    CHECK(ode_bound(1.0, 0.0, 0.0) == 0.0);
    CHECK(ode_bound(2.0, 0.5, 0.1) ==
          doctest::Approx((2.0 / 3.0) * 0.001 * std::exp(-0.01 / 4.0) + 2.0 * 0.5 * 0.1)
              .epsilon(1e-14));
    CHECK(ode_bound(1.5, 0.25, -0.2) == ode_bound(1.5, 0.25, 0.2));
    // the validity edge itself is inside the range
    CHECK(ode_bound(4.0, 0.0, 0.125) > 0.0);
    CHECK_THROWS_AS(ode_bound(4.0, 0.0, 0.1250001), RangeError);
    CHECK_THROWS_AS(ode_bound(4.0, 0.0, -0.13), RangeError);
    CHECK_THROWS_AS(ode_bound(0.0, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(ode_bound(-1.0, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(ode_bound(1.0, -0.1, 0.0), ConfigError);
}

TEST_CASE("kolmogorov bound from the plug-in pair") {
    const double constant = st_bound(1.0, 0.0);
    CHECK(constant == doctest::Approx(6.84764182775080814869738320914).epsilon(1e-14));
    CHECK(st_bound(2.0, 3.0) ==
          doctest::Approx(2.0 * constant + (2.0 / std::numbers::pi) * 1.5).epsilon(1e-14));
    CHECK(st_bound(0.5, 1.0) ==
          doctest::Approx(0.5 * constant + (2.0 / std::numbers::pi) * 2.0).epsilon(1e-14));
    CHECK_THROWS_AS(st_bound(0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(st_bound(-2.0, 1.0), ConfigError);
    CHECK_THROWS_AS(st_bound(1.0, -1.0), ConfigError);
}

TEST_CASE("smoothing bound on a vanishing difference keeps only the tail") {
    CfDifference zero;
    zero.eval = [](double) { return std::complex<double>(0.0, 0.0); };
    zero.source = "test";
    const SmoothingResult at2 = smoothing_bound(zero, 2.0);
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    CHECK(at2.integral_part == doctest::Approx(0.0));
    CHECK(at2.tail_part ==
          doctest::Approx(24.0 * inv_sqrt_2pi / (std::numbers::pi * 2.0)).epsilon(1e-14));
    CHECK(at2.bound == doctest::Approx(at2.tail_part));
    CHECK(at2.t_limit == 2.0);
    CHECK(at2.density_bound == doctest::Approx(inv_sqrt_2pi));
    CHECK(at2.propagated_se == 0.0);

    // halving T doubles the tail term
    const SmoothingResult at1 = smoothing_bound(zero, 1.0);
    CHECK(at1.tail_part == doctest::Approx(2.0 * at2.tail_part).epsilon(1e-14));

    // an explicit density bound replaces the normal default
    const SmoothingResult custom = smoothing_bound(zero, 2.0, 0.25);
    CHECK(custom.tail_part ==
          doctest::Approx(24.0 * 0.25 / (std::numbers::pi * 2.0)).epsilon(1e-14));
}

TEST_CASE("smoothing bound integrates a known difference exactly") {
    // diff(t) = t^2 makes |diff(t)/t| = |t|, whose integral over [-T, T] is T^2
    CfDifference quadratic;
    quadratic.eval = [](double t) { return std::complex<double>(t * t, 0.0); };
    quadratic.source = "test";
    for (double t_limit : {0.5, 1.0, 3.0}) {
        const SmoothingResult result = smoothing_bound(quadratic, t_limit);
        CHECK(result.integral_part ==
              doctest::Approx(t_limit * t_limit / std::numbers::pi).epsilon(1e-9));
        CHECK(result.bound == doctest::Approx(result.integral_part + result.tail_part));
        CHECK(result.quadrature_error <= 1e-8);
    }
}

TEST_CASE("smoothing bound propagates empirical uncertainty") {
    CfDifference empirical;
    empirical.eval = [](double t) { return std::complex<double>(0.01 * t * t, 0.0); };
    empirical.source = "mc(test)";
    empirical.standard_error = 0.01;
    const double t_limit = 2.0;
    const SmoothingResult result = smoothing_bound(empirical, t_limit);
    CHECK(result.propagated_se > 0.0);
    const double s = 0.01;
    const double t0 = 0.5 * s;
    const double expected = (4.0 * t0 + 2.0 * s * std::log(t_limit / t0)) / std::numbers::pi;
    CHECK(result.propagated_se == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("smoothing bound rejects bad inputs and non-convergence") {
    CfDifference zero;
    zero.eval = [](double) { return std::complex<double>(0.0, 0.0); };
    CHECK_THROWS_AS(smoothing_bound(zero, 0.0), ConfigError);
    CHECK_THROWS_AS(smoothing_bound(zero, -1.0), ConfigError);
    CHECK_THROWS_AS(smoothing_bound(zero, 1.0, 0.0), ConfigError);
    CfDifference empty;
    CHECK_THROWS_AS(smoothing_bound(empty, 1.0), ConfigError);
    // a genuine jump inside the window can never meet the tolerance
    CfDifference step;
    step.eval = [](double t) { return std::complex<double>(t > 0.3 ? 1.0 : 0.0, 0.0); };
    CHECK_THROWS_AS(smoothing_bound(step, 1.0), QuadratureError);
}
