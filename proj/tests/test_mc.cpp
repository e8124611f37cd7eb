#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "subclt/errors.hpp"
#include "subclt/exhaustive.hpp"
#include "subclt/mc.hpp"
#include "subclt/pattern.hpp"

using namespace subclt;

TEST_CASE("sampling is deterministic and partition-invariant") {
    const PatternGraph triangle = PatternGraph::preset("triangle");
    const SampleBatch once = sample_w(12, 0.4, triangle, 4000, 99, 1);
    const SampleBatch twice = sample_w(12, 0.4, triangle, 4000, 99, 1);
    CHECK(once.values == twice.values);
    const SampleBatch threaded = sample_w(12, 0.4, triangle, 4000, 99, 3);
    CHECK(once.values == threaded.values);
    CHECK(once.m == 4000);
    CHECK(static_cast<std::int64_t>(once.values.size()) == once.m);
    CHECK(once.pattern == "triangle");
    CHECK(once.seed == 99);

    const SampleBatch reseeded = sample_w(12, 0.4, triangle, 4000, 100, 1);
    CHECK(once.values != reseeded.values);
}

TEST_CASE("sampled moments match the exact standardization") {
    const std::int64_t m = 20000;
    const SampleBatch batch = sample_w(20, 0.3, PatternGraph::preset("triangle"), m, 7);
    const ModelStats stats = model_stats(20, 0.3, PatternGraph::preset("triangle"));
    CHECK(batch.mean == doctest::Approx(stats.mean).epsilon(1e-13));
    CHECK(batch.sigma == doctest::Approx(stats.sigma).epsilon(1e-13));
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double w : batch.values) {
        sum += w;
        sum_sq += w * w;
    }
    const double mean_w = sum / static_cast<double>(m);
    const double var_w = sum_sq / static_cast<double>(m) - mean_w * mean_w;
    // W is exactly standardized, so the sample mean is within a few sigma/sqrt(m)
    CHECK(std::abs(mean_w) <= 4.0 / std::sqrt(static_cast<double>(m)));
    CHECK(std::abs(var_w - 1.0) <= 10.0 / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("normal sampler calibrates the distance estimator") {
    const std::int64_t m = 100000;
    const std::vector<double> draws = sample_standard_normal(m, 3);
    CHECK(static_cast<std::int64_t>(draws.size()) == m);
    const KolmogorovEstimate estimate = kolmogorov_estimate(draws);
    CHECK(estimate.dkw_eps == doctest::Approx(dkw_epsilon(m)).epsilon(1e-15));
    CHECK(estimate.d_hat > 0.0);
    CHECK(estimate.d_hat <= estimate.dkw_eps);

    const std::vector<double> replay = sample_standard_normal(m, 3);
    CHECK(draws == replay);
}

TEST_CASE("distance estimator handles degenerate samples") {
    const KolmogorovEstimate zeros = kolmogorov_estimate(std::vector<double>(100, 0.0));
    CHECK(zeros.d_hat == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(kolmogorov_estimate(std::vector<double>(99, 0.0)), ConfigError);
    CHECK_THROWS_AS(kolmogorov_estimate({}), ConfigError);
}

TEST_CASE("dkw half-width frozen value and scaling") {
    CHECK(dkw_epsilon(1000000) ==
          doctest::Approx(0.00162762363071872925505819664628).epsilon(1e-14));
    CHECK(dkw_epsilon(250000) == doctest::Approx(2.0 * dkw_epsilon(1000000)).epsilon(1e-14));
    CHECK(dkw_epsilon(1000, 0.05) ==
          doctest::Approx(std::sqrt(std::log(2.0 / 0.05) / 2000.0)).epsilon(1e-14));
    CHECK_THROWS_AS(dkw_epsilon(0), ConfigError);
    CHECK_THROWS_AS(dkw_epsilon(1000, 0.0), ConfigError);
    CHECK_THROWS_AS(dkw_epsilon(1000, 1.0), ConfigError);
}

TEST_CASE("empirical characteristic function basics") {
    const std::vector<double> zeros(200, 0.0);
    const EmpiricalCf at_zero = empirical_cf(zeros, {0.0, 0.7, -0.7});
    REQUIRE(at_zero.t.size() == 3);
    CHECK(at_zero.value[0] == std::complex<double>(1.0, 0.0));
    CHECK(at_zero.value[1] == std::complex<double>(1.0, 0.0));  // e^{i t 0} = 1
    CHECK(at_zero.standard_error == doctest::Approx(1.0 / std::sqrt(200.0)));

    // phi-hat(0) = 1 exactly for any data
    const std::vector<double> draws = sample_standard_normal(5000, 4);
    const EmpiricalCf general = empirical_cf(draws, {0.0, 1.0});
    CHECK(general.value[0] == std::complex<double>(1.0, 0.0));
    CHECK(std::abs(general.value[1]) <= 1.0 + 1e-12);
    CHECK_THROWS_AS(empirical_cf({}, {0.0}), ConfigError);
}

TEST_CASE("empirical cf tracks the exact oracle at small n") {
    const std::int64_t m = 100000;
    const SampleBatch batch = sample_w(4, 0.5, PatternGraph::preset("triangle"), m, 5);
    const ExactModel model(4, 0.5, PatternGraph::preset("triangle"));
    const ExactDistribution law = exact_distribution(model);
    const EmpiricalCf ecf = empirical_cf(batch.values, {1.0});
    const std::complex<double> exact = exact_cf(law, 1.0);
    CHECK(std::abs(ecf.value[0] - exact) <= 4.0 / std::sqrt(static_cast<double>(m)));

    const KolmogorovEstimate estimate = kolmogorov_estimate(batch.values);
    CHECK(std::abs(estimate.d_hat - kolmogorov_exact(law)) <= estimate.dkw_eps);

    CfDifference diff = empirical_cf_difference(batch);
    CHECK(diff.source == "mc(m=100000)");
    CHECK(diff.standard_error == doctest::Approx(1.0 / std::sqrt(static_cast<double>(m))));
    const std::complex<double> at1 = diff.eval(1.0);
    CHECK(std::abs(at1 - (ecf.value[0] - std::exp(-0.5))) <= 1e-12);
}

TEST_CASE("rate fit recovers a synthetic power law") {
    std::vector<RatePoint> points;
    for (int n : {20, 30, 40, 50, 60}) {
        RatePoint point;
        point.n = n;
        point.p = 0.5;
        point.m = 1000000;
        point.d_hat = 0.37 / (static_cast<double>(n) * std::sqrt(0.5));
        point.dkw_eps = dkw_epsilon(point.m);
        point.rate_dense = 1.0 / (static_cast<double>(n) * std::sqrt(0.5));
        point.rate_sparse = 1.0;
        points.push_back(point);
    }
    const RateFit fit = rate_fit(points, RatePredictor::kInvNSqrt1mp);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.intercept == doctest::Approx(std::log(0.37)).epsilon(1e-10));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.slope_stderr <= 1e-8);
    CHECK(fit.used_n == std::vector<int>{20, 30, 40, 50, 60});
    CHECK(fit.dropped_n.empty());

    // a distance flat in n has slope 0 against any shrinking predictor
    std::vector<RatePoint> flat = points;
    for (RatePoint& point : flat) point.d_hat = 0.25;
    const RateFit flat_fit = rate_fit(flat, RatePredictor::kInvNSqrt1mp);
    CHECK(flat_fit.slope == doctest::Approx(0.0));
    CHECK(flat_fit.r_squared == doctest::Approx(0.0));
}

TEST_CASE("rate fit drops noise-floor points and demands four survivors") {
    std::vector<RatePoint> points;
    for (int n : {20, 30, 40, 50, 60}) {
        RatePoint point;
        point.n = n;
        point.p = 0.5;
        point.m = 10000;
        point.d_hat = (n == 40) ? 0.001 : 0.2 * 20.0 / static_cast<double>(n);
        point.dkw_eps = dkw_epsilon(point.m);  // ~0.0163 > 0.001
        point.rate_dense = 1.0 / (static_cast<double>(n) * std::sqrt(0.5));
        point.rate_sparse = 1.0 / std::sqrt(static_cast<double>(n));
        points.push_back(point);
    }
    const RateFit fit = rate_fit(points, RatePredictor::kInvNSqrt1mp);
    CHECK(fit.dropped_n == std::vector<int>{40});
    CHECK(fit.used_n == std::vector<int>{20, 30, 50, 60});

    std::vector<RatePoint> few(points.begin(), points.begin() + 3);
    CHECK_THROWS_AS(rate_fit(few, RatePredictor::kInvNSqrt1mp), InsufficientDataError);

    std::vector<RatePoint> bad = points;
    bad[1].rate_dense = 0.0;
    CHECK_THROWS_AS(rate_fit(bad, RatePredictor::kInvNSqrt1mp), ConfigError);
}

TEST_CASE("sampler input validation") {
    const PatternGraph triangle = PatternGraph::preset("triangle");
    CHECK_THROWS_AS(sample_w(12, 0.4, triangle, 0, 1), ConfigError);
    CHECK_THROWS_AS(sample_w(12, 0.4, triangle, 100, 1, 0), ConfigError);
    CHECK_THROWS_AS(sample_w(12, 0.0, triangle, 100, 1), DegenerateError);
    CHECK_THROWS_AS(sample_w(12, 1.0, triangle, 100, 1), DegenerateError);
    CHECK_THROWS_AS(sample_standard_normal(0, 1), ConfigError);
}
