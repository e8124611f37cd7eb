#include <doctest.h>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "subclt/bkr.hpp"
#include "subclt/copies.hpp"
#include "subclt/errors.hpp"
#include "subclt/exhaustive.hpp"
#include "subclt/pattern.hpp"
#include "subclt/rate_bounds.hpp"

using namespace subclt;

TEST_CASE("absolute-moment sum matches the exhaustive oracle") {
    const int n = 5;
    const double p = 0.3;
    const ExactModel model(n, p, PatternGraph::preset("triangle"));
    const ModelStats stats = model_stats(n, p, PatternGraph::preset("triangle"));
    const double sigma = model.sigma();
    const double mean_y = std::pow(p, 3);
    const auto expected = exact_functional(model, [&](const EdgeConfiguration& config, int) {
        double total = 0.0;
        for (std::size_t j = 0; j < model.index().copy_count(); ++j) {
            bool present = true;
            for (std::int32_t e : model.index().copy(j)) present = present && config.test(e);
            total += std::abs((present ? 1.0 - mean_y : -mean_y) / sigma);
        }
        return total;
    });
    CHECK(sum_abs_x(stats) == doctest::Approx(expected.real()).epsilon(1e-10));
}

TEST_CASE("uniform bounds dominate the exact moments of the auxiliary variable") {
    const PatternGraph triangle = PatternGraph::preset("triangle");
    for (int n : {4, 5}) {
        for (double p : {0.3, 0.5, 0.7}) {
            const ExactModel model(n, p, triangle);
            const Decomposition decomposition(model.index(), p);
            const ModelStats stats = model_stats(n, p, triangle);
            const ChainSums sums = chain_sums(model.index(), p);
            const double mean_degree = ht_mean_degree_bound(stats);
            const double mean_chain = ht_mean_chain_bound(stats, sums.triple);
            const double cov_degree = covariance_degree_bound(stats);
            const double cov_chain = covariance_chain_bound(stats, sums.chain6);
            for (double t : {0.5, 1.0, 2.0}) {
                const HtMoments moments = ht_moments(model, decomposition, t);
                CHECK(std::abs(moments.mean_ht) <= mean_degree);
                CHECK(std::abs(moments.mean_ht) <= mean_chain);
                CHECK(std::abs(moments.cov_ht) <= cov_degree);
                CHECK(std::abs(moments.cov_ht) <= cov_chain);
            }
        }
    }
}

TEST_CASE("closed-form end bounds relate to the psi catalog") {
    for (double p : {0.3, 0.6}) {
        for (int n : {5, 9}) {
            const ModelStats stats = model_stats(n, p, PatternGraph::preset("triangle"));
            const PsiFormBounds shapes = psi_form_bounds(stats);
            CHECK(shapes.end1 >= sum_abs_x(stats));
            double inverse_sum = 0.0;
            for (double value : stats.psi_all.per_class) inverse_sum += 1.0 / value;
            CHECK(shapes.psi_inverse_sum == doctest::Approx(inverse_sum).epsilon(1e-13));
            const double v = stats.pattern.vertex_count();
            const double e = stats.pattern.edge_count();
            const double psi_g = std::pow(n, v) * std::pow(p, e);
            CHECK(shapes.end2_shape ==
                  doctest::Approx(psi_g * psi_g * psi_g * inverse_sum * inverse_sum)
                      .epsilon(1e-12));
            CHECK(shapes.end3_shape ==
                  doctest::Approx(shapes.end2_shape * shapes.end2_shape * inverse_sum)
                      .epsilon(1e-12));
            CHECK(shapes.end1 ==
                  doctest::Approx((2.0 / stats.sigma) * std::pow(n, v) * e * (1.0 - p))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("fitted chain constants take the max ratio over the grid") {
    const PatternGraph triangle = PatternGraph::preset("triangle");
    const double p = 0.5;
    const FittedChainConstants fitted = fit_chain_constants(triangle, p);
    CHECK(fitted.n_grid == std::vector<int>{3, 4, 5, 6});
    CHECK(fitted.c_triple > 0.0);
    CHECK(fitted.c_chain6 > 0.0);
    double c_triple = 0.0;
    double c_chain6 = 0.0;
    for (int n : fitted.n_grid) {
        const CopyIndex index = enumerate_copies(n, triangle);
        const ChainSums sums = chain_sums(index, p);
        const PsiFormBounds shapes = psi_form_bounds(model_stats(n, p, triangle));
        c_triple = std::max(c_triple, sums.triple / shapes.end2_shape);
        c_chain6 = std::max(c_chain6, sums.chain6 / shapes.end3_shape);
    }
    CHECK(fitted.c_triple == doctest::Approx(c_triple).epsilon(1e-13));
    CHECK(fitted.c_chain6 == doctest::Approx(c_chain6).epsilon(1e-13));

    // a budget that blocks only the largest grid point shrinks the grid
    ChainBudgets partial;
    partial.triple_ops = 1000;  // n = 6 needs 20 * 10^2 = 2000
    const FittedChainConstants reduced = fit_chain_constants(triangle, p, {}, partial);
    CHECK(reduced.n_grid == std::vector<int>{3, 4, 5});

    ChainBudgets starved;
    starved.triple_ops = 0;
    CHECK_THROWS_AS(fit_chain_constants(triangle, p, {}, starved), BudgetError);
}

TEST_CASE("predicted rate switches regime at the threshold") {
    const PatternGraph triangle = PatternGraph::preset("triangle");
    const ModelStats stats = model_stats(100, 0.5, triangle);
    const RatePrediction dense = predicted_rate(stats, 0.4);
    CHECK(dense.regime == RateRegime::kDense);
    CHECK(dense.rate ==
          doctest::Approx(0.0141421356237309504880168872421).epsilon(1e-14));
    CHECK(dense.rate == doctest::Approx(rate_dense(100, 0.5)).epsilon(1e-15));

    const RatePrediction sparse = predicted_rate(stats, 0.5);
    CHECK(sparse.regime == RateRegime::kSparse);
    CHECK(sparse.rate == doctest::Approx(1.0 / std::sqrt(stats.psi_value)).epsilon(1e-14));
    CHECK(sparse.rate == doctest::Approx(rate_sparse(stats)).epsilon(1e-15));

    CHECK_THROWS_AS(predicted_rate(stats, 0.0), ConfigError);
    CHECK_THROWS_AS(predicted_rate(stats, 1.0), ConfigError);
    CHECK_THROWS_AS(rate_dense(100, 1.0), DegenerateError);
}

TEST_CASE("variance shape ratio stays bounded over n") {
    const PatternGraph triangle = PatternGraph::preset("triangle");
    const ModelStats small = model_stats(4, 0.5, triangle);
    CHECK(variance_shape_ratio(small) == doctest::Approx(0.15625).epsilon(1e-12));

    const std::vector<int> ns = {4, 6, 8, 12, 16, 24, 32, 40};
    const std::vector<double> ratios = variance_shape_ratios(triangle, ns, 0.5);
    REQUIRE(ratios.size() == ns.size());
    double lo = ratios[0];
    double hi = ratios[0];
    for (double ratio : ratios) {
        CHECK(ratio > 0.0);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(hi / lo <= 10.0);
}

TEST_CASE("bound report assembles the oracle path below the size threshold") {
    const BoundReport report = build_bound_report(4, 0.5, PatternGraph::preset("triangle"));
    CHECK(report.n == 4);
    CHECK(report.pattern == "triangle");
    CHECK(report.sigma == doctest::Approx(std::sqrt(0.625)).epsilon(1e-13));
    CHECK(report.degree_open == 3);
    CHECK(report.regime == "sparse");  // p equals the default threshold
    REQUIRE(report.a.has_value());
    REQUIRE(report.epsilon.has_value());
    CHECK(report.ab_method == "exact-oracle");
    REQUIRE(report.lemma_mean_chain.has_value());
    REQUIRE(report.lemma_cov_chain.has_value());
    CHECK(!report.chain_fitted_fallback);
    CHECK(report.budget_gaps.empty());
    CHECK(report.lemma_mean_degree > 0.0);
    CHECK(report.lemma_cov_degree > 0.0);

    const std::string json1 = bound_report_to_json(report);
    const BoundReport parsed = bound_report_from_json(json1);
    const std::string json2 = bound_report_to_json(parsed);
    CHECK(json1 == json2);
    CHECK(parsed.a == report.a);
    CHECK(parsed.budget_gaps == report.budget_gaps);
    CHECK(!parsed.d_hat.has_value());
}

TEST_CASE("bound report downgrades gracefully on budget limits") {
    BoundReportOptions options;
    options.chain_budgets.triple_ops = 1000;
    options.chain_budgets.chain6_ops = 1000;
    const BoundReport report =
        build_bound_report(25, 0.3, PatternGraph::preset("triangle"), options);
    CHECK(!report.a.has_value());
    CHECK(report.ab_method.empty());
    CHECK(report.chain_fitted_fallback);
    REQUIRE(report.fitted_c_triple.has_value());
    REQUIRE(report.lemma_mean_chain.has_value());
    REQUIRE(report.lemma_cov_chain.has_value());
    CHECK(report.budget_gaps.size() >= 3);  // triple, chain6, ab

    const std::string json1 = bound_report_to_json(report);
    const BoundReport parsed = bound_report_from_json(json1);
    CHECK(bound_report_to_json(parsed) == json1);
    CHECK(!parsed.a.has_value());
    CHECK(parsed.chain_fitted_fallback);
}

TEST_CASE("bound report runs the sampling path when configured") {
    BoundReportOptions options;
    options.ab_oracle_bits = 0;
    options.ab_mc_samples = 4096;
    options.seed = 11;
    const BoundReport report =
        build_bound_report(5, 0.5, PatternGraph::preset("triangle"), options);
    REQUIRE(report.a.has_value());
    CHECK(report.ab_method == "mc(m=4096)");
    CHECK(*report.a > 0.0);
    CHECK(*report.epsilon >= 0.0);

    const BoundReport replay =
        build_bound_report(5, 0.5, PatternGraph::preset("triangle"), options);
    CHECK(bound_report_to_json(replay) == bound_report_to_json(report));
}
