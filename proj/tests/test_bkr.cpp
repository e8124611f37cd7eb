#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <vector>

#include "subclt/bkr.hpp"
#include "subclt/errors.hpp"
#include "subclt/exhaustive.hpp"
#include "subclt/pattern.hpp"
#include "subclt/rng.hpp"
#include "subclt/sampling.hpp"

using namespace subclt;

namespace {

/**
 * Extended-precision reference for R_l(z). Below the switchover the series
 * converges with all terms bounded by 1/l!, so it is summed directly; above
 * it the remainder form (e^{iz} - partial sum)/(iz)^l is stable because the
 * cancellation happens before the division by a large denominator.
 */
std::complex<double> reference_remainder(double z, int l) {
    const std::complex<long double> iz(0.0L, static_cast<long double>(z));
    if (std::abs(z) < 0.5) {
        std::complex<long double> term(1.0L, 0.0L);
        long double factorial = 1.0L;
        for (int i = 1; i <= l; ++i) factorial *= i;
        term /= factorial;
        std::complex<long double> sum = term;
        for (int m = 1; m < 30; ++m) {
            term *= iz / static_cast<long double>(m + l);
            sum += term;
        }
        return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
    }
    std::complex<long double> partial(0.0L, 0.0L);
    std::complex<long double> power(1.0L, 0.0L);
    long double factorial = 1.0L;
    for (int m = 0; m < l; ++m) {
        partial += power / factorial;
        power *= iz;
        factorial *= (m + 1);
    }
    const std::complex<long double> eiz(std::cos(static_cast<long double>(z)),
                                        std::sin(static_cast<long double>(z)));
    const std::complex<long double> value = (eiz - partial) / power;
    return {static_cast<double>(value.real()), static_cast<double>(value.imag())};
}

double factorial_of(int l) {
    double f = 1.0;
    for (int i = 2; i <= l; ++i) f *= i;
    return f;
}

}  // namespace

TEST_CASE("taylor remainder values and properties") {
    SUBCASE("R_l(0) equals 1/l! exactly") {
        CHECK(taylor_remainder(0.0, 1) == std::complex<double>(1.0, 0.0));
        CHECK(taylor_remainder(0.0, 2) == std::complex<double>(0.5, 0.0));
        CHECK(taylor_remainder(0.0, 3) == std::complex<double>(1.0 / 6.0, 0.0));
    }
    SUBCASE("|R_1(pi)| = 2/pi, to the frozen reference") {
        CHECK(std::abs(taylor_remainder(std::numbers::pi, 1)) ==
              doctest::Approx(0.63661977236758134307553505349).epsilon(1e-14));
    }
    SUBCASE("both evaluation branches agree with the reference at the switchover") {
        for (int l : {1, 2, 3}) {
            for (double z : {0.49, 0.499999, 0.5, 0.500001, 0.51, -0.49, -0.5, -0.51,
                             1.0, -2.5, 0.1, -0.001, 0.0}) {
                const std::complex<double> got = taylor_remainder(z, l);
                const std::complex<double> ref = reference_remainder(z, l);
                CHECK(std::abs(got - ref) <= 1e-13);
            }
        }
    }
    SUBCASE("sup norm 1/l! and the remainder identity on random z") {
        RandomStream stream(5, 0, 0);
        for (int trial = 0; trial < 1000; ++trial) {
            const double z = -100.0 + 200.0 * stream.next_unit();
            for (int l : {1, 2, 3}) {
                const std::complex<double> r = taylor_remainder(z, l);
                CHECK(std::abs(r) <= 1.0 / factorial_of(l) + 1e-12);
                CHECK(std::abs(r - reference_remainder(z, l)) <= 1e-12);
            }
        }
    }
    CHECK_THROWS_AS(taylor_remainder(1.0, 0), ConfigError);
    CHECK_THROWS_AS(taylor_remainder(1.0, 4), ConfigError);
    CHECK_THROWS_AS(taylor_remainder(std::nan(""), 1), ConfigError);
}

TEST_CASE("decomposition realizes configurations consistently") {
    const int n = 5;
    const double p = 0.4;
    const CopyIndex index = enumerate_copies(n, PatternGraph::preset("triangle"));
    const Decomposition decomposition(index, p);
    CHECK(decomposition.copy_count() == index.copy_count());
    CHECK(decomposition.q() == doctest::Approx(std::pow(p, 3)).epsilon(1e-15));

    EdgeConfiguration config(index.universe());
    Decomposition::Realization r;
    const std::uint64_t threshold = bernoulli_threshold(p);
    for (std::uint64_t rep = 0; rep < 40; ++rep) {
        sample_configuration(config, 17, rep, threshold);
        decomposition.realize(config, r);

        // X_j from the indicator, W from the sum
        double w_direct = 0.0;
        for (std::size_t j = 0; j < index.copy_count(); ++j) {
            bool present = true;
            for (std::int32_t e : index.copy(j)) present = present && config.test(e);
            CHECK(static_cast<bool>(r.active[j]) == present);
            const double x = present ? (1.0 - decomposition.q()) / decomposition.sigma()
                                     : -decomposition.q() / decomposition.sigma();
            CHECK(r.x[j] == doctest::Approx(x).epsilon(1e-15));
            w_direct += r.x[j];
        }
        CHECK(r.w == doctest::Approx(w_direct).epsilon(1e-12));

        // Z_j is the sum of X over the closed neighborhood
        for (std::size_t j = 0; j < index.copy_count(); ++j) {
            double z_direct = 0.0;
            for (std::int32_t k : decomposition.closed(j)) {
                z_direct += r.x[static_cast<std::size_t>(k)];
            }
            CHECK(r.z[j] == doctest::Approx(z_direct).epsilon(1e-12));
        }

        // Z_j + V_jk is the sum of X over the union of closed neighborhoods,
        // and the stored intersection is really the intersection
        for (const Decomposition::Pair& pair : decomposition.pairs()) {
            const auto cj = decomposition.closed(static_cast<std::size_t>(pair.j));
            const auto ck = decomposition.closed(static_cast<std::size_t>(pair.k));
            std::set<std::int32_t> set_j(cj.begin(), cj.end());
            std::set<std::int32_t> set_k(ck.begin(), ck.end());
            std::set<std::int32_t> unioned = set_j;
            unioned.insert(set_k.begin(), set_k.end());
            double zv_direct = 0.0;
            for (std::int32_t l : unioned) zv_direct += r.x[static_cast<std::size_t>(l)];
            CHECK(decomposition.z_plus_v(r, pair) ==
                  doctest::Approx(zv_direct).epsilon(1e-12));
            CHECK(std::abs(decomposition.v_jk(r, pair) -
                           (zv_direct - r.z[static_cast<std::size_t>(pair.j)])) <= 1e-12);
            for (std::int32_t l : decomposition.intersection(pair)) {
                CHECK(set_j.count(l) == 1);
                CHECK(set_k.count(l) == 1);
            }
            std::size_t inter_direct = 0;
            for (std::int32_t l : set_j) inter_direct += set_k.count(l);
            CHECK(inter_direct == pair.inter_size);
        }
    }
}

TEST_CASE("pair product moments match the exhaustive oracle") {
    const ExactModel model(5, 0.3, PatternGraph::preset("triangle"));
    const Decomposition decomposition(model.index(), 0.3);
    const double sigma = model.sigma();
    const double mean_y = std::pow(0.3, 3);
    const auto x_of = [&](const EdgeConfiguration& config, std::int32_t j) {
        for (std::int32_t e : model.index().copy(static_cast<std::size_t>(j))) {
            if (!config.test(e)) return -mean_y / sigma;
        }
        return (1.0 - mean_y) / sigma;
    };
    for (const Decomposition::Pair& pair : decomposition.pairs()) {
        const auto expected =
            exact_functional(model, [&](const EdgeConfiguration& config, int) {
                return x_of(config, pair.j) * x_of(config, pair.k);
            });
        CHECK(pair.e_xjxk == doctest::Approx(expected.real()).epsilon(1e-10));
    }
}

TEST_CASE("characteristic equation holds on exhaustive models") {
    for (int n : {4, 5}) {
        for (double p : {0.3, 0.5, 0.7}) {
            const ExactModel model(n, p, PatternGraph::preset("triangle"));
            const Decomposition decomposition(model.index(), p);
            for (double t : {-3.0, -1.0, -0.25, 0.25, 0.5, 1.0, 2.0, 4.0}) {
                CHECK(verify_ht_identity(model, decomposition, t) <= 1e-9);
            }
        }
    }
}

TEST_CASE("ht moments expose both sides and the covariance") {
    const ExactModel model(5, 0.5, PatternGraph::preset("triangle"));
    const Decomposition decomposition(model.index(), 0.5);
    const double t = 0.8;
    const HtMoments moments = ht_moments(model, decomposition, t);
    CHECK(moments.t == t);
    CHECK(moments.identity_residual ==
          doctest::Approx(std::abs(moments.lhs - moments.rhs)).epsilon(1e-12));
    CHECK(moments.identity_residual <= 1e-9);
    const std::complex<double> phi = exact_cf(exact_distribution(model), t);
    const std::complex<double> direct = moments.rhs / (t * t) - moments.mean_ht * phi;
    CHECK(std::abs(moments.cov_ht - direct) <= 1e-12);
}

TEST_CASE("cubic decomposition identity holds pointwise") {
    for (double p : {0.3, 0.5, 0.7}) {
        const ExactModel model(5, p, PatternGraph::preset("triangle"));
        const Decomposition decomposition(model.index(), p);
        Decomposition::Realization r;
        double max_residual = 0.0;
        sweep_configurations(model, [&](const EdgeConfiguration& config, double, int) {
            decomposition.realize(config, r);
            max_residual = std::max(max_residual, decomposition.w3_residual(r));
        });
        CHECK(max_residual <= 1e-10);
    }
}

TEST_CASE("mismatched model and decomposition are rejected") {
    const ExactModel model(4, 0.5, PatternGraph::preset("triangle"));
    const CopyIndex other = enumerate_copies(4, PatternGraph::preset("triangle"));
    const Decomposition decomposition(other, 0.5);
    CHECK_THROWS_AS(ht_moments(model, decomposition, 1.0), ConfigError);
    CHECK_THROWS_AS(estimate_ab_oracle(model, decomposition), ConfigError);
    CHECK_THROWS_AS(epsilon_bkr_oracle(model, decomposition), ConfigError);
}

TEST_CASE("decomposition budget and p validation") {
    const CopyIndex index = enumerate_copies(6, PatternGraph::preset("triangle"));
    CHECK_THROWS_AS(Decomposition(index, 0.5, DecompositionBudget{5}), BudgetError);
    CHECK_THROWS_AS(Decomposition(index, 0.0), DegenerateError);
    CHECK_THROWS_AS(Decomposition(index, 1.0), DegenerateError);
}

TEST_CASE("default t grid is symmetric and reaches the validity edge") {
    const std::vector<double> grid = default_t_grid(2.0);
    REQUIRE(!grid.empty());
    const double edge = 1.0 / (2.0 * 2.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(std::abs(grid[i] + grid[grid.size() - 1 - i]) <= 1e-12);
        CHECK(std::abs(grid[i]) <= edge + 1e-12);
    }
    CHECK(std::count(grid.begin(), grid.end(), 0.0) == 1);
    CHECK(grid.back() == doctest::Approx(edge));
    CHECK(std::is_sorted(grid.begin(), grid.end()));
    const std::vector<double> wide = default_t_grid(0.001);
    CHECK(wide.size() <= 65);
    CHECK(wide.back() == doctest::Approx(1.0 / 0.002));
    CHECK_THROWS_AS(default_t_grid(0.0), ConfigError);
}

TEST_CASE("oracle and Monte Carlo plug-in estimates agree") {
    const ExactModel model(4, 0.5, PatternGraph::preset("triangle"));
    const Decomposition decomposition(model.index(), 0.5);
    const AbEstimate oracle = estimate_ab_oracle(model, decomposition);
    CHECK(oracle.method == "exact-oracle");
    CHECK(oracle.a > 0.0);
    CHECK(oracle.b_grid_max > 0.0);
    CHECK(oracle.b_majorant > 0.0);
    CHECK(oracle.majorant_is_heuristic);
    CHECK(oracle.epsilon >= 0.0);
    CHECK(oracle.a_se == 0.0);
    CHECK(oracle.b_se == 0.0);
    REQUIRE(oracle.t_grid.size() == oracle.b_at_t.size());
    double grid_max = 0.0;
    for (double b : oracle.b_at_t) grid_max = std::max(grid_max, b);
    CHECK(oracle.b_grid_max == doctest::Approx(grid_max));

    const AbEstimate mc = estimate_ab_mc(decomposition, 1 << 16, 2027, oracle.t_grid);
    CHECK(mc.method == "mc(m=65536)");
    CHECK(mc.a_se > 0.0);
    CHECK(mc.epsilon_se > 0.0);
    CHECK(std::abs(mc.a - oracle.a) <= 6.0 * mc.a_se);
    CHECK(std::abs(mc.epsilon - oracle.epsilon) <= 6.0 * mc.epsilon_se);
    CHECK(std::abs(mc.b_grid_max - oracle.b_grid_max) <=
          6.0 * std::max(mc.b_se, 0.02 * oracle.b_grid_max));

    CHECK(epsilon_bkr_oracle(model, decomposition) == doctest::Approx(oracle.epsilon));
    CHECK(epsilon_bkr_mc(decomposition, 1 << 16, 2027) == doctest::Approx(mc.epsilon));

    // the Monte Carlo path is deterministic in (m, seed)
    const AbEstimate replay = estimate_ab_mc(decomposition, 1 << 16, 2027, oracle.t_grid);
    CHECK(replay.a == mc.a);
    CHECK(replay.b_grid_max == mc.b_grid_max);
    CHECK(replay.epsilon == mc.epsilon);

    CHECK_THROWS_AS(estimate_ab_mc(decomposition, 8, 1), ConfigError);
    CHECK_THROWS_AS(estimate_ab_oracle(model, decomposition, {0.5, 1.0}), ConfigError);
}
