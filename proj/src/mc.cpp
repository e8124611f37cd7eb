#include "subclt/mc.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <thread>
#include <utility>

#include "subclt/errors.hpp"
#include "subclt/sampling.hpp"
#include "subclt/summation.hpp"

namespace subclt {

namespace {

constexpr std::uint32_t kDomainNormal = 1;

}  // namespace

SampleBatch sample_w(int n, double p, const PatternGraph& pattern, std::int64_t m,
                     std::uint64_t seed, int threads) {
    if (m < 1) throw ConfigError("sample_w: at least one replicate is required");
    if (threads < 1) throw ConfigError("sample_w: the thread count must be positive");
    const ModelStats stats = model_stats(n, p, pattern);
    SampleBatch batch;
    batch.n = n;
    batch.p = p;
    batch.pattern = stats.pattern_label;
    batch.seed = seed;
    batch.m = m;
    batch.mean = stats.mean;
    batch.sigma = stats.sigma;
    batch.values.resize(static_cast<std::size_t>(m));

    const std::uint64_t threshold = bernoulli_threshold(p);
    const double mean = stats.mean;
    const double sigma = stats.sigma;
    auto worker = [&, threshold, mean, sigma](std::int64_t lo, std::int64_t hi) {
        EdgeUniverse universe(n);
        EdgeConfiguration config(universe);
        CopyCounter counter(n, stats.pattern);
        for (std::int64_t r = lo; r < hi; ++r) {
            sample_configuration(config, seed, static_cast<std::uint64_t>(r), threshold);
            const double s = static_cast<double>(counter.count(config));
            batch.values[static_cast<std::size_t>(r)] = (s - mean) / sigma;
        }
    };

    const int used = static_cast<int>(std::min<std::int64_t>(threads, m));
    if (used <= 1) {
        worker(0, m);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(used));
        for (int t = 0; t < used; ++t) {
            const std::int64_t lo = m * t / used;
            const std::int64_t hi = m * (t + 1) / used;
            pool.emplace_back(worker, lo, hi);
        }
        for (auto& thread : pool) thread.join();
    }
    return batch;
}

std::vector<double> sample_standard_normal(std::int64_t m, std::uint64_t seed) {
    if (m < 1) throw ConfigError("sample_standard_normal: at least one draw is required");
    std::vector<double> values(static_cast<std::size_t>(m));
    for (std::int64_t r = 0; r < m; ++r) {
        RandomStream stream(seed, static_cast<std::uint64_t>(r), kDomainNormal);
        const double u1 = 1.0 - stream.next_unit();  // (0, 1]: keeps the log finite
        const double u2 = stream.next_unit();
        values[static_cast<std::size_t>(r)] =
            std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    return values;
}

KolmogorovEstimate kolmogorov_estimate(std::vector<double> values) {
    const std::int64_t m = static_cast<std::int64_t>(values.size());
    if (m < 100) {
        throw ConfigError("kolmogorov_estimate: at least 100 samples are required");
    }
    std::sort(values.begin(), values.end());
    const double inv_m = 1.0 / static_cast<double>(m);
    double d_hat = 0.0;
    for (std::int64_t i = 1; i <= m; ++i) {
        const double phi = std_normal(values[static_cast<std::size_t>(i - 1)]).cdf;
        const double upper = static_cast<double>(i) * inv_m - phi;
        const double lower = phi - static_cast<double>(i - 1) * inv_m;
        d_hat = std::max({d_hat, upper, lower});
    }
    KolmogorovEstimate estimate;
    estimate.d_hat = d_hat;
    estimate.dkw_eps = dkw_epsilon(m);
    return estimate;
}

double dkw_epsilon(std::int64_t m, double alpha) {
    if (m < 1) throw ConfigError("dkw_epsilon: the sample size must be positive");
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw ConfigError("dkw_epsilon: the level must lie strictly between 0 and 1");
    }
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(m)));
}

EmpiricalCf empirical_cf(const std::vector<double>& values,
                         const std::vector<double>& t_grid) {
    if (values.empty()) throw ConfigError("empirical_cf: the sample is empty");
    EmpiricalCf result;
    result.t = t_grid;
    result.value.reserve(t_grid.size());
    const double count = static_cast<double>(values.size());
    for (double t : t_grid) {
        KahanComplexSum sum;
        for (double w : values) sum.add({std::cos(t * w), std::sin(t * w)});
        result.value.push_back(sum.value() / count);  // division keeps phi(0) == 1 exact
    }
    result.standard_error = std::sqrt(1.0 / count);
    return result;
}

CfDifference empirical_cf_difference(SampleBatch batch) {
    if (batch.values.empty()) {
        throw ConfigError("empirical_cf_difference: the batch is empty");
    }
    const double count = static_cast<double>(batch.values.size());
    auto shared = std::make_shared<const SampleBatch>(std::move(batch));
    CfDifference difference;
    difference.eval = [shared, count](double t) {
        KahanComplexSum sum;
        for (double w : shared->values) sum.add({std::cos(t * w), std::sin(t * w)});
        return sum.value() / count - std::exp(-0.5 * t * t);
    };
    difference.source = "mc(m=" + std::to_string(shared->m) + ")";
    difference.standard_error = std::sqrt(1.0 / count);
    return difference;
}

RateFit rate_fit(const std::vector<RatePoint>& points, RatePredictor predictor) {
    RateFit fit;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const RatePoint& point : points) {
        const double rate =
            predictor == RatePredictor::kInvNSqrt1mp ? point.rate_dense : point.rate_sparse;
        if (!(rate > 0.0)) {
            throw ConfigError("rate_fit: every predictor value must be positive");
        }
        if (point.d_hat <= point.dkw_eps) {
            fit.dropped_n.push_back(point.n);
            continue;
        }
        xs.push_back(std::log(rate));
        ys.push_back(std::log(point.d_hat));
        fit.used_n.push_back(point.n);
    }
    const std::size_t k = xs.size();
    if (k < 4) {
        throw InsufficientDataError(
            "rate_fit: fewer than four points rise above the sampling noise floor");
    }
    KahanSum x_sum;
    KahanSum y_sum;
    for (std::size_t i = 0; i < k; ++i) {
        x_sum.add(xs[i]);
        y_sum.add(ys[i]);
    }
    const double x_bar = x_sum.value() / static_cast<double>(k);
    const double y_bar = y_sum.value() / static_cast<double>(k);
    KahanSum sxx;
    KahanSum sxy;
    KahanSum syy;
    for (std::size_t i = 0; i < k; ++i) {
        const double dx = xs[i] - x_bar;
        const double dy = ys[i] - y_bar;
        sxx.add(dx * dx);
        sxy.add(dx * dy);
        syy.add(dy * dy);
    }
    if (!(sxx.value() > 0.0)) {
        throw ConfigError("rate_fit: the predictor must vary across the surviving points");
    }
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = y_bar - fit.slope * x_bar;
    KahanSum residual;
    for (std::size_t i = 0; i < k; ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        residual.add(r * r);
    }
    const double ssr = residual.value();
    fit.r_squared =
        syy.value() > 0.0 ? std::clamp(1.0 - ssr / syy.value(), 0.0, 1.0) : 0.0;
    fit.slope_stderr =
        std::sqrt(std::max(ssr, 0.0) / (static_cast<double>(k - 2) * sxx.value()));
    return fit;
}

}  // namespace subclt
