#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "subclt/copies.hpp"
#include "subclt/pattern.hpp"
#include "subclt/stein.hpp"

namespace subclt {

/** One Monte Carlo batch of standardized copy counts, one value per replicate. */
struct SampleBatch {
    int n = 0;
    double p = 0.0;
    std::string pattern;
    std::uint64_t seed = 0;
    std::int64_t m = 0;
    double mean = 0.0;
    double sigma = 0.0;
    std::vector<double> values;
};

/// Draw m independent G(n, p) samples and return W = (S - ES) / sigma for
/// each, with ES and sigma computed exactly from the pair-class table. The
/// value of replicate r depends only on (seed, r), so any thread count (and
/// any partition of the replicate range) produces the identical batch.
SampleBatch sample_w(int n, double p, const PatternGraph& pattern, std::int64_t m,
                     std::uint64_t seed, int threads = 1);

/// Standard normal draws on a dedicated stream domain; the null-hypothesis
/// twin of sample_w for calibrating the distance estimator.
std::vector<double> sample_standard_normal(std::int64_t m, std::uint64_t seed);

struct KolmogorovEstimate {
    double d_hat = 0.0;
    double dkw_eps = 0.0;  // 99% Dvoretzky-Kiefer-Wolfowitz half-width at this m
};

/// Kolmogorov distance between the empirical distribution of `values` and the
/// standard normal, evaluated one-sidedly at every order statistic.
KolmogorovEstimate kolmogorov_estimate(std::vector<double> values);

/// sqrt(log(2 / alpha) / (2 m)): the DKW confidence half-width.
double dkw_epsilon(std::int64_t m, double alpha = 0.01);

struct EmpiricalCf {
    std::vector<double> t;
    std::vector<std::complex<double>> value;
    double standard_error = 0.0;  // uniform-in-t bound 1 / sqrt(m)
};

EmpiricalCf empirical_cf(const std::vector<double>& values, const std::vector<double>& t_grid);

/// Empirical characteristic function of the batch minus e^{-t^2/2}, packaged
/// for the smoothing inequality with its sampling error attached.
CfDifference empirical_cf_difference(SampleBatch batch);

/** One (n, p) cell of a rate experiment. */
struct RatePoint {
    int n = 0;
    double p = 0.0;
    std::string pattern;
    std::int64_t m = 0;
    std::uint64_t seed = 0;
    double d_hat = 0.0;
    double dkw_eps = 0.0;
    double sigma = 0.0;
    double psi = 0.0;
    double rate_dense = 0.0;   // 1 / (n sqrt(1 - p))
    double rate_sparse = 0.0;  // psi^{-1/2}
};

enum class RatePredictor {
    kInvNSqrt1mp,  // regress against 1 / (n sqrt(1 - p))
    kInvSqrtPsi,   // regress against psi^{-1/2}
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_stderr = 0.0;
    std::vector<int> used_n;     // points that entered the regression
    std::vector<int> dropped_n;  // points at or below their DKW noise floor
};

/// Least-squares fit of log d_hat against the log of the chosen predictor.
/// Points whose d_hat is within the DKW half-width of zero carry no slope
/// information and are dropped; fewer than four survivors is an error.
RateFit rate_fit(const std::vector<RatePoint>& points, RatePredictor predictor);

}  // namespace subclt
